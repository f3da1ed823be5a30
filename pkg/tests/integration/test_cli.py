"""End-to-end runs of the command line on the example scenarios."""

import math
import unittest

from tests.integration.scenario_workspace import ScenarioWorkspace


class CommandLineTest(unittest.TestCase):
    """Runs every mode through main() and inspects the written files."""

    def setUp(self):
        self.maxDiff = None  # pylint: disable=invalid-name
        self.workspace = ScenarioWorkspace()

    def tearDown(self):
        self.workspace.clear()

    def test_uncorrelated_photons_share_one_rate(self):
        code = self.workspace.run("rates", "--config", str(self.workspace.scenario("single_peak_rates")))
        self.assertEqual(code, 0)
        rows = self.workspace.rows("single_peak")
        self.assertEqual(len(rows), 31)
        for row in rows:
            self.assertAlmostEqual(row["gamma1_numeric"], row["gamma2_numeric"], places=8)
            self.assertAlmostEqual(row["gamma1_numeric"], 2.0 * row["t"], places=6)
            self.assertAlmostEqual(row["gamma3_numeric"], 0.0, places=8)
        summary = self.workspace.summary("single_peak")
        self.assertEqual(summary["poles"], [])
        self.assertEqual(summary["cp_divisibility"]["verdict"], "cp-divisible")
        self.assertLess(summary["max_relative_deviation"], 1e-6)

    def test_double_peak_reports_its_poles(self):
        code = self.workspace.run("rates", "--config", str(self.workspace.scenario("double_peak_rates")))
        self.assertEqual(code, 0)
        summary = self.workspace.summary("double_peak")
        expected = [math.pi / 4, math.pi / 2, 3 * math.pi / 4]
        self.assertEqual(len(summary["poles"]), 3)
        for pole, value in zip(summary["poles"], expected):
            self.assertAlmostEqual(pole, value, places=12)
        self.assertFalse(summary["cp_divisibility"]["cp_divisible"])
        rows = self.workspace.rows("double_peak")
        self.assertTrue(any(row["gamma3_numeric"] < 0 for row in rows if not row["near_pole"]))

    def test_diagonal_state_does_not_move(self):
        config = self.workspace.write_scenario("diagonal", {
            "mode": "evolve",
            "spectrum": {"kind": "bi_gaussian_single", "K": 0.3},
            "initial_state": "hh",
            "time_grid": {"t_end": 2.0, "n_points": 11},
            "output": {"prefix": "diagonal"},
        })
        self.assertEqual(self.workspace.run("evolve", "--config", str(config)), 0)
        rows = self.workspace.rows("diagonal")
        for row in rows:
            for column in ("r14", "r15", "r16"):
                self.assertAlmostEqual(row[column], rows[0][column], places=12)
            self.assertAlmostEqual(row["coh_hh_vv"], 0.0, places=12)

    def test_anticorrelated_bell_state_keeps_its_coherence(self):
        code = self.workspace.run("evolve", "--config", str(self.workspace.scenario("anticorrelated_evolve")))
        self.assertEqual(code, 0)
        for row in self.workspace.rows("anticorrelated"):
            self.assertAlmostEqual(row["coh_hh_vv"], 0.5, places=6)
            self.assertLess(row["err_sup"], 1e-6)
        summary = self.workspace.summary("anticorrelated")
        self.assertEqual(summary["bridges"], [])
        self.assertLess(summary["trace_drift"], 1e-12)

    def test_double_peak_evolution_bridges_poles(self):
        code = self.workspace.run("evolve", "--config", str(self.workspace.scenario("double_peak_evolve")))
        self.assertEqual(code, 0)
        summary = self.workspace.summary("double_peak_evolve")
        self.assertEqual(len(summary["bridges"]), 2)
        self.assertLess(summary["max_error_vs_exact"], 1e-5)

    def test_markovian_bplus_decays_monotonically(self):
        code = self.workspace.run("bplus", "--config", str(self.workspace.scenario("bplus_markovian")))
        self.assertEqual(code, 0)
        magnitudes = [row["abs_kappa"] for row in self.workspace.rows("markovian")]
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(magnitudes, magnitudes[1:])))
        summary = self.workspace.summary("markovian")
        for name, value in {"w_x": 2.0, "w_y": 1.0, "w_z": 1.0}.items():
            self.assertAlmostEqual(summary["weights"][name], value, places=12)
        self.assertLess(summary["max_residual"], 1e-12)
        self.assertEqual(sorted(summary["environment"]), ["0", "x", "y", "z"])

    def test_bplus_with_custom_phase(self):
        code = self.workspace.run("bplus", "--config", str(self.workspace.scenario("bplus_step_phase")))
        self.assertEqual(code, 0)
        summary = self.workspace.summary("step_phase")
        self.assertAlmostEqual(summary["weights"]["w_z"], 0.72, places=12)
        self.assertLess(summary["max_residual"], 1e-12)

    def test_verify_passes_with_default_tolerances(self):
        self.assertEqual(self.workspace.run("verify", "--seed", "11"), 0)
        report = self.workspace.summary("verify")
        self.assertTrue(report["passed"])
        self.assertEqual(report["seed"], 11)
        self.assertEqual(report["failed"], [])

    def test_verify_fails_under_strict_tolerances(self):
        self.assertEqual(self.workspace.run("verify", "--tolerance-profile", "strict"), 1)
        report = self.workspace.summary("verify")
        self.assertIn("tabulated_univariate", report["failed"])

    def test_configuration_errors_exit_with_two(self):
        invalid = str(self.workspace.scenario("invalid_correlation"))
        self.assertEqual(self.workspace.run("rates", "--config", invalid), 2)
        mismatch = str(self.workspace.scenario("bplus_markovian"))
        self.assertEqual(self.workspace.run("rates", "--config", mismatch), 2)
        self.assertEqual(self.workspace.run("rates", "--config", str(self.workspace.root / "missing.yml")), 2)

    def test_csv_output_is_reproducible(self):
        scenario = str(self.workspace.scenario("single_peak_rates"))
        self.assertEqual(self.workspace.run("rates", "--config", scenario, out="first"), 0)
        self.assertEqual(self.workspace.run("rates", "--config", scenario, out="second"), 0)
        self.assertEqual(self.workspace.raw("single_peak", "csv", out="first"),
                         self.workspace.raw("single_peak", "csv", out="second"))
