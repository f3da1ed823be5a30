"""Unit tests for Bloch-space integration and the CP-divisibility report."""

from __future__ import annotations

import math

import numpy as np
import pytest

from photon_dephasing.decoherence import UniLorentzian
from photon_dephasing.integrator import IntegrationOptions, cp_divisibility_report, integrate

from tests.unit.mocks import build_channel, build_double_peak, build_single_peak, random_density_matrix


def test_single_peak_trajectory_follows_the_exact_map() -> None:
    channel = build_channel(build_single_peak(omega0=0.4, K=0.3))
    r0 = channel.to_bloch(random_density_matrix(2, 4))
    times = np.linspace(0.0, 2.0, 9)
    trajectory = integrate(r0, channel, 2.0, t_eval=times)
    assert len(trajectory) == 9
    assert not trajectory.bridges
    assert not trajectory.bridged.any()
    assert trajectory.trace_drift == pytest.approx(0.0, abs=1e-14)
    for i, t in enumerate(times):
        assert np.allclose(trajectory.states[i], channel.propagate(r0, float(t)).r, atol=1e-6)
    assert trajectory.step_times.size == trajectory.step_errors.size > 0
    assert np.all(np.isfinite(trajectory.step_errors))
    assert np.all(trajectory.step_errors >= 0.0)
    assert trajectory.step_errors.max() < 100.0


def test_double_peak_pole_is_bridged_with_the_exact_map() -> None:
    channel = build_channel(build_double_peak(K=0.0))
    r0 = channel.to_bloch(random_density_matrix(4, 4))
    times = [0.5, math.pi / 4, 1.0]
    trajectory = integrate(r0, channel, 1.0, t_eval=times)
    assert len(trajectory.bridges) == 1
    bridge = trajectory.bridges[0]
    assert bridge.pole == pytest.approx(math.pi / 4)
    assert bridge.t_exit - bridge.t_enter == pytest.approx(2 * channel.pole_half_width)
    assert trajectory.bridged.tolist() == [False, True, False]
    assert np.allclose(trajectory.states[1], channel.propagate(r0, math.pi / 4).r, atol=1e-12)
    assert np.allclose(trajectory.final.r, channel.propagate(r0, 1.0).r, atol=1e-5)
    for rho in trajectory.matrices(channel.basis):
        assert np.trace(rho).real == pytest.approx(1.0)


def test_states_entering_a_pole_together_leave_it_apart() -> None:
    channel = build_channel(build_double_peak(K=0.0))
    mixed = random_density_matrix(5, 4)
    first = channel.to_bloch(0.5 * mixed + 0.5 * np.diag([0.7, 0.1, 0.1, 0.1]))
    second = channel.to_bloch(0.5 * mixed + 0.5 * np.diag([0.1, 0.1, 0.1, 0.7]))
    pole = math.pi / 4
    runs = [integrate(r0, channel, 1.0, t_eval=[pole, 1.0]) for r0 in (first, second)]
    assert all(run.bridged.tolist() == [True, False] for run in runs)
    assert not np.allclose(runs[0].states[0], runs[1].states[0], atol=1e-3)
    assert not np.allclose(runs[0].final.r, runs[1].final.r, atol=1e-3)
    for r0, run in zip((first, second), runs):
        assert np.allclose(run.final.r, channel.propagate(r0, 1.0).r, atol=1e-5)
    difference = runs[0].final.r - runs[1].final.r
    assert np.allclose(difference, channel.propagate(first.r - second.r, 1.0).r, atol=1e-5)


def test_default_output_is_the_end_point() -> None:
    channel = build_channel(build_single_peak())
    r0 = channel.to_bloch(random_density_matrix(0, 4))
    trajectory = integrate(r0, channel, 0.5, IntegrationOptions(rtol=1e-10, atol=1e-12))
    assert trajectory.times.tolist() == [0.5]


def test_invalid_requests_are_rejected() -> None:
    channel = build_channel(build_single_peak())
    r0 = channel.to_bloch(random_density_matrix(0, 4))
    with pytest.raises(ValueError):
        integrate(r0, channel, 0.0)
    with pytest.raises(ValueError):
        integrate(r0, channel, 1.0, t_eval=[0.5, 1.5])
    with pytest.raises(ValueError):
        integrate(np.zeros(4), channel, 1.0)


def test_single_peak_is_cp_divisible_but_not_a_semigroup() -> None:
    report = cp_divisibility_report(build_channel(build_single_peak(K=0.5)), np.linspace(0.0, 2.0, 11))
    assert report.cp_divisible
    assert not report.semigroup
    assert report.verdict == "cp-divisible"
    assert not report.negative_intervals
    assert report.rates.shape == (11, 3)


def test_lorentzian_channel_is_a_semigroup() -> None:
    channel = build_channel(UniLorentzian(center=0.5, width=0.7))
    report = cp_divisibility_report(channel, np.linspace(0.1, 2.0, 8))
    assert report.semigroup
    assert report.as_dict()["verdict"] == "semigroup"
    assert np.allclose(report.rates, 0.7)


def test_double_peak_has_negative_rates_and_skips_poles() -> None:
    channel = build_channel(build_double_peak(K=0.0))
    grid = np.linspace(0.05, 3.0, 60)
    report = cp_divisibility_report(channel, np.append(grid, math.pi / 2))
    assert not report.cp_divisible
    assert report.verdict == "not cp-divisible"
    assert report.negative_intervals[0][0] == pytest.approx(0.05)
    assert math.pi / 2 in report.skipped
    summary = report.as_dict()
    assert summary["skipped_times"] == list(report.skipped)
    assert min(summary["min_rates"]) < 0
