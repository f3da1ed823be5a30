"""Unit tests for the bath-positive decomposition."""

from __future__ import annotations

import math

import numpy as np
import pytest

from photon_dephasing.bplus import (CorrelatedPFState, bplus_kappas, bplus_terms, direct_reduced_state,
                                    environment_terms_on_grid, frequency_grid, initial_reduced_state, q_operators,
                                    reconstruct_reduced_state, regime_summary, weights, zero_coherence_condition)
from photon_dephasing.decoherence import UniGaussian
from photon_dephasing.exception import (DegenerateWeightError, GridResolutionError, NormalizationError,
                                        UnsupportedSpecError)
from photon_dephasing.presets import ROOT_HALF, bplus_preset
from photon_dephasing.profiles import ConstantPhase, StepPhase

from tests.unit.mocks import build_single_peak


def build_state(theta: object = None, c_h: complex = ROOT_HALF, c_v: complex = ROOT_HALF) -> CorrelatedPFState:
    return CorrelatedPFState(c_h=c_h, c_v=c_v, amplitude=UniGaussian(mean=0.0, sigma=1.0),
                             theta=theta or ConstantPhase(0.0))


def test_weights_for_known_states() -> None:
    assert weights(build_state()).as_dict() == pytest.approx({"w_x": 2.0, "w_y": 1.0, "w_z": 1.0})
    assert weights(build_state(c_h=1.0, c_v=0.0)).as_dict() == pytest.approx({"w_x": 1.0, "w_y": 1.0, "w_z": 2.0})
    step = weights(build_state(StepPhase(at=0.0, low=0.0, high=math.pi)))
    assert step.as_dict() == pytest.approx({"w_x": 1.0, "w_y": 1.0, "w_z": 1.0}, abs=1e-9)


def test_state_validation() -> None:
    with pytest.raises(NormalizationError):
        build_state(c_h=1.0, c_v=1.0)
    with pytest.raises(UnsupportedSpecError):
        CorrelatedPFState(c_h=1.0, c_v=0.0, amplitude=build_single_peak(), theta=ConstantPhase(0.0))


@pytest.mark.parametrize("preset", ["markovian", "np_map", "non_markovian"])
def test_three_term_form_reproduces_the_reduced_state(preset: str) -> None:
    state = bplus_preset(preset)
    for t in (0.0, 1.3, 4.0):
        reconstructed = reconstruct_reduced_state(state, 1.0, t)
        assert np.allclose(reconstructed, direct_reduced_state(state, 1.0, t), atol=1e-8)
    terms = bplus_terms(state, 1.0, np.linspace(0.0, 4.0, 9))
    assert np.max(terms.residual(state)) < 1e-12


def test_initial_state_is_the_weighted_sum_of_q_operators() -> None:
    state = bplus_preset("non_markovian")
    assert np.allclose(initial_reduced_state(state), direct_reduced_state(state, 1.0, 0.0), atol=1e-9)
    q = q_operators()
    assert np.trace(q["0"]).real == pytest.approx(1.0)
    for name in ("x", "y", "z"):
        assert np.trace(q[name]) == pytest.approx(0.0)
        assert np.allclose(q[name], q[name].conj().T)


def test_degenerate_weight_is_reported() -> None:
    state = build_state(ConstantPhase(math.pi))
    terms = bplus_terms(state, 1.0, [0.0, 1.0])
    assert terms.weights.w_x == pytest.approx(0.0, abs=1e-12)
    assert terms.warnings
    with pytest.raises(DegenerateWeightError):
        terms.kappa_x
    assert np.all(np.isfinite(terms.weighted_x))
    assert np.allclose(terms.kappa_y, terms.weighted_y)
    assert "x" not in environment_terms_on_grid(state, 128)


def test_environment_kernels_are_states() -> None:
    kernels = environment_terms_on_grid(bplus_preset("markovian"), 128)
    assert sorted(kernels) == ["0", "x", "y", "z"]
    for kernel in kernels.values():
        assert kernel.trace == pytest.approx(1.0)
        assert kernel.min_eigenvalue > -1e-10
        assert kernel.trace_error < 1e-6
    assert kernels["x"].rank() == 1


def test_frequency_grid_requires_enough_nodes() -> None:
    state = bplus_preset("coherence_trapping")
    with pytest.raises(GridResolutionError):
        frequency_grid(state, 32)
    omega, quadrature = frequency_grid(state, 128)
    assert omega.size >= 128
    assert np.all(np.diff(omega) > 0)
    assert np.all(quadrature > 0)


def test_zero_coherence_condition() -> None:
    balanced = weights(build_state(c_h=1.0, c_v=0.0))
    assert zero_coherence_condition(balanced, 0.3, 0.3, 0.3)
    assert zero_coherence_condition(weights(build_state()), 0.0, 0.0, 0.0)
    assert not zero_coherence_condition(weights(build_state()), 0.3, 0.3, 0.3)


def test_regime_summary_separates_monotone_and_rising_decay() -> None:
    times = np.linspace(0.0, 4.0, 41)
    markovian = regime_summary(bplus_terms(bplus_preset("markovian"), 1.0, times))
    assert markovian["max_increase"] is not None
    assert markovian["max_increase"] <= 1e-12
    rising = regime_summary(bplus_terms(bplus_preset("np_map"), 1.0, times))
    assert rising["floor"] == pytest.approx(1.0, abs=1e-6)
    assert rising["max_revival"] is not None
    assert rising["max_revival"] > 0.9
    assert regime_summary(bplus_terms(bplus_preset("markovian"), 1.0, [1.0]))["floor"] is None


def test_bplus_kappas_match_the_terms() -> None:
    state = bplus_preset("np_map")
    times = np.linspace(0.0, 2.0, 5)
    kappa0, kappa_x, kappa_y = bplus_kappas(state, 1.0, times)
    terms = bplus_terms(state, 1.0, times)
    assert kappa0[0] == pytest.approx(1.0)
    assert np.allclose(kappa0, terms.kappa0)
    assert np.allclose(kappa_x, terms.kappa_x)
    assert np.allclose(kappa_y, terms.kappa_y)
