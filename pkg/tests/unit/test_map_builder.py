"""Unit tests for the exact channel and its map matrices."""

from __future__ import annotations

import math

import numpy as np
import pytest

from photon_dephasing.decoherence import UniGaussian, UniGaussianMixture, decoherence_set, single_photon_set
from photon_dephasing.exception import DimensionMismatchError, SingularMapError
from photon_dephasing.map_builder import (MapMatrix, analytic_bloch_double_peak, build_map_matrix, channel_table,
                                          evolve_exact)
from photon_dephasing.operator_basis import ORDERINGS, build_basis

from tests.unit.mocks import build_channel, build_double_peak, build_single_peak, random_density_matrix


@pytest.mark.parametrize("ordering", ORDERINGS)
def test_map_matrix_reproduces_the_exact_channel(ordering: str) -> None:
    channel = build_channel(build_single_peak(omega0=0.5, delta_omega=0.2, K=0.4), ordering=ordering)
    rho = random_density_matrix(11, 4)
    r0 = channel.to_bloch(rho)
    for t in (0.0, 0.3, 1.2, 2.5):
        mapped = channel.from_bloch(channel.propagate(r0, t))
        assert np.allclose(mapped, channel.evolve(rho, t), atol=1e-12)


def test_map_matrix_preserves_trace_and_starts_at_identity() -> None:
    channel = build_channel(build_double_peak(K=0.2))
    assert np.allclose(channel.map_matrix(0.0).M, np.eye(16), atol=1e-14)
    m = channel.map_matrix(1.1).M
    assert np.allclose(m[0], np.eye(16)[0])
    assert np.allclose(m[1:, 0], 0.0, atol=1e-14)
    assert np.allclose(channel.map_derivative(1.1)[0], 0.0)


def test_populations_are_untouched() -> None:
    channel = build_channel(build_single_peak(K=-0.5))
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    assert np.allclose(channel.evolve(rho, 2.0), rho)


def test_uncorrelated_map_is_a_tensor_product() -> None:
    joint = build_channel(build_single_peak(omega0=0.6, delta_omega=0.4, K=0.0), ordering="pauli_product")
    photon_a = build_channel(UniGaussian(mean=0.5, sigma=1.0), ordering="pauli_product")
    photon_b = build_channel(UniGaussian(mean=0.1, sigma=1.0), ordering="pauli_product")
    for t in (0.4, 1.7):
        product = np.kron(photon_a.map_matrix(t).M, photon_b.map_matrix(t).M)
        assert np.allclose(joint.map_matrix(t).M, product, atol=1e-12)


def test_double_peak_closed_form_matches_map() -> None:
    spec = build_double_peak(omega0=0.7, K=0.3)
    channel = build_channel(spec)
    r0 = channel.to_bloch(random_density_matrix(5, 4))
    for t in (0.2, 0.9, 2.4):
        closed = analytic_bloch_double_peak(r0, spec, 1.0, t, channel.basis)
        assert np.allclose(closed.r, channel.propagate(r0, t).r, atol=1e-12)


def test_double_peak_map_is_singular_at_its_poles() -> None:
    channel = build_channel(build_double_peak())
    poles = channel.singular_times(0.0, 3.0)
    assert poles == pytest.approx((math.pi / 4, math.pi / 2, 3 * math.pi / 4))
    assert channel.map_matrix(math.pi / 4).is_singular()
    assert not channel.map_matrix(0.5).is_singular()
    assert channel.pole_half_width == pytest.approx(1e-3 * math.pi / 4)
    assert channel.nearest_singular_time(math.pi / 2 + 1e-4, poles) == pytest.approx(math.pi / 2)
    assert channel.nearest_singular_time(1.0, poles) is None


def test_singular_times_are_located_numerically_when_unknown() -> None:
    spec = UniGaussianMixture(means=(-1.0, 1.0), sigmas=(0.2, 0.2), weights=(0.5, 0.5))
    channel = build_channel(spec)
    assert channel.dim == 2
    assert channel.singular_times(0.0, 5.0) == pytest.approx((math.pi / 2, 3 * math.pi / 2), abs=1e-6)


def test_propagator_composes_with_earlier_map() -> None:
    channel = build_channel(build_single_peak(omega0=0.3, K=0.5))
    composed = channel.propagator(2.0, 0.8).M @ channel.map_matrix(0.8).M
    assert np.allclose(composed, channel.map_matrix(2.0).M, atol=1e-12)
    with pytest.raises(SingularMapError):
        build_channel(build_double_peak()).propagator(1.0, math.pi / 4)


def test_map_matrix_diagnostics() -> None:
    identity = MapMatrix(dim=2, t=0.0, M=np.eye(4))
    assert identity.condition == pytest.approx(1.0)
    assert identity.det == pytest.approx(1.0)
    collapsed = MapMatrix(dim=2, t=1.0, M=np.diag([1.0, 0.0, 0.0, 1.0]))
    assert collapsed.is_singular()
    assert math.isinf(collapsed.condition)


def test_single_photon_table_and_dimension_checks() -> None:
    channel = build_channel(UniGaussian(mean=0.0, sigma=1.0))
    table = channel_table(channel.decoherence, 1.0)
    assert table[0, 1] == pytest.approx(math.exp(-0.5))
    assert table[1, 0] == pytest.approx(math.exp(-0.5))
    with pytest.raises(DimensionMismatchError):
        channel.evolve(np.eye(4) / 4, 1.0)
    with pytest.raises(DimensionMismatchError):
        build_channel(build_single_peak(), basis=build_basis(2))


def test_module_level_builders_match_the_channel() -> None:
    spec = build_single_peak(omega0=0.2, K=-0.3)
    ds = decoherence_set(spec, 1.0)
    channel = build_channel(spec)
    rho = random_density_matrix(5, 4)
    assert np.allclose(evolve_exact(rho, ds, 0.9), channel.evolve(rho, 0.9))
    assert np.allclose(build_map_matrix(ds, 0.9, channel.basis).M, channel.map_matrix(0.9).M)
    qubit = single_photon_set(UniGaussian(), 1.0)
    evolved = evolve_exact(np.full((2, 2), 0.5), qubit, 2.0)
    assert np.allclose(np.diag(evolved), [0.5, 0.5])
    assert abs(evolved[0, 1]) == pytest.approx(0.5 * math.exp(-2.0))
    with pytest.raises(DimensionMismatchError):
        build_map_matrix(qubit, 1.0, build_basis(4))


@pytest.mark.parametrize("spec", [build_single_peak(omega0=0.3, delta_omega=0.5, K=0.7), build_double_peak(K=-0.3)])
def test_exact_evolution_keeps_states_physical(spec: object) -> None:
    ds = decoherence_set(spec, 1.0)
    for seed in range(5):
        rho = random_density_matrix(seed, 4)
        for t in np.linspace(0.0, 3.0, 13):
            evolved = evolve_exact(rho, ds, float(t))
            assert np.allclose(evolved, evolved.conj().T, atol=1e-13)
            assert np.trace(evolved).real == pytest.approx(1.0)
            assert np.linalg.eigvalsh(evolved).min() >= -1e-12
