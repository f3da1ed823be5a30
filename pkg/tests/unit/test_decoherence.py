"""Unit tests for frequency distributions and decoherence functions."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from photon_dephasing.decoherence import (KAPPA, KAPPA_A, KAPPA_AB, KAPPA_B, LAMBDA_AB, BiTabulated, UniGaussian,
                                          UniGaussianMixture, UniLorentzian, UniTabulated, decoherence_set,
                                          kappa_correlated, kappa_single, load_bivariate_csv, load_univariate_csv,
                                          single_photon_set)
from photon_dephasing.exception import (LogDerivativeError, NormalizationError, SpecValidationError,
                                        UnsupportedSpecError)
from photon_dephasing.profiles import ConstantPhase, LinearPhase

from tests.unit.mocks import build_double_peak, build_single_peak, interpolant_transform

TIMES = np.linspace(0.0, 3.0, 13)


def test_gaussian_closed_form() -> None:
    spec = UniGaussian(mean=0.5, sigma=2.0)
    expected = np.exp(-0.5 * 4.0 * 1.5 ** 2 * TIMES ** 2 - 1j * 1.5 * 0.5 * TIMES)
    assert np.allclose(spec.kappa(1.5, TIMES), expected, atol=1e-14)
    assert spec.kappa(1.5, 0.0) == pytest.approx(1.0)
    assert spec.rate_scale() == 2.0


def test_lorentzian_closed_form_and_conjugation() -> None:
    spec = UniLorentzian(center=0.3, width=0.7)
    expected = np.exp(-0.7 * TIMES - 1j * 0.3 * TIMES)
    assert np.allclose(spec.kappa(1.0, TIMES), expected, atol=1e-14)
    assert np.allclose(spec.kappa(1.0, -TIMES), np.conj(expected), atol=1e-14)
    assert spec.heavy_tailed


def test_mixture_is_weighted_sum() -> None:
    spec = UniGaussianMixture(means=(-1.0, 1.0), sigmas=(0.2, 0.2), weights=(0.5, 0.5))
    expected = np.exp(-0.02 * TIMES ** 2) * np.cos(TIMES)
    assert np.allclose(spec.kappa(1.0, TIMES), expected, atol=1e-14)
    with pytest.raises(NormalizationError):
        UniGaussianMixture(means=(0.0,), sigmas=(1.0,), weights=(0.5,))


def test_invalid_parameters_are_rejected() -> None:
    with pytest.raises(SpecValidationError):
        UniGaussian(sigma=0.0)
    with pytest.raises(SpecValidationError):
        UniLorentzian(width=-1.0)
    with pytest.raises(SpecValidationError):
        build_single_peak(K=1.5)
    with pytest.raises(SpecValidationError):
        UniGaussian(mean=math.nan)


def test_tabulated_gaussian_matches_closed_form() -> None:
    spec = UniGaussian(mean=0.2, sigma=1.0)
    omega = np.linspace(-7.8, 8.2, 80001)
    table = UniTabulated.from_samples(omega, spec.density(omega))
    assert np.allclose(table.kappa(1.0, TIMES), spec.kappa(1.0, TIMES), atol=1e-8)
    assert np.allclose(table.kappa_dot(1.0, TIMES), spec.kappa_dot(1.0, TIMES), atol=1e-7)
    assert table.rate_scale() == pytest.approx(1.0, rel=1e-6)


def test_tabulated_requires_normalized_density() -> None:
    omega = np.linspace(-1.0, 1.0, 5)
    with pytest.raises(NormalizationError):
        UniTabulated(omega=omega, p=np.ones(5))
    with pytest.raises(SpecValidationError):
        UniTabulated(omega=np.array([0.0, 0.0, 1.0]), p=np.array([1.0, 1.0, 1.0]))


COARSE_OMEGA = np.linspace(-8.0, 8.0, 33)


def coarse_density() -> np.ndarray:
    values = UniGaussian(mean=0.3, sigma=1.0).density(COARSE_OMEGA)
    return values / integrate.trapezoid(values, COARSE_OMEGA)


@pytest.mark.parametrize("t", [2.0, 20.0])
def test_coarse_table_transforms_its_interpolant(t: float) -> None:
    table = UniTabulated.from_samples(COARSE_OMEGA, coarse_density())
    assert table.kappa(1.0, t) == pytest.approx(interpolant_transform(table.omega, table.p, t), abs=1e-10)
    expected_dot = -1j * interpolant_transform(table.omega, table.p, t, power=1)
    assert table.kappa_dot(1.0, t) == pytest.approx(expected_dot, abs=1e-10)


def test_coarse_table_does_not_alias_at_large_times() -> None:
    table = UniTabulated.from_samples(COARSE_OMEGA, coarse_density())
    assert abs(table.kappa(1.0, 20.0)) < 1e-6
    assert abs(table.kappa(1.0, 0.0)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [2.0, 20.0])
def test_coarse_bivariate_table_factorizes_into_interpolant_transforms(t: float) -> None:
    q = coarse_density()
    ds = decoherence_set(BiTabulated.from_samples(COARSE_OMEGA, COARSE_OMEGA, np.outer(q, q)), 1.0)
    f = interpolant_transform(COARSE_OMEGA, q, t)
    df = -1j * interpolant_transform(COARSE_OMEGA, q, t, power=1)
    expected = {
        KAPPA_A: (f, df),
        KAPPA_B: (f, df),
        KAPPA_AB: (f * f, 2.0 * f * df),
        LAMBDA_AB: (f * np.conj(f), df * np.conj(f) + f * np.conj(df)),
    }
    for name, (value, derivative) in expected.items():
        assert ds.value(name, t) == pytest.approx(value, abs=1e-10)
        assert ds.derivative(name, t) == pytest.approx(derivative, abs=1e-10)
    assert abs(ds.value(KAPPA_A, 20.0)) < 1e-6


@pytest.mark.parametrize("spec", [
    UniGaussian(mean=0.4, sigma=0.8),
    UniGaussianMixture(means=(-1.0, 0.5), sigmas=(0.3, 0.6), weights=(0.3, 0.7)),
    UniTabulated.from_samples(COARSE_OMEGA, UniGaussian(mean=0.3, sigma=1.0).density(COARSE_OMEGA)),
])
def test_single_photon_kappa_conjugates_under_time_reversal(spec: object) -> None:
    times = np.linspace(0.1, 4.0, 9)
    assert np.allclose(spec.kappa(1.3, -times), np.conj(spec.kappa(1.3, times)), atol=1e-13)


@pytest.mark.parametrize("spec", [
    build_single_peak(omega0=0.3, delta_omega=0.4, K=0.6),
    build_double_peak(omega0=0.2, K=-0.4),
    BiTabulated.from_samples(COARSE_OMEGA, COARSE_OMEGA, np.outer(coarse_density(), coarse_density()[::-1])),
])
def test_two_photon_functions_conjugate_under_time_reversal(spec: object) -> None:
    ds = decoherence_set(spec, 1.0)
    for t in (0.3, 1.1, 2.7):
        for name in ds.names:
            assert ds.value(name, -t) == pytest.approx(np.conj(ds.value(name, t)), abs=1e-13)


def test_univariate_csv_loader(tmp_path: Path) -> None:
    path = tmp_path / "spectrum.csv"
    path.write_text("omega,p\n-1,0.5\n0,0.5\n1,0.5\n", encoding="utf-8")
    spec = load_univariate_csv(path)
    assert spec.kappa(1.0, 0.0) == pytest.approx(1.0)
    assert spec.describe()["path"] == str(path)


def test_single_peak_uncorrelated_factorizes() -> None:
    ds = decoherence_set(build_single_peak(omega0=0.4, delta_omega=0.2, K=0.0), 1.0)
    for t in TIMES:
        ka, kb = ds.value(KAPPA_A, t), ds.value(KAPPA_B, t)
        assert ds.value(KAPPA_AB, t) == pytest.approx(ka * kb, abs=1e-14)
        assert ds.value(LAMBDA_AB, t) == pytest.approx(ka * np.conj(kb), abs=1e-14)


def test_anticorrelated_photons_keep_the_hh_vv_coherence() -> None:
    ds = decoherence_set(build_single_peak(K=-1.0), 1.0)
    assert np.allclose(np.abs(ds.value(KAPPA_AB, TIMES)), 1.0)
    assert np.allclose(np.abs(ds.value(LAMBDA_AB, TIMES)), np.exp(-2.0 * TIMES ** 2))


def test_double_peak_functions_and_poles() -> None:
    spec = build_double_peak(K=0.0)
    ds = decoherence_set(spec, 1.0)
    assert np.allclose(ds.value(KAPPA_A, TIMES), np.exp(-0.5 * TIMES ** 2) * np.cos(TIMES), atol=1e-14)
    assert np.allclose(ds.value(LAMBDA_AB, TIMES), np.exp(-TIMES ** 2) * np.cos(2.0 * TIMES), atol=1e-14)
    assert spec.pole_spacing(1.0) == pytest.approx(math.pi / 4)
    assert spec.singular_times(1.0, 0.0, 3.0) == pytest.approx((math.pi / 4, math.pi / 2, 3 * math.pi / 4))
    with pytest.raises(LogDerivativeError):
        ds.log_derivative(LAMBDA_AB, math.pi / 4)


def test_bivariate_table_matches_closed_form() -> None:
    spec = build_single_peak(K=0.5)
    grid = np.linspace(-7.0, 7.0, 701)
    x, y = np.meshgrid(grid, grid, indexing="ij")
    p = np.exp(-0.5 * (x * x - x * y + y * y) / 0.75) / (2 * math.pi * math.sqrt(0.75))
    table = decoherence_set(BiTabulated.from_samples(grid, grid, p), 1.0)
    closed = decoherence_set(spec, 1.0)
    for t in (0.0, 0.7, 1.9):
        for name in closed.names:
            assert table.value(name, t) == pytest.approx(closed.value(name, t), abs=1e-4)
            assert table.derivative(name, t) == pytest.approx(closed.derivative(name, t), abs=5e-4)


def test_set_builders_check_the_variate() -> None:
    with pytest.raises(UnsupportedSpecError):
        decoherence_set(UniGaussian(), 1.0)
    with pytest.raises(UnsupportedSpecError):
        single_photon_set(build_single_peak(), 1.0)
    assert single_photon_set(UniGaussian(), 1.0).names == (KAPPA,)


def test_correlated_kappa_with_linear_phase_is_a_time_shift() -> None:
    spec = UniGaussian(mean=0.0, sigma=1.0)
    times = np.array([0.0, 2.0, 4.0, 6.0])
    values = kappa_correlated(spec, LinearPhase(slope=4.0), 1.0, times)
    assert np.allclose(values, np.exp(-0.5 * (times - 4.0) ** 2), atol=1e-8)
    constant = kappa_correlated(spec, ConstantPhase(0.5), 1.0, times)
    assert np.allclose(constant, np.exp(0.5j) * np.asarray(spec.kappa(1.0, times)), atol=1e-14)


def test_correlated_kappa_rejects_heavy_tails() -> None:
    with pytest.raises(UnsupportedSpecError):
        kappa_correlated(UniLorentzian(), LinearPhase(slope=1.0), 1.0, [1.0])


def test_kappa_single_dispatches_on_the_variate() -> None:
    assert kappa_single(UniLorentzian(center=0.0, width=0.5), 2.0, 1.0) == pytest.approx(math.exp(-1.0))
    assert np.allclose(kappa_single(UniGaussian(), 1.0, TIMES), np.exp(-0.5 * TIMES ** 2))
    with pytest.raises(UnsupportedSpecError):
        kappa_single(build_single_peak(), 1.0, 0.5)


def test_bivariate_csv_must_be_a_row_major_grid(tmp_path: Path) -> None:
    grid = (-1.0, 0.0, 1.0)
    lines = ["omega_a,omega_b,p"] + [f"{a},{b},0.25" for a in grid for b in grid]
    path = tmp_path / "pairs.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    spec = load_bivariate_csv(path)
    assert spec.p.shape == (3, 3)
    assert spec.describe()["path"] == str(path)
    unnormalized = tmp_path / "unnormalized.csv"
    unnormalized.write_text("\n".join(line.replace(",0.25", ",1") for line in lines) + "\n", encoding="utf-8")
    with pytest.raises(NormalizationError):
        load_bivariate_csv(unnormalized)
    assert np.allclose(load_bivariate_csv(unnormalized, normalize=True).p, 0.25)
    shuffled = tmp_path / "shuffled.csv"
    shuffled.write_text("\n".join([lines[0], *reversed(lines[1:])]) + "\n", encoding="utf-8")
    with pytest.raises(SpecValidationError):
        load_bivariate_csv(shuffled)
