"""Shared builders and stubs for unit tests."""

from __future__ import annotations

import copy
from typing import Any, Dict, List

import numpy as np
from scipy import integrate, linalg

from photon_dephasing.decoherence import BiGaussianDouble, BiGaussianSingle
from photon_dephasing.map_builder import DephasingChannel, MapMatrix
from photon_dephasing.operator_basis import build_basis

BASE_CONFIG: Dict[str, Any] = {
    "mode": "rates",
    "spectrum": {"kind": "bi_gaussian_single", "sigma": 1.0, "K": 0.0},
    "dn": 1.0,
    "time_grid": {"t_start": 0.0, "t_end": 3.0, "n_points": 31},
}


def build_raw_config(**overrides: Any) -> Dict[str, Any]:
    config = copy.deepcopy(BASE_CONFIG)
    config.update(overrides)
    return config


def build_single_peak(**overrides: Any) -> BiGaussianSingle:
    params: Dict[str, Any] = {"omega0": 0.0, "delta_omega": 0.0, "sigma": 1.0, "K": 0.0}
    params.update(overrides)
    return BiGaussianSingle(**params)


def build_double_peak(**overrides: Any) -> BiGaussianDouble:
    params: Dict[str, Any] = {"omega0": 0.0, "delta_omega": 2.0, "sigma": 1.0, "K": 0.0}
    params.update(overrides)
    return BiGaussianDouble(**params)


def build_channel(spectrum: Any = None, **overrides: Any) -> DephasingChannel:
    params: Dict[str, Any] = {"spectrum": spectrum or build_single_peak(), "dn": 1.0}
    params.update(overrides)
    return DephasingChannel(**params)


def random_density_matrix(seed: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ginibre = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = ginibre @ ginibre.conj().T
    return rho / np.trace(rho).real


def qubit_generator(gamma: float, nu: float) -> np.ndarray:
    """Constant dephasing generator on the Pauli basis (I, sx, sy, sz) / sqrt2."""
    return np.array([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, -gamma, -nu, 0.0],
        [0.0, nu, -gamma, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ])


class StubMapProvider:
    """Map provider with M(t) = expm(L t) for a fixed generator, recording every call."""

    def __init__(self, generator: np.ndarray) -> None:
        self.generator = generator
        self.basis = build_basis(2, "pauli_product")
        self.map_calls: List[float] = []
        self.derivative_calls: List[float] = []

    def map_matrix(self, t: float) -> MapMatrix:
        self.map_calls.append(t)
        return MapMatrix(dim=2, t=t, M=linalg.expm(self.generator * t))

    def map_derivative(self, t: float) -> np.ndarray:
        self.derivative_calls.append(t)
        return self.generator @ linalg.expm(self.generator * t)


def interpolant_transform(omega: np.ndarray, p: np.ndarray, k: float, power: int = 0) -> complex:
    """Integral of w**power * exp(-i k w) against the piecewise-linear interpolant of (omega, p)."""
    total = 0.0 + 0.0j
    for left, right, p_left, p_right in zip(omega[:-1], omega[1:], p[:-1], p[1:]):
        slope = (p_right - p_left) / (right - left)

        def line(w: float, left: float = left, p_left: float = p_left, slope: float = slope) -> float:
            return (p_left + slope * (w - left)) * w ** power

        if k == 0.0:
            total += integrate.quad(line, left, right, epsabs=1e-15, epsrel=1e-13)[0]
            continue
        cos_part = integrate.quad(line, left, right, weight="cos", wvar=k, epsabs=1e-15, epsrel=1e-13)[0]
        sin_part = integrate.quad(line, left, right, weight="sin", wvar=k, epsabs=1e-15, epsrel=1e-13)[0]
        total += cos_part - 1j * sin_part
    return complex(total)
