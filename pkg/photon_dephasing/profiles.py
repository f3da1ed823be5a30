"""Frequency-dependent initial phases theta(omega) for correlated single-photon states."""

import csv
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .exception import SpecValidationError

LOGGER = logging.getLogger(__name__)


class PhaseProfile(ABC):

    @abstractmethod
    def __call__(self, omega: np.ndarray) -> np.ndarray:
        """Phase in radians at each angular frequency."""

    def breakpoints(self) -> Tuple[float, ...]:
        """Frequencies where the profile is not smooth."""
        return ()

    @property
    def is_constant(self) -> bool:
        return False

    def describe(self) -> dict:
        return {'kind': type(self).__name__}


@dataclass(frozen=True)
class ConstantPhase(PhaseProfile):
    theta: float = 0.0

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.full(np.shape(omega), self.theta, dtype=float)

    @property
    def is_constant(self) -> bool:
        return True

    def describe(self) -> dict:
        return {'kind': 'constant', 'theta': self.theta}


@dataclass(frozen=True)
class LinearPhase(PhaseProfile):
    """theta(omega) = slope * (omega - reference)."""

    slope: float
    reference: float = 0.0

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return self.slope * (np.asarray(omega, dtype=float) - self.reference)

    @property
    def is_constant(self) -> bool:
        return self.slope == 0.0

    def describe(self) -> dict:
        return {'kind': 'linear', 'slope': self.slope, 'reference': self.reference}


@dataclass(frozen=True)
class StepPhase(PhaseProfile):
    """low below ``at``, high from ``at`` upwards."""

    at: float
    low: float
    high: float

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(omega, dtype=float) < self.at, self.low, self.high)

    def breakpoints(self) -> Tuple[float, ...]:
        return (self.at,)

    @property
    def is_constant(self) -> bool:
        return self.low == self.high

    def describe(self) -> dict:
        return {'kind': 'step', 'at': self.at, 'low': self.low, 'high': self.high}


@dataclass(frozen=True, eq=False)
class BinnedPhase(PhaseProfile):
    """Piecewise-constant phase; the outer bins extend to +-infinity."""

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if edges.ndim != 1 or values.shape != (edges.size + 1,):
            raise SpecValidationError('binned phase needs len(values) == len(edges) + 1')
        if np.any(np.diff(edges) <= 0):
            raise SpecValidationError('binned phase edges must be strictly increasing')
        object.__setattr__(self, 'edges', edges)
        object.__setattr__(self, 'values', values)

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return self.values[np.searchsorted(self.edges, np.asarray(omega, dtype=float), side='right')]

    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(float(edge) for edge in self.edges)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def describe(self) -> dict:
        return {'kind': 'binned', 'edges': self.edges.tolist(), 'values': self.values.tolist()}


@dataclass(frozen=True, eq=False)
class TabulatedPhase(PhaseProfile):
    """Linear interpolation of sampled (omega, theta) pairs, held constant outside the table."""

    omega: np.ndarray
    theta: np.ndarray
    source: str = field(default='')

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        if omega.ndim != 1 or omega.shape != theta.shape or omega.size < 2:
            raise SpecValidationError('tabulated phase needs matching 1-D omega and theta columns')
        if np.any(np.diff(omega) <= 0):
            raise SpecValidationError('tabulated phase omega column must be strictly increasing')
        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'theta', theta)

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(omega, dtype=float), self.omega, self.theta)

    def breakpoints(self) -> Tuple[float, ...]:
        return (float(self.omega[0]), float(self.omega[-1]))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.theta == self.theta[0]))

    def describe(self) -> dict:
        return {'kind': 'tabulated', 'path': self.source, 'points': int(self.omega.size)}


def load_phase_csv(path: Union[str, Path]) -> TabulatedPhase:
    omega, theta = read_columns(path, ('omega', 'theta'))
    LOGGER.info('loaded %d phase samples from %s', omega.size, path)
    return TabulatedPhase(omega=omega, theta=theta, source=str(path))


def read_columns(path: Union[str, Path], names: Tuple[str, ...]) -> Tuple[np.ndarray, ...]:
    """Read the named float columns of a headed CSV file."""
    with Path(path).open(newline='', encoding='utf-8') as fh:
        reader = csv.DictReader(fh)
        header = [name.strip() for name in reader.fieldnames or []]
        missing = [name for name in names if name not in header]
        if missing:
            raise SpecValidationError(f'{path}: missing column(s) {missing}; found {header}')
        rows = [{key.strip(): value for key, value in row.items()} for row in reader]
    if not rows:
        raise SpecValidationError(f'{path}: no data rows')
    return tuple(np.array([float(row[name]) for row in rows]) for name in names)


__all__ = [
    'BinnedPhase',
    'ConstantPhase',
    'LinearPhase',
    'PhaseProfile',
    'StepPhase',
    'TabulatedPhase',
    'load_phase_csv',
    'read_columns',
]
