"""Decoherence functions of one- and two-photon frequency distributions.

A decoherence function is the characteristic function of the frequency
distribution sampled at Delta n * t::

    kappa(t) = integral dw P(w) exp(-i dn w t)

Gaussian, Lorentzian and Gaussian-mixture distributions use closed forms with
analytic derivatives. A tabulated distribution is the linear interpolant of its
samples; its transform is integrated exactly per segment with Gauss-Legendre
panels no wider than half an oscillation period, and the derivative is taken
under the integral sign.
Phase-weighted transforms (frequency-dependent initial phase theta) use
vector-valued adaptive Gauss-Kronrod quadrature over the effective support.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, Union, cast

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate

from .exception import LogDerivativeError, NormalizationError, SpecValidationError, UnsupportedSpecError
from .profiles import PhaseProfile, read_columns
from .settings import DEFAULT_TOLERANCES, Tolerances

LOGGER = logging.getLogger(__name__)

KAPPA = 'kappa'
KAPPA_A = 'kappa_a'
KAPPA_B = 'kappa_b'
KAPPA_AB = 'kappa_ab'
LAMBDA_AB = 'lambda_ab'
TWO_PHOTON_FUNCTIONS = (KAPPA_A, KAPPA_B, KAPPA_AB, LAMBDA_AB)

SUPPORT_SIGMAS = 8.0

TimeFunction = Callable[[Union[float, np.ndarray]], Union[complex, np.ndarray]]
Times = Union[float, Sequence[float], np.ndarray]


def _times(t: Times) -> np.ndarray:
    return np.asarray(t, dtype=float)


def _unwrap(values: np.ndarray) -> Union[complex, np.ndarray]:
    return complex(values) if np.ndim(values) == 0 else values


def _check_finite(name: str, *values: float) -> None:
    if not all(math.isfinite(value) for value in values):
        raise SpecValidationError(f'{name}: parameters must be finite')


def _check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise SpecValidationError(f'{name} must be positive, got {value!r}')


def _check_correlation(K: float) -> None:
    if not -1.0 <= K <= 1.0:
        raise SpecValidationError(f'correlation coefficient K={K!r} outside [-1, 1]')


def _gaussian(t: np.ndarray, variance: float, drift: float) -> np.ndarray:
    return np.exp(-0.5 * variance * t * t - 1j * drift * t)


def _gaussian_dot(t: np.ndarray, variance: float, drift: float) -> np.ndarray:
    return (-variance * t - 1j * drift) * _gaussian(t, variance, drift)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Weights w with sum(w * f) equal to the trapezoidal integral of f over grid."""
    steps = np.diff(grid)
    weights = np.zeros_like(grid)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def _oscillation_limit(dn: float, t: float) -> float:
    """Widest panel that still spans at most half an oscillation period."""
    rate = abs(dn * t)
    return math.pi / rate if rate > 0 else math.inf


GAUSS_ORDER = 8
_GAUSS_NODES, _GAUSS_WEIGHTS = legendre.leggauss(GAUSS_ORDER)


def hat_transforms(grid: np.ndarray, dn: float, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Transforms of the hat functions spanning the linear interpolant on grid.

    Returns H_j = integral dw hat_j(w) exp(-i dn w t) and dH_j/dt, so that the
    transform of the interpolant through samples p is p @ H. Each segment is
    split into Gauss-Legendre panels spanning at most half an oscillation period.
    """
    widths = np.diff(grid)
    limit = _oscillation_limit(dn, t)
    if math.isfinite(limit):
        panels = np.maximum(1, np.ceil(widths / limit)).astype(int)
    else:
        panels = np.ones(widths.size, dtype=int)
    segment = np.repeat(np.arange(widths.size), panels)
    offset = np.arange(segment.size) - np.repeat(np.cumsum(panels) - panels, panels)
    count = panels[segment][:, None]
    # position of every node inside its segment, in [0, 1]
    u = (offset[:, None] + 0.5 * (_GAUSS_NODES[None, :] + 1.0)) / count
    omega = grid[segment][:, None] + u * widths[segment][:, None]
    weight = (0.5 * widths[segment])[:, None] / count * _GAUSS_WEIGHTS[None, :]
    phase = weight * np.exp(-1j * dn * t * omega)
    moment = -1j * dn * omega * phase
    values = np.zeros(grid.size, dtype=np.complex128)
    derivatives = np.zeros(grid.size, dtype=np.complex128)
    for out, integrand in ((values, phase), (derivatives, moment)):
        np.add.at(out, segment, np.sum((1.0 - u) * integrand, axis=1))
        np.add.at(out, segment + 1, np.sum(u * integrand, axis=1))
    return values, derivatives


# ----------------------------------------------------------------------
# Distribution specs ----------------------------------------------------
class FrequencySpec(ABC):
    variate: int = 0

    @abstractmethod
    def rate_scale(self) -> float:
        """Spectral width used to normalize time (sigma for Gaussians)."""

    def singular_times(self, dn: float, t_start: float, t_end: float) -> Optional[Tuple[float, ...]]:
        """Times where a decoherence function vanishes, or None when unknown in closed form."""
        return None

    def pole_spacing(self, dn: float) -> float:
        return math.pi / (self.rate_scale() * abs(dn))

    def describe(self) -> Dict[str, object]:
        return {'kind': type(self).__name__, **asdict(cast(Any, self))}


class UnivariateSpec(FrequencySpec):
    variate = 1
    heavy_tailed = False

    @abstractmethod
    def density(self, omega: np.ndarray) -> np.ndarray:
        """Probability density |g(omega)|^2."""

    @abstractmethod
    def kappa(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        ...

    @abstractmethod
    def kappa_dot(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        ...

    @abstractmethod
    def support(self) -> Tuple[float, float]:
        ...

    def amplitude(self, omega: np.ndarray) -> np.ndarray:
        return np.sqrt(self.density(omega))

    def breakpoints(self) -> Tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class UniGaussian(UnivariateSpec):
    mean: float = 0.0
    sigma: float = 1.0

    def __post_init__(self) -> None:
        _check_finite('UniGaussian', self.mean, self.sigma)
        _check_positive('sigma', self.sigma)

    def rate_scale(self) -> float:
        return self.sigma

    def singular_times(self, dn: float, t_start: float, t_end: float) -> Optional[Tuple[float, ...]]:
        return ()

    def density(self, omega: np.ndarray) -> np.ndarray:
        z = (np.asarray(omega, dtype=float) - self.mean) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def kappa(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        return _unwrap(_gaussian(_times(t), (self.sigma * dn) ** 2, dn * self.mean))

    def kappa_dot(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        return _unwrap(_gaussian_dot(_times(t), (self.sigma * dn) ** 2, dn * self.mean))

    def support(self) -> Tuple[float, float]:
        return self.mean - SUPPORT_SIGMAS * self.sigma, self.mean + SUPPORT_SIGMAS * self.sigma

    def breakpoints(self) -> Tuple[float, ...]:
        return (self.mean,)


@dataclass(frozen=True)
class UniLorentzian(UnivariateSpec):
    """Cauchy distribution; kappa is evaluated at |t| so that kappa(-t) = kappa(t)*."""

    center: float = 0.0
    width: float = 1.0
    heavy_tailed = True

    def __post_init__(self) -> None:
        _check_finite('UniLorentzian', self.center, self.width)
        _check_positive('width', self.width)

    def rate_scale(self) -> float:
        return self.width

    def singular_times(self, dn: float, t_start: float, t_end: float) -> Optional[Tuple[float, ...]]:
        return ()

    def density(self, omega: np.ndarray) -> np.ndarray:
        x = np.asarray(omega, dtype=float) - self.center
        return self.width / (math.pi * (x * x + self.width ** 2))

    def kappa(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        times = _times(t)
        return _unwrap(np.exp(-self.width * abs(dn) * np.abs(times) - 1j * dn * self.center * times))

    def kappa_dot(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        times = _times(t)
        # right derivative at t = 0
        slope = -self.width * abs(dn) * np.where(times < 0, -1.0, 1.0) - 1j * dn * self.center
        return _unwrap(slope * np.asarray(self.kappa(dn, times)))

    def support(self) -> Tuple[float, float]:
        raise UnsupportedSpecError('Lorentzian amplitudes have no finite effective support')


@dataclass(frozen=True, eq=False)
class UniGaussianMixture(UnivariateSpec):
    means: Tuple[float, ...]
    sigmas: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        means, sigmas, weights = (tuple(float(v) for v in values) for values in (self.means, self.sigmas, self.weights))
        if not len(means) == len(sigmas) == len(weights) or not means:
            raise SpecValidationError('mixture needs equally many means, sigmas and weights')
        _check_finite('UniGaussianMixture', *means, *sigmas, *weights)
        for sigma in sigmas:
            _check_positive('sigma', sigma)
        if any(weight < 0 for weight in weights):
            raise SpecValidationError('mixture weights must be nonnegative')
        if abs(sum(weights) - 1.0) > DEFAULT_TOLERANCES.normalization:
            raise NormalizationError(f'mixture weights sum to {sum(weights)!r}')
        object.__setattr__(self, 'means', means)
        object.__setattr__(self, 'sigmas', sigmas)
        object.__setattr__(self, 'weights', weights)

    @property
    def components(self) -> Tuple[UniGaussian, ...]:
        return tuple(UniGaussian(mean=m, sigma=s) for m, s in zip(self.means, self.sigmas))

    def rate_scale(self) -> float:
        mean = sum(w * m for w, m in zip(self.weights, self.means))
        second = sum(w * (s * s + m * m) for w, m, s in zip(self.weights, self.means, self.sigmas))
        return math.sqrt(max(second - mean * mean, 0.0))

    def density(self, omega: np.ndarray) -> np.ndarray:
        return sum(w * c.density(omega) for w, c in zip(self.weights, self.components))

    def kappa(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        return _unwrap(sum(w * np.asarray(c.kappa(dn, t)) for w, c in zip(self.weights, self.components)))

    def kappa_dot(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        return _unwrap(sum(w * np.asarray(c.kappa_dot(dn, t)) for w, c in zip(self.weights, self.components)))

    def support(self) -> Tuple[float, float]:
        bounds = [c.support() for c in self.components]
        return min(lo for lo, _ in bounds), max(hi for _, hi in bounds)

    def breakpoints(self) -> Tuple[float, ...]:
        lo, hi = self.support()
        points = {m + k * s for m, s in zip(self.means, self.sigmas) for k in (-6, -4, -2, 0, 2, 4, 6)}
        return tuple(sorted(p for p in points if lo < p < hi))

    def describe(self) -> Dict[str, object]:
        return {'kind': 'UniGaussianMixture', 'means': list(self.means), 'sigmas': list(self.sigmas),
                'weights': list(self.weights)}


def _validate_grid(name: str, grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise SpecValidationError(f'{name} needs at least three samples')
    if np.any(np.diff(grid) <= 0) or not np.all(np.isfinite(grid)):
        raise SpecValidationError(f'{name} must be finite and strictly increasing')
    return grid


def _validate_density(p: np.ndarray, norm: float, tolerance: float) -> None:
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise SpecValidationError('tabulated probabilities must be finite and nonnegative')
    if abs(norm - 1.0) > tolerance:
        raise NormalizationError(f'tabulated distribution integrates to {norm!r}, not 1')


@dataclass(frozen=True, eq=False)
class UniTabulated(UnivariateSpec):
    omega: np.ndarray
    p: np.ndarray
    source: str = field(default='')

    def __post_init__(self) -> None:
        omega = _validate_grid('omega', self.omega)
        p = np.asarray(self.p, dtype=float)
        if p.shape != omega.shape:
            raise SpecValidationError('omega and p columns differ in length')
        _validate_density(p, float(integrate.trapezoid(p, omega)), DEFAULT_TOLERANCES.normalization)
        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'p', p)

    @classmethod
    def from_samples(cls, omega: Sequence[float], p: Sequence[float], normalize: bool = True,
                     source: str = '') -> 'UniTabulated':
        grid = _validate_grid('omega', np.asarray(omega, dtype=float))
        values = np.asarray(p, dtype=float)
        if normalize:
            values = values / integrate.trapezoid(values, grid)
        return cls(omega=grid, p=values, source=source)

    def rate_scale(self) -> float:
        mean = integrate.trapezoid(self.p * self.omega, self.omega)
        second = integrate.trapezoid(self.p * self.omega ** 2, self.omega)
        return math.sqrt(max(second - mean * mean, 0.0))

    def density(self, omega: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(omega, dtype=float), self.omega, self.p, left=0.0, right=0.0)

    def kappa(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        return self.__transform(dn, t, moment=False)

    def kappa_dot(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        return self.__transform(dn, t, moment=True)

    def support(self) -> Tuple[float, float]:
        return float(self.omega[0]), float(self.omega[-1])

    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(float(w) for w in self.omega[1:-1])

    def describe(self) -> Dict[str, object]:
        return {'kind': 'UniTabulated', 'path': self.source, 'points': int(self.omega.size)}

    def __transform(self, dn: float, t: Times, moment: bool) -> Union[complex, np.ndarray]:
        times = _times(t)
        out = np.empty(times.shape, dtype=np.complex128)
        for index, value in np.ndenumerate(times):
            values, derivatives = hat_transforms(self.omega, dn, float(value))
            out[index] = self.p @ (derivatives if moment else values)
        return _unwrap(out)


@dataclass(frozen=True, eq=False)
class AmplitudeFunction(UnivariateSpec):
    """Arbitrary real amplitude g(omega) supported on [lower, upper]."""

    function: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float

    def __post_init__(self) -> None:
        _check_finite('AmplitudeFunction', self.lower, self.upper)
        if not self.upper > self.lower:
            raise SpecValidationError('amplitude support must have upper > lower')
        norm, _ = integrate.quad(lambda w: float(self.density(np.asarray(w))), self.lower, self.upper, limit=200)
        if abs(norm - 1.0) > DEFAULT_TOLERANCES.normalization:
            raise NormalizationError(f'|g|^2 integrates to {norm!r}, not 1')

    def rate_scale(self) -> float:
        mean, _ = integrate.quad(lambda w: w * float(self.density(np.asarray(w))), self.lower, self.upper, limit=200)
        second, _ = integrate.quad(lambda w: w * w * float(self.density(np.asarray(w))), self.lower, self.upper,
                                   limit=200)
        return math.sqrt(max(second - mean * mean, 0.0))

    def density(self, omega: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(self.function(omega))) ** 2

    def kappa(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        times = _times(t)
        values = phase_weighted_transforms(self, [lambda w: 1.0], dn, np.atleast_1d(times))[0]
        return _unwrap(values.reshape(times.shape))

    def kappa_dot(self, dn: float, t: Times) -> Union[complex, np.ndarray]:
        times = _times(t)
        values = phase_weighted_transforms(self, [lambda w: -1j * dn * w], dn, np.atleast_1d(times))[0]
        return _unwrap(values.reshape(times.shape))

    def support(self) -> Tuple[float, float]:
        return self.lower, self.upper

    def describe(self) -> Dict[str, object]:
        return {'kind': 'AmplitudeFunction', 'lower': self.lower, 'upper': self.upper}


class BivariateSpec(FrequencySpec):
    variate = 2

    @abstractmethod
    def decoherence_functions(self, dn: float) -> Tuple[Dict[str, TimeFunction], Dict[str, TimeFunction]]:
        """Values and time derivatives of kappa_a, kappa_b, kappa_ab and lambda_ab."""


@dataclass(frozen=True)
class BiGaussianSingle(BivariateSpec):
    """Bivariate Gaussian with local means (omega0 +- delta_omega) / 2 and correlation K."""

    omega0: float = 0.0
    delta_omega: float = 0.0
    sigma: float = 1.0
    K: float = 0.0

    def __post_init__(self) -> None:
        _check_finite('BiGaussianSingle', self.omega0, self.delta_omega, self.sigma, self.K)
        _check_positive('sigma', self.sigma)
        _check_correlation(self.K)

    @property
    def means(self) -> Tuple[float, float]:
        return 0.5 * (self.omega0 + self.delta_omega), 0.5 * (self.omega0 - self.delta_omega)

    def rate_scale(self) -> float:
        return self.sigma

    def singular_times(self, dn: float, t_start: float, t_end: float) -> Optional[Tuple[float, ...]]:
        return ()

    def decoherence_functions(self, dn: float) -> Tuple[Dict[str, TimeFunction], Dict[str, TimeFunction]]:
        s = (self.sigma * dn) ** 2
        mean_a, mean_b = self.means
        params = {
            KAPPA_A: (s, dn * mean_a),
            KAPPA_B: (s, dn * mean_b),
            KAPPA_AB: (2.0 * s * (1.0 + self.K), dn * self.omega0),
            LAMBDA_AB: (2.0 * s * (1.0 - self.K), dn * self.delta_omega),
        }
        values = {name: _closed(_gaussian, *p) for name, p in params.items()}
        derivatives = {name: _closed(_gaussian_dot, *p) for name, p in params.items()}
        return values, derivatives


def _closed(func: Callable[[np.ndarray, float, float], np.ndarray], variance: float, drift: float) -> TimeFunction:
    return lambda t: _unwrap(func(_times(t), variance, drift))


@dataclass(frozen=True)
class BiGaussianDouble(BivariateSpec):
    """Equal-weight mixture of two bivariate Gaussians.

    The peaks sit at (omega0 -+ delta_omega, omega0 +- delta_omega) / 2.
    """

    omega0: float = 0.0
    delta_omega: float = 0.0
    sigma: float = 1.0
    K: float = 0.0

    def __post_init__(self) -> None:
        _check_finite('BiGaussianDouble', self.omega0, self.delta_omega, self.sigma, self.K)
        _check_positive('sigma', self.sigma)
        _check_correlation(self.K)

    def rate_scale(self) -> float:
        return self.sigma

    def pole_spacing(self, dn: float) -> float:
        split = abs(dn * self.delta_omega)
        return math.pi / (2.0 * split) if split > 0 else math.inf

    def singular_times(self, dn: float, t_start: float, t_end: float) -> Optional[Tuple[float, ...]]:
        """Zeros of cos(t dn dw) (odd multiples of pi/2) and of cos(t dn dw / 2) (pi + 2k pi)."""
        spacing = self.pole_spacing(dn)
        if not math.isfinite(spacing):
            return ()
        poles = []
        for m in range(max(1, math.floor(t_start / spacing)), math.ceil(t_end / spacing) + 1):
            if m % 2 == 1 or m % 4 == 2:
                t = m * spacing
                if t_start <= t <= t_end:
                    poles.append(t)
        return tuple(poles)

    def decoherence_functions(self, dn: float) -> Tuple[Dict[str, TimeFunction], Dict[str, TimeFunction]]:
        s = (self.sigma * dn) ** 2
        split = dn * self.delta_omega
        centre = dn * self.omega0

        def local(t: Times) -> Union[complex, np.ndarray]:
            times = _times(t)
            return _unwrap(_gaussian(times, s, 0.5 * centre) * np.cos(0.5 * split * times))

        def local_dot(t: Times) -> Union[complex, np.ndarray]:
            times = _times(t)
            envelope = _gaussian(times, s, 0.5 * centre)
            envelope_dot = _gaussian_dot(times, s, 0.5 * centre)
            return _unwrap(envelope_dot * np.cos(0.5 * split * times)
                           - 0.5 * split * envelope * np.sin(0.5 * split * times))

        def difference(t: Times) -> Union[complex, np.ndarray]:
            times = _times(t)
            return _unwrap(_gaussian(times, 2.0 * s * (1.0 - self.K), 0.0) * np.cos(split * times))

        def difference_dot(t: Times) -> Union[complex, np.ndarray]:
            times = _times(t)
            variance = 2.0 * s * (1.0 - self.K)
            return _unwrap(_gaussian_dot(times, variance, 0.0) * np.cos(split * times)
                           - split * _gaussian(times, variance, 0.0) * np.sin(split * times))

        total = 2.0 * s * (1.0 + self.K)
        values = {KAPPA_A: local, KAPPA_B: local, KAPPA_AB: _closed(_gaussian, total, centre), LAMBDA_AB: difference}
        derivatives = {KAPPA_A: local_dot, KAPPA_B: local_dot, KAPPA_AB: _closed(_gaussian_dot, total, centre),
                       LAMBDA_AB: difference_dot}
        return values, derivatives


@dataclass(frozen=True, eq=False)
class BiTabulated(BivariateSpec):
    """Rectangular grid with p[i, j] the density at (omega_a[i], omega_b[j])."""

    omega_a: np.ndarray
    omega_b: np.ndarray
    p: np.ndarray
    source: str = field(default='')

    def __post_init__(self) -> None:
        omega_a = _validate_grid('omega_a', self.omega_a)
        omega_b = _validate_grid('omega_b', self.omega_b)
        p = np.asarray(self.p, dtype=float)
        if p.shape != (omega_a.size, omega_b.size):
            raise SpecValidationError(f'p has shape {p.shape}, expected {(omega_a.size, omega_b.size)}')
        _validate_density(p, float(np.sum(self.weights_for(omega_a, omega_b) * p)), DEFAULT_TOLERANCES.normalization)
        object.__setattr__(self, 'omega_a', omega_a)
        object.__setattr__(self, 'omega_b', omega_b)
        object.__setattr__(self, 'p', p)

    @staticmethod
    def weights_for(omega_a: np.ndarray, omega_b: np.ndarray) -> np.ndarray:
        return np.outer(trapezoid_weights(omega_a), trapezoid_weights(omega_b))

    @classmethod
    def from_samples(cls, omega_a: Sequence[float], omega_b: Sequence[float], p: np.ndarray, normalize: bool = True,
                     source: str = '') -> 'BiTabulated':
        grid_a = _validate_grid('omega_a', np.asarray(omega_a, dtype=float))
        grid_b = _validate_grid('omega_b', np.asarray(omega_b, dtype=float))
        values = np.asarray(p, dtype=float)
        if normalize:
            values = values / np.sum(cls.weights_for(grid_a, grid_b) * values)
        return cls(omega_a=grid_a, omega_b=grid_b, p=values, source=source)

    def rate_scale(self) -> float:
        q = self.weights_for(self.omega_a, self.omega_b) * self.p
        variances = []
        for grid, marginal in ((self.omega_a, q.sum(axis=1)), (self.omega_b, q.sum(axis=0))):
            mean = float(marginal @ grid)
            variances.append(max(float(marginal @ grid ** 2) - mean * mean, 0.0))
        return math.sqrt(0.5 * sum(variances))

    def decoherence_functions(self, dn: float) -> Tuple[Dict[str, TimeFunction], Dict[str, TimeFunction]]:
        transform = _BivariateGridTransform(self, dn)
        values = {name: transform.function(name, derivative=False) for name in TWO_PHOTON_FUNCTIONS}
        derivatives = {name: transform.function(name, derivative=True) for name in TWO_PHOTON_FUNCTIONS}
        return values, derivatives

    def describe(self) -> Dict[str, object]:
        return {'kind': 'BiTabulated', 'path': self.source, 'shape': list(self.p.shape)}


class _BivariateGridTransform:

    def __init__(self, spec: BiTabulated, dn: float) -> None:
        self.spec = spec
        self.dn = dn
        self.evaluate = lru_cache(maxsize=1024)(self.__evaluate)

    def function(self, name: str, derivative: bool) -> TimeFunction:
        slot = 1 if derivative else 0

        def evaluate(t: Times) -> Union[complex, np.ndarray]:
            times = _times(t)
            out = np.empty(times.shape, dtype=np.complex128)
            for index, value in np.ndenumerate(times):
                out[index] = self.evaluate(float(value))[slot][name]
            return _unwrap(out)

        return evaluate

    def __evaluate(self, t: float) -> Tuple[Dict[str, complex], Dict[str, complex]]:
        spec, dn = self.spec, self.dn
        ea, da = hat_transforms(spec.omega_a, dn, t)
        eb, db = hat_transforms(spec.omega_b, dn, t)
        p = spec.p
        row = p @ trapezoid_weights(spec.omega_b)
        col = trapezoid_weights(spec.omega_a) @ p
        p_eb, p_ebc, p_db, p_dbc = p @ eb, p @ eb.conj(), p @ db, p @ db.conj()
        values = {
            KAPPA_A: complex(ea @ row),
            KAPPA_B: complex(col @ eb),
            KAPPA_AB: complex(ea @ p_eb),
            LAMBDA_AB: complex(ea @ p_ebc),
        }
        derivatives = {
            KAPPA_A: complex(da @ row),
            KAPPA_B: complex(col @ db),
            KAPPA_AB: complex(da @ p_eb + ea @ p_db),
            LAMBDA_AB: complex(da @ p_ebc + ea @ p_dbc),
        }
        return values, derivatives


# ----------------------------------------------------------------------
# Decoherence sets ------------------------------------------------------
@dataclass(frozen=True, eq=False)
class DecoherenceSet:
    dn: float
    functions: Mapping[str, TimeFunction]
    derivatives: Mapping[str, TimeFunction]
    spec: Optional[FrequencySpec] = None

    @property
    def arity(self) -> int:
        return 1 if KAPPA in self.functions else 2

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.functions)

    def value(self, name: str, t: Times) -> Union[complex, np.ndarray]:
        return self.functions[name](t)

    def derivative(self, name: str, t: Times) -> Union[complex, np.ndarray]:
        return self.derivatives[name](t)

    def log_derivative(self, name: str, t: float, floor: float = DEFAULT_TOLERANCES.singular) -> complex:
        value = complex(self.value(name, t))
        if abs(value) <= floor:
            raise LogDerivativeError(t, name)
        return complex(self.derivative(name, t)) / value


def kappa_single(spec: FrequencySpec, dn: float, t: Times) -> Union[complex, np.ndarray]:
    if not isinstance(spec, UnivariateSpec):
        raise UnsupportedSpecError(f'{type(spec).__name__} is not a univariate distribution')
    return spec.kappa(dn, t)


def single_photon_set(spec: FrequencySpec, dn: float) -> DecoherenceSet:
    if not isinstance(spec, UnivariateSpec):
        raise UnsupportedSpecError(f'{type(spec).__name__} is not a univariate distribution')
    return DecoherenceSet(
        dn=dn,
        functions={KAPPA: lambda t: spec.kappa(dn, t)},
        derivatives={KAPPA: lambda t: spec.kappa_dot(dn, t)},
        spec=spec,
    )


def decoherence_set(spec: FrequencySpec, dn: float) -> DecoherenceSet:
    if not isinstance(spec, BivariateSpec):
        raise UnsupportedSpecError(f'{type(spec).__name__} is not a bivariate distribution')
    K = getattr(spec, 'K', 0.0)
    _check_correlation(K)
    values, derivatives = spec.decoherence_functions(dn)
    return DecoherenceSet(dn=dn, functions=values, derivatives=derivatives, spec=spec)


def channel_decoherence(spec: FrequencySpec, dn: float) -> DecoherenceSet:
    """Two-photon set for bivariate specs, single-photon set otherwise."""
    return decoherence_set(spec, dn) if isinstance(spec, BivariateSpec) else single_photon_set(spec, dn)


# ----------------------------------------------------------------------
# Phase-weighted transforms ---------------------------------------------
def _panel_points(spec: UnivariateSpec, dn: float, times: np.ndarray,
                  extra: Sequence[float]) -> Tuple[float, float, list]:
    lo, hi = spec.support()
    limit = _oscillation_limit(dn, float(np.max(np.abs(times), initial=0.0)))
    panels = 1 if not math.isfinite(limit) else max(1, math.ceil((hi - lo) / limit))
    edges = set(np.linspace(lo, hi, panels + 1)[1:-1].tolist())
    edges.update(float(p) for p in (*spec.breakpoints(), *extra) if lo < p < hi)
    return lo, hi, sorted(edges)


def phase_weighted_transforms(spec: UnivariateSpec, factors: Sequence[Callable[[float], complex]], dn: float,
                              times: Sequence[float], tolerances: Tolerances = DEFAULT_TOLERANCES,
                              breakpoints: Sequence[float] = ()) -> np.ndarray:
    """integral dw |g(w)|^2 factor(w) exp(-i dn w t) for every factor and time, shape (factors, times)."""
    if spec.heavy_tailed:
        raise UnsupportedSpecError(f'{type(spec).__name__} amplitudes are not supported in phase-weighted transforms')
    grid = np.asarray(times, dtype=float)
    lo, hi, points = _panel_points(spec, dn, grid, breakpoints)
    count = len(factors)

    def integrand(omega: float) -> np.ndarray:
        base = float(spec.density(np.asarray(omega))) * np.exp(-1j * dn * omega * grid)
        stacked = np.concatenate([complex(factor(omega)) * base for factor in factors])
        return np.concatenate([stacked.real, stacked.imag])

    result, error = integrate.quad_vec(integrand, lo, hi, epsabs=tolerances.quadrature, epsrel=tolerances.quadrature,
                                       norm='max', points=points or None, limit=20000)
    LOGGER.debug('quad_vec over [%g, %g] with %d breakpoints, error estimate %.2e', lo, hi, len(points), error)
    half = count * grid.size
    return (result[:half] + 1j * result[half:]).reshape(count, grid.size)


def kappa_correlated(g: UnivariateSpec, theta: PhaseProfile, dn: float, t: Times,
                     tolerances: Tolerances = DEFAULT_TOLERANCES) -> Union[complex, np.ndarray]:
    """integral dw |g(w)|^2 exp(i theta(w)) exp(-i dn w t)."""
    if not isinstance(g, UnivariateSpec):
        raise UnsupportedSpecError(f'{type(g).__name__} is not a univariate amplitude')
    times = _times(t)
    if theta.is_constant:
        phase = np.exp(1j * float(theta(np.asarray(0.0))))
        return _unwrap(phase * np.asarray(g.kappa(dn, times), dtype=np.complex128))
    values = phase_weighted_transforms(
        g, [lambda w: np.exp(1j * float(theta(np.asarray(w))))], dn, np.atleast_1d(times), tolerances,
        breakpoints=theta.breakpoints(),
    )[0]
    return _unwrap(values.reshape(times.shape))


# ----------------------------------------------------------------------
# Loaders ---------------------------------------------------------------
def load_univariate_csv(path: Union[str, Path], normalize: bool = False) -> UniTabulated:
    omega, p = read_columns(path, ('omega', 'p'))
    LOGGER.info('loaded %d univariate samples from %s', omega.size, path)
    if normalize:
        return UniTabulated.from_samples(omega, p, normalize=True, source=str(path))
    return UniTabulated(omega=omega, p=p, source=str(path))


def load_bivariate_csv(path: Union[str, Path], normalize: bool = False) -> BiTabulated:
    omega_a, omega_b, p = read_columns(path, ('omega_a', 'omega_b', 'p'))
    grid_a = np.array(list(dict.fromkeys(omega_a.tolist())))
    grid_b = np.array(list(dict.fromkeys(omega_b.tolist())))
    if grid_a.size * grid_b.size != p.size or not (
        np.array_equal(omega_a, np.repeat(grid_a, grid_b.size))
        and np.array_equal(omega_b, np.tile(grid_b, grid_a.size))
    ):
        raise SpecValidationError(f'{path}: samples are not a rectangular grid in row-major order')
    LOGGER.info('loaded %dx%d bivariate samples from %s', grid_a.size, grid_b.size, path)
    table = p.reshape(grid_a.size, grid_b.size)
    if normalize:
        return BiTabulated.from_samples(grid_a, grid_b, table, normalize=True, source=str(path))
    return BiTabulated(omega_a=grid_a, omega_b=grid_b, p=table, source=str(path))


__all__ = [
    'AmplitudeFunction',
    'BiGaussianDouble',
    'BiGaussianSingle',
    'BiTabulated',
    'BivariateSpec',
    'DecoherenceSet',
    'FrequencySpec',
    'KAPPA',
    'KAPPA_A',
    'KAPPA_AB',
    'KAPPA_B',
    'LAMBDA_AB',
    'TWO_PHOTON_FUNCTIONS',
    'UniGaussian',
    'UniGaussianMixture',
    'UniLorentzian',
    'UniTabulated',
    'UnivariateSpec',
    'channel_decoherence',
    'decoherence_set',
    'hat_transforms',
    'kappa_correlated',
    'kappa_single',
    'load_bivariate_csv',
    'load_univariate_csv',
    'phase_weighted_transforms',
    'single_photon_set',
    'trapezoid_weights',
]
