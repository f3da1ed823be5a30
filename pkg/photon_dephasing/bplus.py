"""Bath-positive decomposition of an initially correlated polarization-frequency state.

The state C_h |h> (x) int g(w) e^{i theta(w)} |w> dw + C_v |v> (x) int g(w) |w> dw
is expanded as sum_a Q_a (x) w_a rho_a with valid environment states rho_a.
Each term evolves under its own decoherence function; only those functions
and the weights are needed to rebuild the reduced polarization state.
With z = C_v C_h^*::

    w_x = 1 + 2 Re[z T(0)]     w_y = 1 + 2 Im[z T(0)]     w_z = 2 |C_h|^2
    w_x kappa_x = kappa_0 + z T + z^* kappa
    w_y kappa_y = kappa_0 - i z T + i z^* kappa

where T(t) = int |g|^2 e^{-i theta} e^{-i dn w t} dw and kappa is the
decoherence function of the correlated state.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import legendre
from scipy import linalg

from .decoherence import UnivariateSpec, kappa_correlated, kappa_single, phase_weighted_transforms
from .exception import DegenerateWeightError, GridResolutionError, NormalizationError, UnsupportedSpecError
from .operator_basis import PAULI
from .profiles import PhaseProfile
from .settings import DEFAULT_TOLERANCES, Tolerances
from .types import ComplexMatrix

LOGGER = logging.getLogger(__name__)

MIN_GRID_POINTS = 64
NODES_PER_PIECE = 8
TERMS = ('0', 'x', 'y', 'z')


@dataclass(frozen=True, eq=False)
class CorrelatedPFState:
    c_h: complex
    c_v: complex
    amplitude: UnivariateSpec
    theta: PhaseProfile

    def __post_init__(self) -> None:
        object.__setattr__(self, 'c_h', complex(self.c_h))
        object.__setattr__(self, 'c_v', complex(self.c_v))
        norm = abs(self.c_h) ** 2 + abs(self.c_v) ** 2
        if abs(norm - 1.0) > DEFAULT_TOLERANCES.algebraic:
            raise NormalizationError(f'|C_h|^2 + |C_v|^2 = {norm!r}, expected 1')
        if not isinstance(self.amplitude, UnivariateSpec):
            raise UnsupportedSpecError(f'{type(self.amplitude).__name__} is not a univariate amplitude')

    @property
    def z(self) -> complex:
        return self.c_v * self.c_h.conjugate()

    def describe(self) -> Dict[str, object]:
        return {
            'c_h': [self.c_h.real, self.c_h.imag],
            'c_v': [self.c_v.real, self.c_v.imag],
            'amplitude': self.amplitude.describe(),
            'theta': self.theta.describe(),
        }


@dataclass(frozen=True)
class BPlusWeights:
    w_x: float
    w_y: float
    w_z: float

    def degenerate(self, floor: float = DEFAULT_TOLERANCES.weight_floor) -> Tuple[str, ...]:
        return tuple(name for name, weight in (('x', self.w_x), ('y', self.w_y)) if abs(weight) < floor)

    def as_dict(self) -> Dict[str, float]:
        return {'w_x': self.w_x, 'w_y': self.w_y, 'w_z': self.w_z}


@dataclass(frozen=True, eq=False)
class BPlusTerms:
    """Decoherence functions of the three-term decomposition on a time grid.

    ``weighted_x`` and ``weighted_y`` hold w_x kappa_x and w_y kappa_y, which stay
    finite when a weight vanishes.
    """

    times: np.ndarray
    weights: BPlusWeights
    kappa0: np.ndarray
    weighted_x: np.ndarray
    weighted_y: np.ndarray
    kappa: np.ndarray
    floor: float = DEFAULT_TOLERANCES.weight_floor
    warnings: Tuple[str, ...] = field(default=())

    @property
    def kappa_x(self) -> np.ndarray:
        return self.__divide('x', self.weighted_x, self.weights.w_x)

    @property
    def kappa_y(self) -> np.ndarray:
        return self.__divide('y', self.weighted_y, self.weights.w_y)

    def reconstructed_coherence(self) -> np.ndarray:
        """<h| rho(t) |v> from the three-term form."""
        return 0.5 * (self.kappa0 * (1j - 1.0) + self.weighted_x - 1j * self.weighted_y)

    def residual(self, state: CorrelatedPFState) -> np.ndarray:
        return np.abs(self.reconstructed_coherence() - self.kappa * state.c_h * state.c_v.conjugate())

    def __divide(self, name: str, weighted: np.ndarray, weight: float) -> np.ndarray:
        if abs(weight) < self.floor:
            raise DegenerateWeightError(name, weight)
        return weighted / weight


def _times(t: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    return np.atleast_1d(np.asarray(t, dtype=float))


def _shifted_transforms(state: CorrelatedPFState, dn: float, times: np.ndarray,
                        tolerances: Tolerances) -> Tuple[np.ndarray, np.ndarray]:
    """(T, kappa) on ``times``: transforms weighted by e^{-i theta} and e^{+i theta}."""
    theta = state.theta
    if theta.is_constant:
        phase = complex(np.exp(1j * float(theta(np.asarray(0.0)))))
        base = np.asarray(kappa_single(state.amplitude, dn, times), dtype=np.complex128)
        return base * phase.conjugate(), base * phase
    values = phase_weighted_transforms(
        state.amplitude,
        [lambda w: np.exp(-1j * float(theta(np.asarray(w)))), lambda w: np.exp(1j * float(theta(np.asarray(w))))],
        dn, times, tolerances, breakpoints=theta.breakpoints(),
    )
    return values[0], values[1]


def weights(state: CorrelatedPFState, tolerances: Tolerances = DEFAULT_TOLERANCES) -> BPlusWeights:
    overlap = complex(_shifted_transforms(state, 0.0, np.zeros(1), tolerances)[0][0])
    a = state.z * overlap
    return BPlusWeights(w_x=1.0 + 2.0 * a.real, w_y=1.0 + 2.0 * a.imag, w_z=2.0 * abs(state.c_h) ** 2)


def bplus_terms(state: CorrelatedPFState, dn: float, t: Union[float, Sequence[float], np.ndarray],
                tolerances: Tolerances = DEFAULT_TOLERANCES) -> BPlusTerms:
    times = _times(t)
    w = weights(state, tolerances)
    # kappa_0 never reads theta
    kappa0 = np.asarray(kappa_single(state.amplitude, dn, times), dtype=np.complex128).reshape(times.shape)
    shifted, kappa = _shifted_transforms(state, dn, times, tolerances)
    z = state.z
    warnings: List[str] = []
    for name in w.degenerate(tolerances.weight_floor):
        message = f'weight w_{name} is below {tolerances.weight_floor:g}; the {name} term carries no weight'
        LOGGER.warning(message)
        warnings.append(message)
    return BPlusTerms(
        times=times,
        weights=w,
        kappa0=kappa0,
        weighted_x=kappa0 + z * shifted + z.conjugate() * kappa,
        weighted_y=kappa0 - 1j * z * shifted + 1j * z.conjugate() * kappa,
        kappa=kappa,
        floor=tolerances.weight_floor,
        warnings=tuple(warnings),
    )


def bplus_kappas(state: CorrelatedPFState, dn: float, t: Union[float, Sequence[float], np.ndarray],
                 tolerances: Tolerances = DEFAULT_TOLERANCES) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    terms = bplus_terms(state, dn, t, tolerances)
    return terms.kappa0, terms.kappa_x, terms.kappa_y


def _state_matrix(populations: Tuple[float, float], coherence: complex) -> ComplexMatrix:
    return np.array([[populations[0], coherence], [np.conj(coherence), populations[1]]], dtype=np.complex128)


def reconstruct_reduced_state(state: CorrelatedPFState, dn: float, t: float,
                              tolerances: Tolerances = DEFAULT_TOLERANCES) -> ComplexMatrix:
    terms = bplus_terms(state, dn, t, tolerances)
    w_z = terms.weights.w_z
    return _state_matrix((0.5 * w_z, 1.0 - 0.5 * w_z), complex(terms.reconstructed_coherence()[0]))


def direct_reduced_state(state: CorrelatedPFState, dn: float, t: float,
                         tolerances: Tolerances = DEFAULT_TOLERANCES) -> ComplexMatrix:
    kappa = complex(kappa_correlated(state.amplitude, state.theta, dn, t, tolerances))
    populations = (abs(state.c_h) ** 2, abs(state.c_v) ** 2)
    return _state_matrix(populations, kappa * state.c_h * state.c_v.conjugate())


# ----------------------------------------------------------------------
# System operators ------------------------------------------------------
def q_operators() -> Dict[str, ComplexMatrix]:
    identity, sx, sy, sz = PAULI
    return {
        '0': 0.5 * (identity - sx - sy - sz),
        'x': 0.5 * sx,
        'y': 0.5 * sy,
        'z': 0.5 * sz,
    }


def initial_reduced_state(state: CorrelatedPFState, tolerances: Tolerances = DEFAULT_TOLERANCES) -> ComplexMatrix:
    """sum_a w_a Q_a with w_0 = 1."""
    w = weights(state, tolerances)
    q = q_operators()
    return q['0'] + w.w_x * q['x'] + w.w_y * q['y'] + w.w_z * q['z']


def zero_coherence_condition(w: BPlusWeights, kappa0: complex, kappa_x: complex, kappa_y: complex,
                             tolerance: float = DEFAULT_TOLERANCES.algebraic) -> bool:
    """Sufficient conditions for a vanishing coherence at one time."""
    if max(abs(kappa0), abs(kappa_x), abs(kappa_y)) <= tolerance:
        return True
    balanced = abs(w.w_x - 1.0) <= tolerance and abs(w.w_y - 1.0) <= tolerance
    return balanced and abs(kappa0 - kappa_x) <= tolerance and abs(kappa0 - kappa_y) <= tolerance


# ----------------------------------------------------------------------
# Environment kernels -----------------------------------------------------
@dataclass(frozen=True, eq=False)
class EnvironmentKernel:
    """Discretized rho_a(w, w') as K_ij = sqrt(q_i) psi(w_i) psi(w_j)^* sqrt(q_j)."""

    label: str
    omega: np.ndarray
    quadrature: np.ndarray
    matrix: ComplexMatrix
    trace_error: float

    @property
    def min_eigenvalue(self) -> float:
        return float(linalg.eigvalsh(self.matrix)[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def rank(self, tolerance: float = 1e-10) -> int:
        values = linalg.eigvalsh(self.matrix)
        return int(np.count_nonzero(values > tolerance * max(1.0, float(values[-1]))))


def frequency_grid(state: CorrelatedPFState, n_points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights over the amplitude support, split at every breakpoint."""
    if n_points < MIN_GRID_POINTS:
        raise GridResolutionError(n_points)
    lo, hi = state.amplitude.support()
    cuts = sorted({lo, hi, *(p for p in (*state.amplitude.breakpoints(), *state.theta.breakpoints()) if lo < p < hi)})
    pieces = len(cuts) - 1
    order = max(NODES_PER_PIECE, math.ceil(n_points / pieces))
    unit_nodes, unit_weights = legendre.leggauss(order)
    nodes, quadrature = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * unit_nodes)
        quadrature.append(half * unit_weights)
    return np.concatenate(nodes), np.concatenate(quadrature)


def environment_terms_on_grid(state: CorrelatedPFState, n_points: int = 128,
                              tolerances: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, EnvironmentKernel]:
    """Environment states of the decomposition; terms with a vanishing weight are omitted."""
    omega, quadrature = frequency_grid(state, n_points)
    root = np.sqrt(quadrature)
    g = np.sqrt(np.clip(state.amplitude.density(omega), 0.0, None)) * root
    u = g * np.exp(1j * state.theta(omega))
    w = weights(state, tolerances)
    c_h, c_v = state.c_h, state.c_v
    raw: Dict[str, ComplexMatrix] = {
        '0': abs(c_h) ** 2 * np.outer(u, u.conj()) + abs(c_v) ** 2 * np.outer(g, g.conj()),
        'z': np.outer(g, g.conj()),
    }
    for name, vector, weight in (('x', c_h * u + c_v * g, w.w_x), ('y', c_v * g + 1j * c_h * u, w.w_y)):
        if abs(weight) < tolerances.weight_floor:
            LOGGER.warning('omitting environment term %s with weight %.3e', name, weight)
            continue
        raw[name] = np.outer(vector, vector.conj()) / weight
    kernels = {}
    for name in TERMS:
        if name not in raw:
            continue
        matrix = raw[name]
        trace = float(np.trace(matrix).real)
        error = abs(trace - 1.0)
        if error > tolerances.grid_trace:
            raise GridResolutionError(omega.size, error)
        kernels[name] = EnvironmentKernel(label=name, omega=omega, quadrature=quadrature, matrix=matrix / trace,
                                          trace_error=error)
    LOGGER.debug('built %d environment kernels on %d nodes', len(kernels), omega.size)
    return kernels


def regime_summary(terms: BPlusTerms) -> Dict[str, Optional[float]]:
    """Shape descriptors of |kappa(t)|: drops, revivals and the late-time floor."""
    magnitude = np.abs(terms.kappa)
    if magnitude.size < 2:
        return {'max_increase': None, 'max_revival': None, 'floor': None, 'late_max': None}
    steps = np.diff(magnitude)
    running_min = np.minimum.accumulate(magnitude)
    half = magnitude.size // 2
    return {
        'max_increase': float(np.max(steps)),
        'max_revival': float(np.max(magnitude - running_min)),
        'floor': float(magnitude[-1]),
        'late_max': float(np.max(magnitude[half:])),
    }


__all__ = [
    'BPlusTerms',
    'BPlusWeights',
    'CorrelatedPFState',
    'EnvironmentKernel',
    'bplus_kappas',
    'bplus_terms',
    'direct_reduced_state',
    'environment_terms_on_grid',
    'frequency_grid',
    'initial_reduced_state',
    'q_operators',
    'reconstruct_reduced_state',
    'regime_summary',
    'weights',
    'zero_coherence_condition',
]
