"""Time-local generator, its GKLS canonical form and the closed-form rates.

The generator matrix solves [L_t][M_t] = d[M_t]/dt. Its dissipative part is
read off the coefficient matrix c of L[rho] = sum c_ab F_a rho F_b^dagger,
obtained from the Choi matrix of the complex-linear extension of L. For a
dephasing generator all weight of c[1:, 1:] sits on the diagonal generators;
that block is the reduced rate matrix R3 whose eigen-decomposition gives the
canonical rates and jump operators.

Rates carry the names of their closed forms: gamma_1 = 2(1-K) s t belongs to
the difference operator (I x sz - sz x I)/(2 sqrt2), gamma_2 = 2(1+K) s t to the
sum operator (I x sz + sz x I)/(2 sqrt2) and gamma_3 to sz x sz / 2, with
s = sigma^2 dn^2.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize

from .decoherence import BiGaussianDouble, BiGaussianSingle, DecoherenceSet, KAPPA, KAPPA_A, KAPPA_AB, KAPPA_B, \
    LAMBDA_AB
from .exception import PoleProximityError, SingularMapError, StructureError
from .operator_basis import PAULI, HermitianBasis, build_basis
from .settings import DEFAULT_TOLERANCES, Tolerances
from .types import ComplexMatrix, RealMatrix

LOGGER = logging.getLogger(__name__)

DT_MODES = ('analytic', 'finite-difference')


class MapProvider(Protocol):
    basis: HermitianBasis

    def map_matrix(self, t: float) -> Any:
        ...

    def map_derivative(self, t: float) -> RealMatrix:
        ...


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    t: float
    L: RealMatrix
    det: float
    min_singular: float
    condition: float
    mode: str


@dataclass(frozen=True, eq=False)
class RateDecomposition:
    t: float
    H: ComplexMatrix
    R15: ComplexMatrix
    R3: ComplexMatrix
    rates: Tuple[float, ...]
    jumps: Tuple[ComplexMatrix, ...]
    coefficients: np.ndarray = field(repr=False)

    @property
    def total_rate(self) -> float:
        return float(sum(self.rates))


@dataclass(frozen=True, eq=False)
class AnalyticRates:
    rates: Tuple[float, float, float]
    jumps: Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]


# ----------------------------------------------------------------------
# Generator ---------------------------------------------------------------
def _finite_difference(provider: MapProvider, t: float) -> RealMatrix:
    h = max(1e-6, 1e-6 * abs(t))
    m = [provider.map_matrix(t + k * h).M for k in (-2, -1, 1, 2)]
    return (m[0] - 8.0 * m[1] + 8.0 * m[2] - m[3]) / (12.0 * h)


def generator_matrix(map_provider: MapProvider, t: float, dt_mode: str = 'analytic',
                     tolerances: Tolerances = DEFAULT_TOLERANCES) -> GeneratorMatrix:
    if dt_mode not in DT_MODES:
        raise ValueError(f'unknown dt_mode {dt_mode!r}; expected one of {DT_MODES}')
    current = map_provider.map_matrix(t)
    if current.min_singular < tolerances.singular:
        raise SingularMapError(t, current.det, current.min_singular)
    derivative = map_provider.map_derivative(t) if dt_mode == 'analytic' else _finite_difference(map_provider, t)
    factors = linalg.lu_factor(current.M.T, check_finite=True)
    lu_diagonal = np.diag(factors[0])
    swaps = int(np.count_nonzero(factors[1] != np.arange(factors[1].size)))
    det = float(np.prod(lu_diagonal) * (-1.0) ** swaps)
    generator = linalg.lu_solve(factors, derivative.T).T
    return GeneratorMatrix(t=t, L=generator, det=det, min_singular=current.min_singular, condition=current.condition,
                           mode=dt_mode)


# ----------------------------------------------------------------------
# Canonical form ------------------------------------------------------------
def coefficient_matrix(L: RealMatrix, basis: HermitianBasis) -> ComplexMatrix:
    """c with L[rho] = sum_ab c_ab F_a rho F_b^dagger, from the Choi matrix of L."""
    ops = basis.ops
    dim = basis.dim
    # L acting on the matrix units E_kl, complex-linearly extended
    images = np.einsum('ab,blk,aij->klij', L.astype(np.complex128), ops, ops)
    choi = images.transpose(2, 0, 3, 1).reshape(dim * dim, dim * dim)
    vectors = basis.vectorized()
    return vectors.conj().T @ choi @ vectors


def _hamiltonian(coefficients: ComplexMatrix, basis: HermitianBasis) -> ComplexMatrix:
    shift = np.einsum('a,aij->ij', coefficients[1:, 0], basis.ops[1:]) / math.sqrt(basis.dim)
    return (shift.conj().T - shift) / 2j


def reference_jumps(dim: int) -> Tuple[ComplexMatrix, ...]:
    """Closed-form jump operators: (difference, sum, sz x sz) for two photons, sz / sqrt2 for one."""
    if dim == 2:
        return (PAULI[3] / math.sqrt(2.0),)
    identity, sz = PAULI[0], PAULI[3]
    difference = (np.kron(identity, sz) - np.kron(sz, identity)) / (2.0 * math.sqrt(2.0))
    total = (np.kron(identity, sz) + np.kron(sz, identity)) / (2.0 * math.sqrt(2.0))
    return difference, total, np.kron(sz, sz) / 2.0


def _coordinates(jumps: Sequence[ComplexMatrix], basis: HermitianBasis, indices: Sequence[int]) -> np.ndarray:
    """Columns are the jump operators expanded on the basis elements ``indices``."""
    return np.array([[np.trace(basis.ops[a] @ jump) for jump in jumps] for a in indices])


def _degenerate_groups(values: np.ndarray, tolerance: float) -> List[List[int]]:
    order = np.argsort(values)
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    groups: List[List[int]] = [[int(order[0])]] if order.size else []
    for previous, current in zip(order[:-1], order[1:]):
        if values[current] - values[previous] <= tolerance * scale:
            groups[-1].append(int(current))
        else:
            groups.append([int(current)])
    return [group for group in groups if len(group) > 1]


def align_eigenvectors(rates: np.ndarray, vectors: np.ndarray, reference: np.ndarray,
                       tolerance: float = DEFAULT_TOLERANCES.degeneracy) -> Tuple[np.ndarray, np.ndarray]:
    """Order eigenpairs by maximal overlap with ``reference`` columns and fix gauge inside degenerate blocks."""
    overlaps = np.abs(reference.conj().T @ vectors)
    rows, cols = optimize.linear_sum_assignment(-overlaps)
    order = cols[np.argsort(rows)]
    rates = rates[order].copy()
    vectors = vectors[:, order].copy()
    for group in _degenerate_groups(rates, tolerance):
        rotation, _ = linalg.orthogonal_procrustes(vectors[:, group], reference[:, group])
        vectors[:, group] = vectors[:, group] @ rotation
    for k in range(vectors.shape[1]):
        overlap = complex(reference[:, k].conj() @ vectors[:, k])
        if abs(overlap) > 0:
            vectors[:, k] *= abs(overlap) / overlap
    return rates, vectors


def extract_rates(L: RealMatrix, basis: HermitianBasis, tolerances: Tolerances = DEFAULT_TOLERANCES,
                  reference: Optional[Sequence[ComplexMatrix]] = None, t: float = math.nan) -> RateDecomposition:
    L = np.asarray(L, dtype=float)
    scale = max(1.0, float(np.max(np.abs(L))))
    if np.max(np.abs(L[0])) > tolerances.structure * scale:
        raise StructureError('generator does not preserve the trace: first row is not zero')
    coefficients = coefficient_matrix(L, basis)
    r15 = coefficients[1:, 1:]
    diagonal = list(basis.diagonal_indices)
    block = np.zeros(r15.shape, dtype=bool)
    inner = [index - 1 for index in diagonal]
    block[np.ix_(inner, inner)] = True
    rate_scale = max(1.0, float(np.max(np.abs(r15))))
    leak = float(np.max(np.abs(r15[~block]), initial=0.0))
    if leak > tolerances.structure * rate_scale:
        raise StructureError(f'rate matrix has weight {leak:.3e} outside the dephasing subspace')
    r3 = coefficients[np.ix_(diagonal, diagonal)]
    if np.max(np.abs(r3.imag), initial=0.0) <= tolerances.structure * rate_scale:
        rates, vectors = linalg.eigh(0.5 * (r3.real + r3.real.T))
        vectors = vectors.astype(np.complex128)
    else:
        rates, vectors = linalg.eigh(0.5 * (r3 + r3.conj().T))
    references = reference_jumps(basis.dim) if reference is None else reference
    coordinates = _coordinates(references, basis, diagonal)
    rates, vectors = align_eigenvectors(rates, vectors, coordinates, tolerances.degeneracy)
    jumps = tuple(np.einsum('a,aij->ij', vectors[:, k], basis.ops[diagonal]) for k in range(vectors.shape[1]))
    return RateDecomposition(
        t=t,
        H=_hamiltonian(coefficients, basis),
        R15=r15,
        R3=r3,
        rates=tuple(float(rate) for rate in rates),
        jumps=jumps,
        coefficients=coefficients,
    )


def track_rates(channel: Any, times: Sequence[float], dt_mode: str = 'analytic',
                tolerances: Optional[Tolerances] = None) -> List[Optional[RateDecomposition]]:
    """Rate decompositions along a grid with continuous labelling; None inside pole neighbourhoods."""
    tolerances = tolerances or channel.tolerances
    grid = np.asarray(times, dtype=float)
    poles = channel.singular_times(float(grid.min(initial=0.0)), float(grid.max(initial=0.0)))
    reference: Optional[Sequence[ComplexMatrix]] = None
    out: List[Optional[RateDecomposition]] = []
    for t in grid:
        if channel.nearest_singular_time(float(t), poles) is not None:
            LOGGER.debug('skipping numerical extraction at t=%g inside a pole neighbourhood', t)
            out.append(None)
            continue
        generator = generator_matrix(channel, float(t), dt_mode, tolerances)
        decomposition = extract_rates(generator.L, channel.basis, tolerances, reference, float(t))
        reference = decomposition.jumps
        out.append(decomposition)
    return out


# ----------------------------------------------------------------------
# Closed forms ---------------------------------------------------------------
def rates_single_peak_analytic(spec: BiGaussianSingle, dn: float, t: float) -> AnalyticRates:
    s = (spec.sigma * dn) ** 2
    jumps = reference_jumps(4)
    return AnalyticRates(
        rates=(2.0 * (1.0 - spec.K) * s * t, 2.0 * (1.0 + spec.K) * s * t, 0.0),
        jumps=(jumps[0], jumps[1], jumps[2]),
    )


def double_peak_pole(spec: BiGaussianDouble, dn: float, t: float, epsilon: float) -> Optional[float]:
    spacing = spec.pole_spacing(dn)
    if not math.isfinite(spacing):
        return None
    width = epsilon * spacing
    for pole in spec.singular_times(dn, max(0.0, t - width), t + width) or ():
        if abs(t - pole) <= width:
            return pole
    return None


def rates_double_peak_analytic(spec: BiGaussianDouble, dn: float, t: float,
                               epsilon: float = DEFAULT_TOLERANCES.pole_epsilon,
                               check_poles: bool = True) -> Tuple[float, float, float]:
    if check_poles:
        pole = double_peak_pole(spec, dn, t, epsilon)
        if pole is not None:
            raise PoleProximityError(t, pole)
    s = (spec.sigma * dn) ** 2
    split = dn * spec.delta_omega
    x = t * split
    gamma_1 = 2.0 * (1.0 - spec.K) * s * t + split * math.tan(x)
    gamma_2 = 2.0 * (1.0 + spec.K) * s * t
    gamma_3 = split * math.tan(0.5 * x) - 0.5 * split * math.tan(x)
    return gamma_1, gamma_2, gamma_3


def rate_matrix_appendix(ds: DecoherenceSet, t: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> ComplexMatrix:
    """Reduced rate matrix on diag(1,-1,0,0)/sqrt2, diag(1,1,-2,0)/sqrt6, diag(1,1,1,-3)/sqrt12."""
    ka = ds.log_derivative(KAPPA_A, t, tolerances.singular)
    kb = ds.log_derivative(KAPPA_B, t, tolerances.singular)
    kab = ds.log_derivative(KAPPA_AB, t, tolerances.singular)
    gab = ds.log_derivative(LAMBDA_AB, t, tolerances.singular)
    r11 = -kb.real
    r12 = (1j * kb.imag - 1j * ka.imag + 1j * gab.imag + gab.real - ka.real) / math.sqrt(3.0)
    r13 = (4j * ka.imag + 2j * kb.imag - 3j * kab.imag - 1j * gab.imag
           + 4.0 * ka.real - 3.0 * kab.real - gab.real) / (2.0 * math.sqrt(6.0))
    r22 = (-2.0 * ka.real + kb.real - 2.0 * gab.real) / 3.0
    r23 = (-3j * kab.imag + 6j * kb.imag + 3j * gab.imag
           - 4.0 * ka.real - 3.0 * kab.real + 8.0 * kb.real - gab.real) / (6.0 * math.sqrt(2.0))
    r33 = (-2.0 * ka.real - 3.0 * kab.real - 2.0 * kb.real + gab.real) / 6.0
    return np.array([
        [r11, r12, r13],
        [np.conj(r12), r22, r23],
        [np.conj(r13), np.conj(r23), r33],
    ], dtype=np.complex128)


def rates_from_rate_matrix(matrix: ComplexMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES,
                           reference: Optional[Sequence[ComplexMatrix]] = None) -> Tuple[float, ...]:
    """Eigenvalues of a reduced rate matrix written on the Gell-Mann diagonal generators, labelled like the
    numerical extraction."""
    basis = build_basis(4)
    rates, vectors = linalg.eigh(0.5 * (matrix + matrix.conj().T))
    references = reference_jumps(4) if reference is None else reference
    coordinates = _coordinates(references, basis, list(basis.diagonal_indices))
    rates, _ = align_eigenvectors(rates, vectors, coordinates, tolerances.degeneracy)
    return tuple(float(rate) for rate in rates)


def qubit_rates(ds: DecoherenceSet, t: float, name: str = KAPPA,
                tolerances: Tolerances = DEFAULT_TOLERANCES) -> Tuple[float, float]:
    """(gamma, nu) = (-Re, -Im) of the logarithmic derivative of kappa."""
    log_derivative = ds.log_derivative(name, t, tolerances.singular)
    return -log_derivative.real, -log_derivative.imag


def find_sign_changes(func: Any, times: Sequence[float]) -> List[float]:
    """Roots of func bracketed by consecutive grid points, refined with Brent's method."""
    grid = list(times)
    values = [func(t) for t in grid]
    roots = []
    for (a, fa), (b, fb) in zip(zip(grid[:-1], values[:-1]), zip(grid[1:], values[1:])):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(optimize.brentq(func, a, b, xtol=1e-14))
    return roots


__all__ = [
    'AnalyticRates',
    'DT_MODES',
    'GeneratorMatrix',
    'MapProvider',
    'RateDecomposition',
    'align_eigenvectors',
    'coefficient_matrix',
    'double_peak_pole',
    'extract_rates',
    'find_sign_changes',
    'generator_matrix',
    'qubit_rates',
    'rate_matrix_appendix',
    'rates_double_peak_analytic',
    'rates_from_rate_matrix',
    'rates_single_peak_analytic',
    'reference_jumps',
    'track_rates',
]
