"""Exact dephasing channel and its matrix on generalized Bloch vectors.

The channel multiplies each density-matrix entry by a decoherence function.
Which function multiplies which entry is read from a static table; an entry
``'name*'`` means the complex conjugate and ``'1'`` leaves the entry unchanged.
Two-photon levels are ordered hh, hv, vh, vv with photon a the first factor.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, optimize

from .decoherence import (BiGaussianDouble, DecoherenceSet, FrequencySpec, KAPPA, KAPPA_A, KAPPA_AB, KAPPA_B,
                          LAMBDA_AB, channel_decoherence)
from .exception import DimensionMismatchError, SingularMapError
from .operator_basis import BlochVector, HermitianBasis, build_basis, from_bloch, to_bloch
from .settings import DEFAULT_TOLERANCES, Tolerances
from .types import ComplexMatrix, RealMatrix

LOGGER = logging.getLogger(__name__)

SINGLE_PHOTON_TABLE = (
    ('1', KAPPA),
    (KAPPA + '*', '1'),
)

TWO_PHOTON_TABLE = (
    ('1', KAPPA_B, KAPPA_A, KAPPA_AB),
    (KAPPA_B + '*', '1', LAMBDA_AB, KAPPA_A),
    (KAPPA_A + '*', LAMBDA_AB + '*', '1', KAPPA_B),
    (KAPPA_AB + '*', KAPPA_A + '*', KAPPA_B + '*', '1'),
)

SCAN_SAMPLES = 2048


def entry_table(arity: int) -> Tuple[Tuple[str, ...], ...]:
    return SINGLE_PHOTON_TABLE if arity == 1 else TWO_PHOTON_TABLE


def channel_table(ds: DecoherenceSet, t: float, derivative: bool = False) -> ComplexMatrix:
    """Entry-wise multiplier of the channel at t (or its time derivative)."""
    lookup = ds.derivative if derivative else ds.value
    values = {name: complex(lookup(name, t)) for name in ds.names}
    unit = 0.0 if derivative else 1.0
    table = entry_table(ds.arity)
    out = np.empty((len(table), len(table)), dtype=np.complex128)
    for i, row in enumerate(table):
        for j, entry in enumerate(row):
            if entry == '1':
                out[i, j] = unit
            elif entry.endswith('*'):
                out[i, j] = values[entry[:-1]].conjugate()
            else:
                out[i, j] = values[entry]
    return out


def _dimension(ds: DecoherenceSet) -> int:
    return 2 if ds.arity == 1 else 4


def evolve_exact(rho0: ComplexMatrix, ds: DecoherenceSet, t: float) -> ComplexMatrix:
    rho0 = np.asarray(rho0, dtype=np.complex128)
    dim = _dimension(ds)
    if rho0.shape != (dim, dim):
        raise DimensionMismatchError(f'state of shape {rho0.shape} does not match a {dim}-level channel')
    return channel_table(ds, t) * rho0


@dataclass(frozen=True, eq=False)
class MapMatrix:
    dim: int
    t: float
    M: RealMatrix

    @cached_property
    def singular_values(self) -> np.ndarray:
        return linalg.svdvals(self.M)

    @property
    def min_singular(self) -> float:
        return float(self.singular_values[-1])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.M))

    @property
    def condition(self) -> float:
        smallest = self.min_singular
        return float(self.singular_values[0] / smallest) if smallest > 0 else math.inf

    def is_singular(self, threshold: float = DEFAULT_TOLERANCES.singular) -> bool:
        return self.min_singular < threshold

    def apply(self, r: Union[BlochVector, np.ndarray]) -> BlochVector:
        vector = r.r if isinstance(r, BlochVector) else np.asarray(r, dtype=float)
        return BlochVector(dim=self.dim, r=self.M @ vector)


def _check_basis(ds: DecoherenceSet, basis: HermitianBasis) -> None:
    if basis.dim != _dimension(ds):
        raise DimensionMismatchError(f'a {ds.arity}-photon channel needs a dim={_dimension(ds)} basis, got {basis.dim}')


def table_matrix(table: ComplexMatrix, basis: HermitianBasis, trace_row: bool = True) -> RealMatrix:
    """[M]_ab = Tr[F_a (table o F_b)]."""
    matrix = np.einsum('aij,bji->ab', basis.ops, table[None, :, :] * basis.ops).real
    matrix[0, :] = 0.0
    if trace_row:
        matrix[0, 0] = 1.0
    return matrix


def build_map_matrix(ds: DecoherenceSet, t: float, basis: HermitianBasis) -> MapMatrix:
    _check_basis(ds, basis)
    return MapMatrix(dim=basis.dim, t=t, M=table_matrix(channel_table(ds, t), basis))


def map_derivative_matrix(ds: DecoherenceSet, t: float, basis: HermitianBasis) -> RealMatrix:
    _check_basis(ds, basis)
    return table_matrix(channel_table(ds, t, derivative=True), basis, trace_row=False)


def analytic_bloch_double_peak(r0: Union[BlochVector, np.ndarray], spec: BiGaussianDouble, dn: float, t: float,
                               basis: Optional[HermitianBasis] = None) -> BlochVector:
    """Closed-form two-photon Bloch vector for the double-peak family.

    The formulas are written in the ``nested`` ordering; r0 is read in (and the
    result returned in) ``basis`` when one is given.
    """
    vector = np.array(r0.r if isinstance(r0, BlochVector) else r0, dtype=float)
    nested = build_basis(4, 'nested')
    transform = basis.change_of_basis(nested) if basis is not None and basis.ordering != 'nested' else None
    r = transform @ vector if transform is not None else vector

    s = (spec.sigma * dn) ** 2
    split = dn * spec.delta_omega
    centre = dn * spec.omega0
    gamma_0 = math.exp(-0.5 * s * t * t)
    gamma_plus = math.exp(-s * t * t * (1.0 + spec.K))
    gamma_minus = math.exp(-s * t * t * (1.0 - spec.K))
    local = gamma_0 * math.cos(0.5 * t * split)
    c_half, s_half = math.cos(0.5 * t * centre), math.sin(0.5 * t * centre)
    c_full, s_full = math.cos(t * centre), math.sin(t * centre)

    out = r.copy()
    for sym, anti in ((1, 2), (4, 5), (11, 12), (13, 14)):
        out[sym] = local * (c_half * r[sym] - s_half * r[anti])
        out[anti] = local * (c_half * r[anti] + s_half * r[sym])
    out[6] = gamma_minus * math.cos(t * split) * r[6]
    out[7] = gamma_minus * math.cos(t * split) * r[7]
    out[9] = gamma_plus * (c_full * r[9] - s_full * r[10])
    out[10] = gamma_plus * (c_full * r[10] + s_full * r[9])

    result = transform.T @ out if transform is not None else out
    return BlochVector(dim=4, r=result)


class DephasingChannel:
    """Exact dephasing channel of a frequency distribution, with its map matrices and singular times."""

    def __init__(self, **kwargs: Any) -> None:
        self.spec: FrequencySpec = kwargs['spectrum']
        self.dn: float = float(kwargs.get('dn', 1.0))
        self.tolerances: Tolerances = kwargs.get('tolerances') or DEFAULT_TOLERANCES
        self.decoherence: DecoherenceSet = kwargs.get('decoherence') or channel_decoherence(self.spec, self.dn)
        dim = _dimension(self.decoherence)
        self.basis: HermitianBasis = kwargs.get('basis') or build_basis(dim, kwargs.get('ordering', 'gell_mann'))
        _check_basis(self.decoherence, self.basis)
        self._singular_cache: Dict[Tuple[float, float], Tuple[float, ...]] = {}

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def rate_scale(self) -> float:
        """Inverse natural time unit, spectral width times |dn|."""
        return self.spec.rate_scale() * abs(self.dn)

    @property
    def pole_half_width(self) -> float:
        return self.tolerances.pole_epsilon * self.spec.pole_spacing(self.dn)

    def map_matrix(self, t: float) -> MapMatrix:
        return build_map_matrix(self.decoherence, t, self.basis)

    def map_derivative(self, t: float) -> RealMatrix:
        return map_derivative_matrix(self.decoherence, t, self.basis)

    def evolve(self, rho0: ComplexMatrix, t: float) -> ComplexMatrix:
        return evolve_exact(rho0, self.decoherence, t)

    def propagate(self, r0: Union[BlochVector, np.ndarray], t: float) -> BlochVector:
        return self.map_matrix(t).apply(r0)

    def to_bloch(self, rho: ComplexMatrix) -> BlochVector:
        return to_bloch(rho, self.basis, self.tolerances)

    def from_bloch(self, r: Union[BlochVector, np.ndarray]) -> ComplexMatrix:
        return from_bloch(r, self.basis)

    def propagator(self, t: float, s: float) -> MapMatrix:
        """Intermediate map with M(t) = propagator(t, s) @ M(s)."""
        earlier = channel_table(self.decoherence, s)
        smallest = float(np.min(np.abs(earlier)))
        if smallest < self.tolerances.singular:
            raise SingularMapError(s, self.map_matrix(s).det, smallest)
        quotient = channel_table(self.decoherence, t) / earlier
        return MapMatrix(dim=self.dim, t=t, M=table_matrix(quotient, self.basis))

    def nearest_singular_time(self, t: float, poles: Sequence[float]) -> Optional[float]:
        """Pole among ``poles`` whose neighbourhood contains t, if any."""
        width = self.pole_half_width
        for pole in poles:
            if abs(t - pole) <= width:
                return pole
        return None

    def singular_times(self, t_start: float, t_end: float) -> Tuple[float, ...]:
        known = self.spec.singular_times(self.dn, t_start, t_end)
        if known is not None:
            return known
        key = (t_start, t_end)
        if key not in self._singular_cache:
            self._singular_cache[key] = self.__locate_singular_times(t_start, t_end)
        return self._singular_cache[key]

    def __smallest_coherence(self, t: float) -> float:
        return float(np.min(np.abs(channel_table(self.decoherence, t))))

    def __diverges(self, t: float, smallest: float) -> bool:
        if smallest < self.tolerances.singular:
            return True
        values = channel_table(self.decoherence, t)
        rates = np.abs(channel_table(self.decoherence, t, derivative=True)) / np.abs(values)
        return bool(np.max(rates) > self.tolerances.divergence_factor * self.rate_scale ** 2)

    def __locate_singular_times(self, t_start: float, t_end: float) -> Tuple[float, ...]:
        """Scan the coherence magnitudes for isolated zeros; the map is singular exactly there."""
        grid = np.linspace(t_start, t_end, SCAN_SAMPLES)
        profile = np.array([self.__smallest_coherence(t) for t in grid])
        poles = []
        for i in range(1, grid.size - 1):
            if not (profile[i] <= profile[i - 1] and profile[i] < profile[i + 1]):
                continue
            found = optimize.minimize_scalar(
                self.__smallest_coherence, bounds=(grid[i - 1], grid[i + 1]), method='bounded',
                options={'xatol': 1e-14 * max(1.0, grid[i])},
            )
            t_min = float(found.x)
            if self.__diverges(t_min, float(found.fun)):
                poles.append(t_min)
        LOGGER.info('located %d singular time(s) in [%g, %g]', len(poles), t_start, t_end)
        return tuple(poles)


__all__ = [
    'DephasingChannel',
    'MapMatrix',
    'SINGLE_PHOTON_TABLE',
    'TWO_PHOTON_TABLE',
    'analytic_bloch_double_peak',
    'build_map_matrix',
    'channel_table',
    'entry_table',
    'evolve_exact',
    'map_derivative_matrix',
    'table_matrix',
]
