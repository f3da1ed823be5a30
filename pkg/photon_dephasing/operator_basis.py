"""Orthonormal Hermitian operator bases and generalized Bloch vectors.

Three orderings are available for each supported dimension:

``gell_mann`` (default)
    identity, symmetric pair generators, antisymmetric pair generators, diagonal
    generators. For d=4 the pairs run over (0,1), (0,2), (0,3), (1,2), (1,3), (2,3)
    with levels ordered hh, hv, vh, vv; symmetric generators sit at 1..6,
    antisymmetric at 7..12 and the diagonal generators diag(1,-1,0,0)/sqrt2,
    diag(1,1,-2,0)/sqrt6, diag(1,1,1,-3)/sqrt12 at 13, 14, 15.
``nested``
    levels are added one at a time; level k contributes its (symmetric,
    antisymmetric) pairs with every lower level followed by its diagonal
    generator. The diagonal generators end up at 3, 8, 15 and the hv-vh and
    hh-vv coherences at (6, 7) and (9, 10).
``pauli_product``
    normalized tensor products of Pauli matrices, index 4*i + j for
    sigma_i (x) sigma_j with sigma_0 the identity.

The antisymmetric generator of the pair (j, k) carries -i at (j, k) and +i at (k, j),
so a coherence is rebuilt as rho_jk = (r_sym - i r_anti) / sqrt2.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .exception import DimensionMismatchError, HermiticityError, UnsupportedDimensionError
from .settings import DEFAULT_TOLERANCES, Tolerances
from .types import ComplexMatrix, RealMatrix, RealVector

LOGGER = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (2, 4)
ORDERINGS = ('gell_mann', 'nested', 'pauli_product')

PAULI = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

Pair = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class HermitianBasis:
    dim: int
    ordering: str
    ops: np.ndarray
    pairs: Tuple[Tuple[Pair, Pair], ...]

    def __len__(self) -> int:
        return self.dim * self.dim

    def __getitem__(self, index: int) -> ComplexMatrix:
        return self.ops[index]

    @property
    def diagonal_indices(self) -> Tuple[int, ...]:
        """Indices of the non-identity elements that are diagonal matrices."""
        off_diagonal = self.ops * (1 - np.eye(self.dim))[None, :, :]
        weights = np.abs(off_diagonal).max(axis=(1, 2))
        return tuple(int(index) for index in np.flatnonzero(weights == 0.0) if index != 0)

    def coherence_indices(self, j: int, k: int) -> Pair:
        """(symmetric, antisymmetric) indices of the generators carrying rho_jk."""
        for levels, indices in self.pairs:
            if levels == (j, k):
                return indices
        raise KeyError(f'ordering {self.ordering!r} has no generator pair for levels ({j}, {k})')

    def gram(self) -> ComplexMatrix:
        """Tr[F_i^dagger F_j] for every pair."""
        return np.einsum('amn,bmn->ab', self.ops.conj(), self.ops)

    def vectorized(self) -> ComplexMatrix:
        """Columns are the row-major flattened basis operators."""
        return self.ops.reshape(len(self), -1).T

    def change_of_basis(self, other: 'HermitianBasis') -> RealMatrix:
        """Real orthogonal T with r_other = T @ r_self."""
        if other.dim != self.dim:
            raise DimensionMismatchError(f'cannot map a dim={self.dim} basis onto dim={other.dim}')
        return np.einsum('aij,bji->ab', other.ops, self.ops).real


@dataclass(frozen=True, eq=False)
class BlochVector:
    dim: int
    r: RealVector

    def __post_init__(self) -> None:
        if self.r.shape != (self.dim * self.dim,):
            raise DimensionMismatchError(f'Bloch vector of length {self.r.shape} does not fit dim={self.dim}')

    def __len__(self) -> int:
        return int(self.r.shape[0])

    @property
    def trace(self) -> float:
        return float(self.r[0] * np.sqrt(self.dim))


def _symmetric(dim: int, j: int, k: int) -> ComplexMatrix:
    op = np.zeros((dim, dim), dtype=np.complex128)
    op[j, k] = op[k, j] = 1.0
    return op / np.sqrt(2.0)


def _antisymmetric(dim: int, j: int, k: int) -> ComplexMatrix:
    op = np.zeros((dim, dim), dtype=np.complex128)
    op[j, k] = -1j
    op[k, j] = 1j
    return op / np.sqrt(2.0)


def _diagonal(dim: int, level: int) -> ComplexMatrix:
    entries = np.zeros(dim)
    entries[:level] = 1.0
    entries[level] = -float(level)
    return np.diag(entries / np.sqrt(level * (level + 1))).astype(np.complex128)


def _gell_mann(dim: int) -> Tuple[List[ComplexMatrix], List[Tuple[Pair, Pair]]]:
    level_pairs = [(j, k) for j in range(dim) for k in range(j + 1, dim)]
    ops = [np.eye(dim, dtype=np.complex128) / np.sqrt(dim)]
    ops += [_symmetric(dim, j, k) for j, k in level_pairs]
    ops += [_antisymmetric(dim, j, k) for j, k in level_pairs]
    ops += [_diagonal(dim, level) for level in range(1, dim)]
    count = len(level_pairs)
    pairs = [(levels, (1 + n, 1 + count + n)) for n, levels in enumerate(level_pairs)]
    return ops, pairs


def _nested(dim: int) -> Tuple[List[ComplexMatrix], List[Tuple[Pair, Pair]]]:
    ops = [np.eye(dim, dtype=np.complex128) / np.sqrt(dim)]
    pairs: List[Tuple[Pair, Pair]] = []
    for level in range(1, dim):
        for lower in range(level):
            pairs.append(((lower, level), (len(ops), len(ops) + 1)))
            ops += [_symmetric(dim, lower, level), _antisymmetric(dim, lower, level)]
        ops.append(_diagonal(dim, level))
    return ops, pairs


def _pauli_product(dim: int) -> Tuple[List[ComplexMatrix], List[Tuple[Pair, Pair]]]:
    if dim == 2:
        return [op / np.sqrt(2.0) for op in PAULI], [((0, 1), (1, 2))]
    ops = [np.kron(PAULI[i], PAULI[j]) / 2.0 for i, j in product(range(4), repeat=2)]
    return ops, []


_BUILDERS = {'gell_mann': _gell_mann, 'nested': _nested, 'pauli_product': _pauli_product}


@lru_cache(maxsize=None)
def build_basis(dim: int, ordering: str = 'gell_mann') -> HermitianBasis:
    if dim not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimensionError(dim)
    if ordering not in _BUILDERS:
        raise ValueError(f'unknown basis ordering {ordering!r}; expected one of {ORDERINGS}')
    ops, pairs = _BUILDERS[ordering](dim)
    stacked = np.array(ops, dtype=np.complex128)
    stacked.setflags(write=False)
    LOGGER.debug('built %s basis for dim=%d', ordering, dim)
    return HermitianBasis(dim=dim, ordering=ordering, ops=stacked, pairs=tuple(pairs))


def is_hermitian(matrix: np.ndarray, tolerance: float) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T), initial=0.0) <= tolerance)


def to_bloch(rho: ComplexMatrix, basis: HermitianBasis, tolerances: Tolerances = DEFAULT_TOLERANCES) -> BlochVector:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (basis.dim, basis.dim):
        raise DimensionMismatchError(f'matrix of shape {rho.shape} does not fit a dim={basis.dim} basis')
    if not is_hermitian(rho, tolerances.hermiticity):
        raise HermiticityError(f'input deviates from Hermiticity by more than {tolerances.hermiticity}')
    components = np.einsum('aij,ji->a', basis.ops, rho)
    return BlochVector(dim=basis.dim, r=np.ascontiguousarray(components.real))


def from_bloch(r: Union[BlochVector, Sequence[float], np.ndarray], basis: HermitianBasis) -> ComplexMatrix:
    vector = r.r if isinstance(r, BlochVector) else np.asarray(r, dtype=float)
    if vector.shape != (len(basis),):
        raise DimensionMismatchError(f'expected {len(basis)} Bloch components, got {vector.shape}')
    rho = np.einsum('a,aij->ij', vector, basis.ops)
    return 0.5 * (rho + rho.conj().T)


def bloch_vector(components: Iterable[float], dim: int) -> BlochVector:
    return BlochVector(dim=dim, r=np.asarray(list(components), dtype=float))


def coherence_map(basis: HermitianBasis) -> Dict[Pair, Pair]:
    return {levels: indices for levels, indices in basis.pairs}


__all__ = [
    'BlochVector',
    'HermitianBasis',
    'ORDERINGS',
    'PAULI',
    'SUPPORTED_DIMENSIONS',
    'bloch_vector',
    'build_basis',
    'coherence_map',
    'from_bloch',
    'is_hermitian',
    'to_bloch',
]
