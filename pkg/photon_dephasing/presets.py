"""Named initial polarization states and correlated-state presets.

Two-photon kets are written in the hh, hv, vh, vv order.

B+ presets (all with C_h = C_v = 1/sqrt2 unless overridden, dn = 1 units):

``markovian``
    Gaussian |g|^2 (mean 0, sigma 1) with theta = 0; |kappa| decays monotonically.
``np_map``
    Gaussian |g|^2 with the linear phase theta = 4 w. kappa(t) is the
    uncorrelated function shifted to t - 4/dn, so |kappa| starts suppressed
    and rises to 1.
``non_markovian``
    Two narrow Gaussians at +-1 (sigma 0.2) with theta = -0.3 w; |kappa|
    passes through a minimum near t = 1.27 and revives.
``coherence_trapping``
    70% of the weight in a very narrow line (sigma 0.01) on a broad Gaussian
    background, with a pi/2 phase step at w = 0; |kappa| settles on a plateau
    near 0.5.
"""

import math
from typing import Callable, Dict, Sequence, Union, cast

import numpy as np

from .bplus import CorrelatedPFState
from .decoherence import UniGaussian, UniGaussianMixture, UnivariateSpec
from .exception import ConfigurationError, DimensionMismatchError
from .profiles import ConstantPhase, LinearPhase, PhaseProfile, StepPhase
from .types import ComplexMatrix

ROOT_HALF = 1.0 / math.sqrt(2.0)


def _pure(ket: Sequence[complex]) -> ComplexMatrix:
    vector = np.asarray(ket, dtype=np.complex128)
    vector = vector / np.linalg.norm(vector)
    return np.outer(vector, vector.conj())


TWO_PHOTON_STATES: Dict[str, Callable[[], ComplexMatrix]] = {
    'bell_phi_plus': lambda: _pure([1, 0, 0, 1]),
    'bell_phi_minus': lambda: _pure([1, 0, 0, -1]),
    'bell_psi_plus': lambda: _pure([0, 1, 1, 0]),
    'bell_psi_minus': lambda: _pure([0, 1, -1, 0]),
    'plus_state': lambda: _pure([1, 1, 1, 1]),
    'hh': lambda: _pure([1, 0, 0, 0]),
    'maximally_mixed': lambda: np.eye(4, dtype=np.complex128) / 4.0,
}

SINGLE_PHOTON_STATES: Dict[str, Callable[[], ComplexMatrix]] = {
    'plus_state': lambda: _pure([1, 1]),
    'hh': lambda: _pure([1, 0]),
    'maximally_mixed': lambda: np.eye(2, dtype=np.complex128) / 2.0,
}


def state_names(dim: int) -> Sequence[str]:
    return tuple(TWO_PHOTON_STATES if dim == 4 else SINGLE_PHOTON_STATES)


def named_state(name: str, dim: int) -> ComplexMatrix:
    table = TWO_PHOTON_STATES if dim == 4 else SINGLE_PHOTON_STATES
    if name not in table:
        raise DimensionMismatchError(f'no dim={dim} state named {name!r}; known: {sorted(table)}')
    return table[name]()


def _markovian() -> Dict[str, Union[UnivariateSpec, PhaseProfile]]:
    return {'amplitude': UniGaussian(mean=0.0, sigma=1.0), 'theta': ConstantPhase(0.0)}


def _np_map() -> Dict[str, Union[UnivariateSpec, PhaseProfile]]:
    return {'amplitude': UniGaussian(mean=0.0, sigma=1.0), 'theta': LinearPhase(slope=4.0)}


def _non_markovian() -> Dict[str, Union[UnivariateSpec, PhaseProfile]]:
    return {
        'amplitude': UniGaussianMixture(means=(-1.0, 1.0), sigmas=(0.2, 0.2), weights=(0.5, 0.5)),
        'theta': LinearPhase(slope=-0.3),
    }


def _coherence_trapping() -> Dict[str, Union[UnivariateSpec, PhaseProfile]]:
    return {
        'amplitude': UniGaussianMixture(means=(0.0, 0.0), sigmas=(0.01, 1.0), weights=(0.7, 0.3)),
        'theta': StepPhase(at=0.0, low=0.0, high=0.5 * math.pi),
    }


BPLUS_PRESETS: Dict[str, Callable[[], Dict[str, Union[UnivariateSpec, PhaseProfile]]]] = {
    'markovian': _markovian,
    'np_map': _np_map,
    'non_markovian': _non_markovian,
    'coherence_trapping': _coherence_trapping,
}


def bplus_preset(name: str, c_h: complex = ROOT_HALF, c_v: complex = ROOT_HALF) -> CorrelatedPFState:
    if name not in BPLUS_PRESETS:
        raise ConfigurationError('bplus.preset', f'unknown preset {name!r}; known: {sorted(BPLUS_PRESETS)}')
    parts = BPLUS_PRESETS[name]()
    return CorrelatedPFState(c_h=c_h, c_v=c_v, amplitude=cast(UnivariateSpec, parts['amplitude']),
                             theta=cast(PhaseProfile, parts['theta']))


__all__ = [
    'BPLUS_PRESETS',
    'ROOT_HALF',
    'SINGLE_PHOTON_STATES',
    'TWO_PHOTON_STATES',
    'bplus_preset',
    'named_state',
    'state_names',
]
