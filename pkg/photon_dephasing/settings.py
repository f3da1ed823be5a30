"""Centralized numerical tolerances and named tolerance profiles."""

from dataclasses import dataclass, fields, replace
from typing import Any, Dict

from .exception import ConfigurationError


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = 1e-12
    hermiticity: float = 1e-10
    normalization: float = 1e-8
    quadrature: float = 1e-10
    singular: float = 1e-12
    structure: float = 1e-9
    degeneracy: float = 1e-9
    pole_epsilon: float = 1e-3
    ode_rtol: float = 1e-8
    ode_atol: float = 1e-10
    weight_floor: float = 1e-12
    divergence_factor: float = 1e6
    grid_trace: float = 1e-3
    # verification thresholds
    rate_relative: float = 1e-6
    rate_absolute: float = 1e-9
    trajectory: float = 1e-6
    positivity: float = 1e-8
    appendix: float = 1e-8
    quadrature_check: float = 1e-8
    tabulated_check: float = 5e-5

    def with_overrides(self, **overrides: float) -> 'Tolerances':
        return replace(self, **overrides)

    def as_dict(self) -> Dict[str, float]:
        return {item.name: getattr(self, item.name) for item in fields(self)}


DEFAULT_TOLERANCES = Tolerances()

TOLERANCE_PROFILES: Dict[str, Tolerances] = {
    'default': DEFAULT_TOLERANCES,
    'strict': DEFAULT_TOLERANCES.with_overrides(quadrature_check=1e-14, tabulated_check=1e-14),
    'relaxed': DEFAULT_TOLERANCES.with_overrides(
        rate_relative=1e-4,
        trajectory=1e-4,
        quadrature_check=1e-6,
        tabulated_check=2e-4,
        positivity=1e-6,
        appendix=1e-6,
    ),
}


def tolerance_profile(name: str, **overrides: Any) -> Tolerances:
    if name not in TOLERANCE_PROFILES:
        known = sorted(TOLERANCE_PROFILES)
        raise ConfigurationError('tolerance_profile', f'unknown profile {name!r}; expected one of {known}')
    profile = TOLERANCE_PROFILES[name]
    return profile.with_overrides(**overrides) if overrides else profile


__all__ = ['DEFAULT_TOLERANCES', 'TOLERANCE_PROFILES', 'Tolerances', 'tolerance_profile']
