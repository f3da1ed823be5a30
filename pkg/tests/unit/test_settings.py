"""Unit tests for tolerance profiles."""

from __future__ import annotations

import pytest

from photon_dephasing.exception import ConfigurationError
from photon_dephasing.settings import DEFAULT_TOLERANCES, TOLERANCE_PROFILES, tolerance_profile


def test_default_profile() -> None:
    assert tolerance_profile("default") is DEFAULT_TOLERANCES
    assert DEFAULT_TOLERANCES.pole_epsilon == 1e-3
    assert DEFAULT_TOLERANCES.as_dict()["singular"] == 1e-12


def test_profiles_only_change_verification_thresholds() -> None:
    strict = TOLERANCE_PROFILES["strict"]
    assert strict.tabulated_check < DEFAULT_TOLERANCES.tabulated_check
    assert strict.ode_rtol == DEFAULT_TOLERANCES.ode_rtol
    assert TOLERANCE_PROFILES["relaxed"].rate_relative > DEFAULT_TOLERANCES.rate_relative


def test_overrides_and_unknown_profiles() -> None:
    tuned = tolerance_profile("relaxed", ode_rtol=1e-6)
    assert tuned.ode_rtol == 1e-6
    assert tuned.trajectory == TOLERANCE_PROFILES["relaxed"].trajectory
    with pytest.raises(ConfigurationError):
        tolerance_profile("sloppy")
