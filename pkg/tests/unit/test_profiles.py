"""Unit tests for phase profiles."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from photon_dephasing.exception import SpecValidationError
from photon_dephasing.profiles import (BinnedPhase, ConstantPhase, LinearPhase, StepPhase, TabulatedPhase,
                                       load_phase_csv)


def test_constant_and_linear_profiles() -> None:
    omega = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(ConstantPhase(0.3)(omega), 0.3)
    assert ConstantPhase(0.3).is_constant
    assert np.allclose(LinearPhase(slope=2.0, reference=1.0)(omega), [-4.0, -2.0, 2.0])
    assert not LinearPhase(slope=2.0).is_constant
    assert LinearPhase(slope=0.0).is_constant


def test_step_profile_switches_at_its_breakpoint() -> None:
    step = StepPhase(at=0.5, low=0.0, high=math.pi)
    assert list(step(np.array([0.0, 0.5, 1.0]))) == [0.0, math.pi, math.pi]
    assert step.breakpoints() == (0.5,)


def test_binned_profile() -> None:
    binned = BinnedPhase(edges=np.array([-1.0, 1.0]), values=np.array([0.0, 1.0, 2.0]))
    assert list(binned(np.array([-2.0, 0.0, 3.0]))) == [0.0, 1.0, 2.0]
    assert binned.breakpoints() == (-1.0, 1.0)
    with pytest.raises(SpecValidationError):
        BinnedPhase(edges=np.array([1.0, -1.0]), values=np.array([0.0, 1.0, 2.0]))
    with pytest.raises(SpecValidationError):
        BinnedPhase(edges=np.array([0.0]), values=np.array([0.0]))


def test_tabulated_profile_from_csv(tmp_path: Path) -> None:
    path = tmp_path / "phase.csv"
    path.write_text("omega,theta\n-1,0\n0,1\n1,0\n", encoding="utf-8")
    profile = load_phase_csv(path)
    assert isinstance(profile, TabulatedPhase)
    assert profile(np.array([-0.5, 0.0, 5.0])).tolist() == [0.5, 1.0, 0.0]
    assert profile.breakpoints() == (-1.0, 1.0)


def test_tabulated_profile_rejects_missing_columns(tmp_path: Path) -> None:
    path = tmp_path / "phase.csv"
    path.write_text("omega,phi\n0,1\n1,2\n", encoding="utf-8")
    with pytest.raises(SpecValidationError):
        load_phase_csv(path)
