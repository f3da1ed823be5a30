"""Typed, normalized scenario configuration."""

from typing import Dict, List, TypedDict, Union

from .bplus_config import BPlusConfig
from .output_config import OutputConfig
from .spectrum_config import SpectrumConfig
from .time_grid_config import TimeGridConfig


class ScenarioConfig(TypedDict):
    mode: str
    ordering: str
    spectrum: SpectrumConfig
    dn: float
    initial_state: Union[str, List[float]]
    time_grid: TimeGridConfig
    dt_mode: str
    compare_exact: bool
    bplus: BPlusConfig
    tolerance_profile: str
    tolerances: Dict[str, float]
    seed: int
    output: OutputConfig


__all__ = ["ScenarioConfig"]
