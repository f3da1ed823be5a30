"""Type exports for photon_dephasing."""

from .bplus_config import BPlusConfig
from .check_result import CheckResult
from .complex_matrix import ComplexMatrix
from .output_config import OutputConfig
from .real_matrix import RealMatrix
from .real_vector import RealVector
from .scenario_config import ScenarioConfig
from .spectrum_config import SpectrumConfig
from .time_grid_config import TimeGridConfig

__all__ = [
    "BPlusConfig",
    "CheckResult",
    "ComplexMatrix",
    "OutputConfig",
    "RealMatrix",
    "RealVector",
    "ScenarioConfig",
    "SpectrumConfig",
    "TimeGridConfig",
]
