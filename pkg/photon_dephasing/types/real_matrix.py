"""Type alias for a dense real matrix (map and generator matrices)."""

import numpy as np
import numpy.typing as npt

RealMatrix = npt.NDArray[np.float64]

__all__ = ["RealMatrix"]
