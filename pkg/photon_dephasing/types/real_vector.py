"""Type alias for a dense real vector."""

import numpy as np
import numpy.typing as npt

RealVector = npt.NDArray[np.float64]

__all__ = ["RealVector"]
