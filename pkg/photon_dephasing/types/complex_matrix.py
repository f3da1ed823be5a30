"""Type alias for a dense complex matrix (density operators, basis and jump operators)."""

import numpy as np
import numpy.typing as npt

ComplexMatrix = npt.NDArray[np.complex128]

__all__ = ["ComplexMatrix"]
