from typing import Optional


class PhotonDephasingException(Exception):
    """Base class for every error raised by photon_dephasing."""


class UnsupportedDimensionError(PhotonDephasingException):
    """Raised when an operator basis is requested for an unsupported dimension."""

    def __init__(self, dim: int) -> None:
        super().__init__(f'unsupported dimension {dim}: expected 2 or 4')
        self.dim = dim


class HermiticityError(PhotonDephasingException):
    """Raised when a matrix expected to be Hermitian is not."""


class DimensionMismatchError(PhotonDephasingException):
    """Raised when operands disagree on dimension."""


class SpecValidationError(PhotonDephasingException):
    """Raised when a frequency distribution or phase profile has invalid parameters."""


class NormalizationError(SpecValidationError):
    """Raised when a probability density does not integrate to one."""


class UnsupportedSpecError(PhotonDephasingException):
    """Raised when an operation does not accept the given distribution variant."""


class SingularMapError(PhotonDephasingException):
    """Raised when the dynamical map cannot be inverted at the requested time."""

    def __init__(self, t: float, det: float, min_singular: float) -> None:
        super().__init__(f'map is singular at t={t!r} (det={det:.3e}, smallest singular value={min_singular:.3e})')
        self.t = t
        self.det = det
        self.min_singular = min_singular


class StructureError(PhotonDephasingException):
    """Raised when a generator carries rate weight outside the dephasing subspace."""


class PoleProximityError(PhotonDephasingException):
    """Raised when a closed-form rate is evaluated inside a pole neighbourhood."""

    def __init__(self, t: float, pole: float) -> None:
        super().__init__(f't={t!r} lies within the neighbourhood of the singular time {pole!r}')
        self.t = t
        self.pole = pole


class LogDerivativeError(PhotonDephasingException):
    """Raised when a logarithmic derivative is requested where a decoherence function vanishes."""

    def __init__(self, t: float, name: str = 'kappa') -> None:
        super().__init__(f'{name} vanishes at t={t!r}')
        self.t = t
        self.name = name


class IntegrationError(PhotonDephasingException):
    """Raised when the adaptive stepper cannot advance."""

    def __init__(self, t: float, message: str) -> None:
        super().__init__(f'integration failed at t={t!r}: {message}')
        self.t = t


class DegenerateWeightError(PhotonDephasingException):
    """Raised when a B+ decomposition term carries (numerically) zero weight."""

    def __init__(self, component: str, weight: float) -> None:
        super().__init__(f'weight w_{component}={weight!r} is degenerate')
        self.component = component
        self.weight = weight


class GridResolutionError(PhotonDephasingException):
    """Raised when a frequency grid is too coarse to represent an environment kernel."""

    def __init__(self, points: int, trace_error: Optional[float] = None) -> None:
        detail = f', trace off by {trace_error:.3e}' if trace_error is not None else ''
        super().__init__(f'grid with {points} points is under-resolved{detail}')
        self.points = points
        self.trace_error = trace_error


class ConfigurationError(PhotonDephasingException):
    """Raised when a scenario configuration is invalid."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f'{field}: {message}')
        self.field = field
