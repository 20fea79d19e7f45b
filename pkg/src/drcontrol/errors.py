"""Exception types shared across the package."""


class DrControlError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(DrControlError):
    """Two signals or a signal and an operator do not share a grid."""


class DynamicsOverflowError(DrControlError):
    """State or adjoint propagation produced non-finite values."""


class ProjectorUnavailableError(DrControlError):
    """The closed-form affine projector does not apply to this system."""


class ControllabilityError(DrControlError):
    """The shooting matrix is numerically singular on this grid."""


class DualRepresentationError(DrControlError):
    """The adjoint basis is too ill-conditioned to fit a dual variable."""


class DivergenceError(DrControlError):
    """An iteration produced non-finite values."""


class ProblemValidationError(DrControlError):
    """A problem definition (built-in override or file) failed validation."""
