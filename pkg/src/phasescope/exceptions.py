"""Error types raised by phasescope operations.

All inherit from PhasescopeError so callers (notably the CLI) can map
library failures to input-error exit codes in one place.
"""


class PhasescopeError(ValueError):
    """Base class for phasescope input and precondition errors."""


class DimensionMismatch(PhasescopeError):
    """Operands live on different grids or have incompatible dimensions."""


class InvalidGrid(PhasescopeError):
    """Grid axis counts or extents violate the construction contract."""


class UnsupportedSampling(PhasescopeError):
    """A distributional signal was asked for a pointwise sample grid."""


class UnsupportedOperation(PhasescopeError):
    """The requested analytic rewrite is outside the closed signal menu."""


class NearOrthogonalWindows(PhasescopeError):
    """Window pairing (h, g) is too small for a stable inversion."""


class DegenerateWindow(PhasescopeError):
    """Window norm is numerically zero."""


class SingularMatrix(PhasescopeError):
    """Matrix argument must be invertible (or symplectic-block valid)."""


class EmptyRegion(PhasescopeError):
    """A shell or cone region contains no grid nodes."""


class ConeStarvation(PhasescopeError):
    """A cone-restricted shell holds too few nodes for a stable fit."""


class InvalidFormat(PhasescopeError):
    """A serialized field or JSON description does not match its schema."""
