"""Exception hierarchy shared by all modules."""


class IsoperimError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(IsoperimError, ValueError):
    """Structurally invalid polygon or shape (too few vertices, wrong winding, self-intersection)."""


class DegenerateShapeError(ShapeError):
    """Shape with zero area, or a point set with no 2D extent."""


class DomainError(IsoperimError, ValueError):
    """Argument outside the domain where a closed form is defined."""


class ResolutionError(IsoperimError, ValueError):
    """Discretization too coarse for the requested quantity."""


class InconsistencyError(IsoperimError, ArithmeticError):
    """A sign condition or identity that must hold analytically failed numerically."""


class UnsupportedRegimeError(DomainError):
    pass


class UndefinedObjectiveError(IsoperimError, ZeroDivisionError):
    """lambda0 vanishes, so J and its derivative are undefined."""


class DegeneratePartitionError(IsoperimError, ValueError):
    """Shape boundary runs along the barycentric circle."""


class InsufficientDataError(IsoperimError, ValueError):
    pass


class DivergenceError(IsoperimError, RuntimeError):
    """Shooting trajectory left its bounding box."""


class InfeasibleError(IsoperimError, ValueError):
    """Constraints cannot be met without overlapping components."""


class InvalidParametrizationError(IsoperimError, ValueError):
    """Radial function is not positive at some sample angle."""
