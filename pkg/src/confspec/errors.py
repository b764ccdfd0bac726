"""Exception and warning types shared across confspec."""


class ConfspecError(Exception):
    """Base class for all confspec errors."""


class InvalidParameter(ConfspecError, ValueError):
    pass


class UnivalenceViolation(ConfspecError, ValueError):
    """Raised when a map is known (or detected) not to be locally univalent."""


class ConvergenceFailure(ConfspecError, RuntimeError):
    pass


class ExponentMismatch(ConfspecError, ValueError):
    pass


class DegenerateCurve(ConfspecError, ValueError):
    pass


class LengthMismatch(ConfspecError, ValueError):
    pass


class BandwidthTooLow(UserWarning):
    """The angular grid may alias products of basis functions and weight."""


class SingularMass(UserWarning):
    """Part of the discrete weighted mass matrix is numerically zero."""


class NonConvergence(UserWarning):
    pass


class DegenerateWeight(UserWarning):
    """The two weights coincide on the grid; the optimal constant is zero."""
