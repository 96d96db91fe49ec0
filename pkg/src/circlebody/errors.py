"""Exception hierarchy shared by every module of the package."""


class CircleBodyError(Exception):
    """Base class for all package errors."""


class SingularityError(CircleBodyError):
    """A force law or change of variables is evaluated on a singular set."""


class CollisionSingularity(SingularityError):
    """Two particles coincide (or are antipodal) to within the guard tolerance."""


class TangentSingularity(SingularityError):
    """A particle sits at theta = +-pi/2 (mod pi) where tan is undefined."""


class PoleHit(SingularityError):
    """The quadrature antiderivative was evaluated on one of its poles."""


class ConstraintViolation(CircleBodyError, ValueError):
    """A circle-state input is off the unit circle beyond tolerance."""


class DegenerateVector(CircleBodyError, ValueError):
    """A position vector is too short to be projected onto the unit circle."""


class ZeroMass(CircleBodyError, ValueError):
    """A model was built with a vanishing mass-like coefficient."""


class WrongKind(CircleBodyError, TypeError):
    """An operation was requested for a model kind that does not support it."""


class SingularityEncountered(SingularityError):
    """Integration hit a singular point of the vector field.

    Attributes
    ----------
    t : float
        Last time reached (localized to ~1e-9).
    """

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t


class StepLimitExceeded(CircleBodyError):
    pass


class GridMismatch(CircleBodyError, ValueError):
    pass


class DegenerateLeadingCoefficient(CircleBodyError):
    pass


class RepeatedRoots(CircleBodyError):
    pass


class ContinuationFailure(SingularityError):
    """Newton continuation of the quadrature relation broke down.

    Attributes
    ----------
    t_last : float
        Last time at which the continuation had converged.
    """

    def __init__(self, message, t_last):
        super().__init__(message)
        self.t_last = t_last


class ConfigError(CircleBodyError, ValueError):
    pass
