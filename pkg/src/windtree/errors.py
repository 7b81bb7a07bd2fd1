"""Exception types shared across the package."""


class WindtreeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WindtreeError):
    """A parameter lies outside its admissible domain."""


class NotSquareFree(DomainError):
    """The discriminant of a quadratic field parameter has a square factor."""


class CornerHit(WindtreeError):
    """A trajectory met a scatterer corner within tolerance.

    The billiard flow is undefined past a corner, so the trajectory is
    aborted.  ``time_reached`` carries the flow time at the abort.
    """

    def __init__(self, message, time_reached=0.0):
        super().__init__(message)
        self.time_reached = time_reached


class GluingError(WindtreeError):
    """An edge of a polygonal surface has no valid partner."""


class NonClosedCurve(WindtreeError):
    """A curve representative does not close up on the surface."""


class SaddleConnection(WindtreeError):
    """A flow separatrix connects two singular points (or hits one within
    tolerance), so the first-return construction or the induction cannot
    continue in this direction."""


class NonReturning(WindtreeError):
    """An orbit failed to return to the transversal within the trace cap."""


class TieBreak(SaddleConnection):
    """The two candidate intervals of an induction step have equal length
    within tolerance, signalling a connection."""


class Degenerate(WindtreeError):
    """A tracked frame collapsed below the requested rank."""


class InsufficientData(WindtreeError):
    """Not enough points or steps to produce an estimate."""


class RetryExhausted(WindtreeError):
    """Too many trajectories aborted; the retry budget is spent."""


class ConfigError(WindtreeError):
    """An experiment configuration is invalid."""
