"""Exception types shared across the package."""


class AnnulabError(Exception):
    """Base class for all annulab errors."""


class BadParameter(AnnulabError):
    """A map or table constructor received parameters outside its domain."""


class FiberEscape(AnnulabError):
    """An orbit left the fiber interval of the chart beyond its margin."""

    def __init__(self, message, step=None, point=None):
        super().__init__(message)
        self.step = step
        self.point = point


class MissingInverse(AnnulabError):
    """Backward iteration requested on a map without an inverse."""


class OutsideDomain(AnnulabError):
    """A partial map was evaluated outside its domain of definition."""


class OrbitLeavesN(AnnulabError):
    """An itinerary was requested past the point where the orbit exits the
    horseshoe rectangle."""


class DegenerateChord(AnnulabError):
    """The billiard chord solver failed to produce a forward intersection."""


class BoundaryZero(AnnulabError):
    """The displacement field vanishes on a cell boundary, so the winding
    number is undefined there."""


class OverlapError(AnnulabError):
    """Fixed-point cells overlap, so their indices cannot be summed."""


class LinkVerificationFailed(AnnulabError):
    """A disk-chain link could not be certified by a witness point."""


class PreconditionFailed(AnnulabError):
    """A documented precondition of an operation does not hold."""


class NotFoundAtResolution(AnnulabError):
    """The requested structure was not found at this box resolution."""


class ClaimFailed(AnnulabError):
    """A horseshoe verification check failed; carries the counterexample."""

    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class SchemaError(AnnulabError):
    """A certificate file does not match the expected schema."""
