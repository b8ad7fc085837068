"""Exception types shared across the engine."""


class QuartnError(Exception):
    """Base class for all engine errors."""


class InvalidColourSet(QuartnError):
    """Colour set is empty, full, out of range, or not canonical where required."""


class MalformedGraph(QuartnError):
    """Coloured graph violates a structural invariant."""


class UnsupportedModel(QuartnError):
    """Operation not defined for this propagator/scaling combination."""


class UnsupportedBubble(QuartnError):
    """Interaction component is not a quartic invariant of canonical type."""


class RequiresConnected(QuartnError):
    """Operation defined only on connected objects."""


class NoBoundary(QuartnError):
    """Boundary requested on a vacuum (cilium-free) map."""


class BudgetExceeded(QuartnError):
    """A combinatorial guard was exceeded; pass allow_blowup to override."""


class TruncationMismatch(QuartnError):
    """Two series with different truncation orders were combined."""
