"""Exception hierarchy shared by all actmap modules."""


class ACTError(Exception):
    """Base class for domain errors raised by actmap."""


class NonFiniteResult(ACTError, ArithmeticError):
    """A map evaluation overflowed or produced NaN."""


class NotInvertible(ACTError, ValueError):
    """The map has zero Jacobian determinant (e == 0)."""


class StripViolation(ACTError, ValueError):
    """Parameter e lies outside the strip |e|(a^2+b^2) < 1."""


class EmptyRegion(ACTError, ValueError):
    """A stability region is empty for the requested slice."""


class HypothesisNotMet(ACTError, ValueError):
    """Horseshoe conditions do not hold for the given parameters."""


class ContinuationFailed(ACTError, RuntimeError):
    """Newton continuation diverged, stagnated or hit a collision."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResidualTooLarge(ACTError, ValueError):
    """An x-window is not close enough to a solution to be lifted."""


class OutsideSlabs(ACTError, ValueError):
    """An orbit point lies outside every horseshoe slab."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class DegenerateParameters(ACTError, ValueError):
    """A closed-form quantity is undefined at these parameters (e.g. a^2+b^2 == 1)."""


class OrbitEscaped(ACTError, RuntimeError):
    """An orbit left the escape box where a bounded orbit was required."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class TooFewCrossings(ACTError, RuntimeError):
    """A Poincare section collected fewer crossings than requested."""
