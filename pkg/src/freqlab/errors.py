"""Exception types shared across the package."""


class FreqlabError(Exception):
    """Base class for all package errors."""


class DegeneratePair(FreqlabError, ValueError):
    """Start and target point coincide, so no direction exists."""


class ZeroMass(FreqlabError, ValueError):
    """A quantized direction rounded to the zero vector."""


class DegenerateSegment(FreqlabError):
    """A construction segment had nothing to do and was skipped."""


class BudgetExceeded(FreqlabError):
    """A construction hit its length budget."""


class BoundViolation(FreqlabError, AssertionError):
    """A proven finite-prefix bound failed during construction."""


class Overflow(FreqlabError, OverflowError):
    """A schedule value left the representable integer range."""


class OutOfRange(FreqlabError, IndexError):
    """An index outside ``1..len(seq)`` was requested."""


class EmptyWindow(FreqlabError, ValueError):
    """A tail window contains no indices."""


class NeverOccurred(FreqlabError, ValueError):
    """A conditioning event does not occur in the prefix."""


class EmptySelection(FreqlabError, ValueError):
    """A selection rule picked no index."""


class DimensionMismatch(FreqlabError, ValueError):
    """Vectors over different alphabets were combined."""


class ZeroLowerProbability(FreqlabError, ValueError):
    """Some credal point gives the conditioning event (near) zero mass."""


class NoBracket(FreqlabError, ValueError):
    """The generalized Bayes equation has no sign change on its bracket."""


class ClosureBudgetExceeded(FreqlabError, RuntimeError):
    """A set-system closure grew past its member budget."""


class NotPiSystem(FreqlabError, ValueError):
    """A set system is not closed under intersection."""
