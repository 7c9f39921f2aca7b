"""Exception hierarchy shared by all modules."""


class DTError(Exception):
    """Base class for every error raised by this package."""


class DomainMismatchError(DTError, TypeError):
    """An attribute was evaluated on an object outside its domain encoding."""


class UndefinedDecisionError(DTError, KeyError):
    """A realizable value tuple has no decision in the problem's map."""

    def __str__(self):
        return Exception.__str__(self)


class ScopeError(DTError, ValueError):
    """An attribute is not covered by the witness universe in use."""


class InvalidAttributeError(DTError, ValueError):
    """An attribute spec is malformed or not a member of the system's family."""


class CapacityError(DTError):
    """A witness universe, subset family or enumeration exceeded its cap."""


class UnsolvableError(DTError):
    """The attribute pool cannot separate two objects with different decisions."""


class BudgetExhaustedError(DTError):
    """Exhaustive search found no solving tree within the node budget."""


class InconsistentFlagsError(DTError, ValueError):
    """Declared system flags violate restricted coverage => coverage."""


class CoverError(DTError, ValueError):
    """A certificate cover does not partition the tuple regions exactly."""


class ClosedFormMismatch(DTError, AssertionError):
    """A computed optimum disagrees with the closed form it is checked against."""


class UnsupportedSystemError(DTError, ValueError):
    """The operation has no construction for this information system."""
