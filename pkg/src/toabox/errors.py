"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (the class name) so the
command line driver can report a single parsable line and map it to exit 2.
"""


class ToaBoxError(Exception):
    """Base class for all toolkit errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class NonPositiveScale(ToaBoxError, ValueError):
    pass


class GammaOutOfRange(ToaBoxError, ValueError):
    pass


class PositionOutOfBox(ToaBoxError, ValueError):
    pass


class MixedRepresentation(ToaBoxError, TypeError):
    pass


class PeriodicGammaNotAllowed(ToaBoxError, ValueError):
    pass


class ConditioningError(ToaBoxError, ValueError):
    pass


class ZeroModePresent(ToaBoxError, ValueError):
    pass


class QuadratureBudgetExceeded(ToaBoxError, RuntimeError):
    pass


class NonSmoothInput(ToaBoxError, ValueError):
    pass


class NonHermitianInput(ToaBoxError, ValueError):
    pass


class IndexOutOfBasis(ToaBoxError, IndexError):
    pass


class ZeroStateAfterProjection(ToaBoxError, ValueError):
    pass


class UnprojectedState(ToaBoxError, ValueError):
    pass


class UnnormalizedState(ToaBoxError, ValueError):
    pass


class DivergentMoment(ToaBoxError, ValueError):
    pass


class ParseError(ToaBoxError, ValueError):
    pass


class ValidationError(ToaBoxError, ValueError):
    pass


class UnknownKey(ToaBoxError, KeyError):
    def __str__(self) -> str:
        # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else ""
