"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); failures of
the numerical engines derive from :class:`NumericalError` (exit code 3).
"""


class LiYauError(Exception):
    pass


class InputError(LiYauError, ValueError):
    pass


class NumericalError(LiYauError, ArithmeticError):
    pass


class NonPositiveWeight(InputError):
    pass


class NegativeSigma(InputError):
    pass


class VanishingData(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ClosedFormOnlyData(InputError):
    """Raised when point-mass data reaches a pointwise or quadrature evaluator."""


class NonPositiveTime(InputError):
    pass


class OrderTooLarge(InputError):
    pass


class DimensionTooLarge(InputError):
    pass


class StepTooSmall(InputError):
    pass


class InadmissibleParams(InputError):
    pass


class BudgetTooSmall(InputError):
    pass
