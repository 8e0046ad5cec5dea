"""Exception types.

Everything raised on bad input derives from :class:`InputError` (CLI exit
code 1). :class:`InvariantViolation` marks a broken internal guarantee
(CLI exit code 2).
"""


class NncError(Exception):
    """Base class for all package errors."""


class InputError(NncError, ValueError):
    pass


class InvariantViolation(NncError, RuntimeError):
    pass


# metric
class EmptyInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidLabel(InputError):
    pass


class MetricViolation(InputError):
    pass


class ZeroDiameter(InputError):
    pass


class TooFewPoints(InputError):
    pass


class SingleClass(InputError):
    pass


class ZeroMargin(InputError):
    pass


# condense / classify
class EmptySubset(InputError):
    pass


class TooLarge(InputError):
    pass


class InconsistentInput(InputError):
    pass


class OutOfSampleUnsupported(InputError):
    pass


# bounds
class InvalidRange(InputError):
    pass


class SubsetTooLarge(InputError):
    pass


class EllExceedsN(InputError):
    """The packing-size cap is at least the sample size, so the bound says nothing."""


class VacuousBound(InputError):
    pass


class TooFewLevels(InputError):
    pass


class NoFeasiblePoint(InputError):
    pass


# hardness
class DegenerateInstance(InputError):
    pass


class InfeasibleMetric(InvariantViolation):
    pass


# harness
class ParseError(InputError):
    pass


class MissingClass(InputError):
    pass


class PoolTooSmall(InputError):
    pass
