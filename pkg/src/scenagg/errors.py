"""Exception hierarchy.

Every error raised by the package derives from :class:`ScenaggError`.  Most
also derive from a builtin (``ValueError``, ``IOError``...) so callers that
only care about the broad category can catch that instead.
"""


class ScenaggError(Exception):
    pass


# data model / validation
class NonFiniteValue(ScenaggError, ValueError):
    pass


class RaggedInput(ScenaggError, ValueError):
    pass


class NegativeWeight(ScenaggError, ValueError):
    pass


class MismatchedSource(ScenaggError, ValueError):
    pass


class PreconditionError(ScenaggError, ValueError):
    pass


# preprocess
class DegenerateChannel(ScenaggError, ValueError):
    pass


class ZeroRepresentativeMean(ScenaggError, ValueError):
    pass


# distance
class LengthMismatch(ScenaggError, ValueError):
    pass


class EmptyInput(ScenaggError, ValueError):
    pass


class InfeasibleWindow(ScenaggError, ValueError):
    pass


class ZeroNorm(ScenaggError, ValueError):
    pass


# clustering / reduction
class BadK(ScenaggError, ValueError):
    pass


class EmptyCluster(ScenaggError, RuntimeError):
    pass


class MissingContext(ScenaggError, ValueError):
    pass


class EmptyKeptSet(ScenaggError, ValueError):
    pass


class NoLoadChannel(ScenaggError, ValueError):
    pass


# som
class BadGrid(ScenaggError, ValueError):
    pass


class BadSchedule(ScenaggError, ValueError):
    pass


class DimensionMismatch(ScenaggError, ValueError):
    pass


# spatial
class MissingFlows(ScenaggError, ValueError):
    pass


class DisconnectedWeightless(ScenaggError, ValueError):
    pass


class ZeroDegree(ScenaggError, ValueError):
    pass


class EigenNoConvergence(ScenaggError, RuntimeError):
    pass


# quality
class SingleCluster(ScenaggError, ValueError):
    pass


class SingletonOnly(ScenaggError, ValueError):
    pass


class NonPositiveBase(ScenaggError, ValueError):
    pass


# tep / milp
class UnboundChannel(ScenaggError, ValueError):
    pass


class InfeasibleBounds(ScenaggError, ValueError):
    pass


class NumericalBreakdown(ScenaggError, ArithmeticError):
    pass


class Infeasible(ScenaggError, RuntimeError):
    pass


class NodeLimit(ScenaggError, RuntimeError):
    pass


class TimeLimit(ScenaggError, RuntimeError):
    pass


class NameTooLong(ScenaggError, ValueError):
    pass


# io
class IoFailure(ScenaggError, OSError):
    pass


class ParseError(ScenaggError, ValueError):
    def __init__(self, message, line=None, column=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.column = column


class NonRectangular(ParseError):
    pass


class NonFinite(ParseError, NonFiniteValue):
    pass


class SchemaError(ScenaggError, ValueError):
    pass


class DanglingReference(SchemaError):
    pass
