"""Exception hierarchy for chebk."""


class ChebkError(Exception):
    """Base class for all errors raised by chebk."""


class IntervalError(ChebkError, ValueError):
    """Invalid interval union."""


class EmptySet(IntervalError):
    pass


class UnorderedIntervals(IntervalError):
    pass


class OverlappingIntervals(IntervalError):
    pass


class DegenerateInterval(IntervalError):
    pass


class ZeroPolynomial(ChebkError, ValueError):
    pass


class WeightVanishes(ChebkError, ValueError):
    """The weight (or its numerator) has a zero on the set of interest."""


class WeightInvalid(ChebkError, ValueError):
    pass


class DimensionMismatch(ChebkError, ValueError):
    pass


class SolverFailure(ChebkError, RuntimeError):
    """The conic solver did not return an optimal solution."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class AllPatternsInfeasible(ChebkError, RuntimeError):
    pass


class QuadratureNonConvergence(ChebkError, RuntimeError):
    pass


class GramSingular(ChebkError, RuntimeError):
    pass


class SpecParseError(ChebkError, ValueError):
    """Malformed problem or result document."""
