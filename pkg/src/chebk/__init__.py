"""Weighted Chebyshev polynomials of the first and second kind on unions of
intervals, computed with a self-contained semidefinite programming solver."""

from .capacity import CapacityEstimate, capacity_estimate, l2_monic_min, sandwich
from .chebyshev import ChebPoly, RationalWeight
from .errors import (
    AllPatternsInfeasible,
    ChebkError,
    IntervalError,
    SolverFailure,
    SpecParseError,
    WeightInvalid,
)
from .first_kind import FirstKindResult, solve_first_kind, solve_first_kind_restricted
from .intervals import IntervalUnion, K1, K2, normalize, validate
from .second_kind import SecondKindResult, auto_degree, ersatz_norm, solve_second_kind

__version__ = "0.1.0"
