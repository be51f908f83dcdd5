from .problem import (
    ConicProblem,
    ConicSolution,
    CvxpyBackend,
    LMIProblem,
    NativeBackend,
    Status,
    deembed,
    embed,
    get_backend,
    solve,
    toeplitz_constraint,
    toeplitz_feasible,
)
from .core import CoreProblem, solve_core

__all__ = [
    "ConicProblem", "ConicSolution", "CvxpyBackend", "LMIProblem", "NativeBackend",
    "Status", "deembed", "embed", "get_backend", "solve", "toeplitz_constraint", "toeplitz_feasible",
    "CoreProblem", "solve_core",
]
