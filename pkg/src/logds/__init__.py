"""Derivative-free solver for nonlinearly constrained optimization.

Pattern search driven by a mixed logarithmic-barrier / exterior-penalty
merit function, with quadratic-model search steps, simplex-gradient poll
ordering, cone-conforming directions for linear constraints, and a
benchmarking harness producing performance and data profiles.
"""

from .errors import (BudgetExhausted, DegenerateActiveSet, DomainError,
                     DuplicateRun, EmptyTable, InfeasibleStart, InvalidBracket,
                     InvalidConfig, LogdsError, NonFiniteValue, PoisingFailure,
                     UnknownProblem, ZeroRow)
from .merit import (MeritParams, MeritValue, constraint_violation, g_min,
                    merit_value, multiplier_estimates, partition_inequalities)
from .problems import EvalCache, Evaluation, Problem, evaluate, nearby_points
from .registry import (SUITES, available_problems, load_problem_file,
                       registry_lookup)
from .solver import (SolveResult, SolverConfig, extreme_barrier_solve, solve)

__all__ = [
    "BudgetExhausted", "DegenerateActiveSet", "DomainError", "DuplicateRun",
    "EmptyTable", "EvalCache", "Evaluation", "InfeasibleStart",
    "InvalidBracket", "InvalidConfig", "LogdsError", "MeritParams",
    "MeritValue", "NonFiniteValue", "PoisingFailure", "Problem", "SUITES",
    "SolveResult", "SolverConfig", "UnknownProblem", "ZeroRow",
    "available_problems", "constraint_violation", "evaluate",
    "extreme_barrier_solve", "g_min", "load_problem_file", "merit_value",
    "multiplier_estimates", "nearby_points", "partition_inequalities",
    "registry_lookup", "solve",
]

__version__ = "0.1.0"
