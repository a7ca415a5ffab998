"""Exception types shared across the package."""


class LogdsError(Exception):
    """Base class for all package-specific errors."""


class BudgetExhausted(LogdsError):
    """A fresh evaluation would exceed the evaluation budget."""


class NonFiniteValue(LogdsError):
    """A problem function returned NaN."""


class UnknownProblem(LogdsError):
    """Requested problem name is not in the registry."""


class InfeasibleStart(LogdsError):
    """Starting point violates the linear constraints / bounds (or, in
    extreme-barrier mode, the nonlinear constraints)."""


class ZeroRow(LogdsError):
    """A linear constraint row is identically zero and cannot be scaled."""


class DegenerateActiveSet(LogdsError):
    """Active linear rows are linearly dependent; cone generation for the
    degenerate case is not supported."""


class PoisingFailure(LogdsError):
    """Model-building linear system is numerically singular."""


class DomainError(LogdsError):
    """Multiplier estimates requested outside the finite-merit region."""


class InvalidBracket(LogdsError):
    """Convergence test called with f_M < f_L."""


class DuplicateRun(LogdsError):
    """Two run histories for the same (problem, solver) pair."""


class EmptyTable(LogdsError):
    """Profile requested from a table with no problems."""


class InvalidConfig(LogdsError):
    """A solver or problem configuration violates its declared ranges."""
