"""Constrained problem definitions, evaluation bookkeeping and the run cache.

A :class:`Problem` bundles an objective with nonlinear inequality/equality
constraints, general linear rows ``A x <= b`` and variable bounds.  All
evaluations of a solver run go through one :class:`EvalCache`, which owns the
evaluation counter, enforces the budget and deduplicates repeated points so
model building can reuse past evaluations for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetExhausted, InfeasibleStart, NonFiniteValue

# Points closer than this (Euclidean) are treated as the same evaluation.
# Far below the smallest meaningful step size (1e-8) so distinct poll points
# are never merged.
DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class Problem:
    """Immutable problem description.

    ``ineq`` entries are the constraints ``g(x) <= 0``; ``eq`` entries the
    constraints ``h(x) = 0``.  ``lin_a`` / ``lin_b`` hold general linear rows
    ``a_i . x <= b_i``; bounds are kept apart from the rows because polling
    treats boxes with coordinate directions and rows via penalty or
    conforming directions.
    """

    name: str
    n: int
    objective: Callable[[np.ndarray], float]
    ineq: tuple = ()
    eq: tuple = ()
    lin_a: np.ndarray | None = None
    lin_b: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    x0: np.ndarray = None

    def __post_init__(self):
        lower = _as_bound(self.lower, self.n, -np.inf)
        upper = _as_bound(self.upper, self.n, np.inf)
        lin_a = np.zeros((0, self.n)) if self.lin_a is None else np.atleast_2d(
            np.asarray(self.lin_a, dtype=float))
        lin_b = np.zeros(0) if self.lin_b is None else np.atleast_1d(
            np.asarray(self.lin_b, dtype=float))
        if lin_a.shape[1] != self.n or lin_a.shape[0] != lin_b.shape[0]:
            raise ValueError(
                f"{self.name}: linear system has shape {lin_a.shape} vs "
                f"b of length {lin_b.shape[0]} (n={self.n})")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.n,):
            raise ValueError(f"{self.name}: x0 has shape {x0.shape}, expected ({self.n},)")
        object.__setattr__(self, "lin_a", lin_a)
        object.__setattr__(self, "lin_b", lin_b)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "ineq", tuple(self.ineq))
        object.__setattr__(self, "eq", tuple(self.eq))
        if not self.linear_feasible(x0):
            raise InfeasibleStart(
                f"{self.name}: x0 violates the linear constraints or bounds")

    @property
    def m(self) -> int:
        return len(self.ineq)

    @property
    def p(self) -> int:
        return len(self.eq)

    @property
    def q(self) -> int:
        return self.lin_a.shape[0]

    def linear_feasible(self, x: np.ndarray) -> bool:
        """Exact (tolerance-free) membership test for X = {Ax <= b} + bounds."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lower) or np.any(x > self.upper):
            return False
        if self.q and np.any(self.lin_a @ x > self.lin_b):
            return False
        return True

    def raw_values(self, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Evaluate f, g, h at x without any caching or feasibility logic."""
        f = float(self.objective(x))
        g = np.array([gl(x) for gl in self.ineq], dtype=float)
        h = np.array([hj(x) for hj in self.eq], dtype=float)
        return f, g, h


def _as_bound(v, n: int, default: float) -> np.ndarray:
    if v is None:
        return np.full(n, default)
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"bound vector has shape {arr.shape}, expected ({n},)")
    return arr


def fold_linear_rows(problem: Problem) -> Problem:
    """Move general linear rows into the inequality list.

    Each row a.x <= b becomes the constraint g(x) = a.x - b <= 0 appended
    after the original inequalities, so it participates in the barrier/penalty
    partition like any other g.  Bounds stay hard.  Problems without rows are
    returned unchanged.
    """
    if problem.q == 0:
        return problem
    rows = tuple(
        (lambda x, a=problem.lin_a[i], b=problem.lin_b[i]: float(a @ x) - b)
        for i in range(problem.q))
    return Problem(
        name=problem.name,
        n=problem.n,
        objective=problem.objective,
        ineq=problem.ineq + rows,
        eq=problem.eq,
        lin_a=None,
        lin_b=None,
        lower=problem.lower,
        upper=problem.upper,
        x0=problem.x0,
    )


@dataclass(frozen=True, eq=False)
class Evaluation:
    """One problem evaluation: raw values plus linear-feasibility flag.

    Raw f, g, h are stored even when ``in_X`` is false; downstream code
    decides what infeasibility means (merit +inf, extreme barrier, ...).
    Records compare by identity: each one stands for a distinct evaluation.
    """

    x: np.ndarray
    f: float
    g: np.ndarray
    h: np.ndarray
    in_X: bool
    eval_index: int


class EvalCache:
    """Ordered store of all evaluations of one solver run.

    Enforces the evaluation budget and deduplicates points within
    ``DUPLICATE_TOL`` so a repeated point never costs budget.  One cache
    belongs to exactly one run; it is not shared across runs.
    """

    def __init__(self, budget: int):
        if budget < 1:
            raise ValueError("budget must be at least 1")
        self.budget = int(budget)
        self.records: list[Evaluation] = []
        self._xs = np.zeros((0, 0))  # grown lazily, rows mirror records

    def __len__(self) -> int:
        return len(self.records)

    def lookup(self, x: np.ndarray) -> Evaluation | None:
        """Return the cached record matching x within DUPLICATE_TOL, if any."""
        if not self.records:
            return None
        d2 = np.sum((self._xs[: len(self.records)] - x) ** 2, axis=1)
        i = int(np.argmin(d2))
        if d2[i] <= DUPLICATE_TOL ** 2:
            return self.records[i]
        return None

    def _append(self, record: Evaluation) -> None:
        k = len(self.records)
        if self._xs.shape[0] <= k:
            grown = np.zeros((max(64, 2 * max(1, self._xs.shape[0])), record.x.size))
            if k:
                grown[:k] = self._xs[:k]
            self._xs = grown
        self._xs[k] = record.x
        self.records.append(record)

    def points(self) -> np.ndarray:
        """(len, n) array of all cached points, in evaluation order."""
        return self._xs[: len(self.records)].copy()


def evaluate(problem: Problem, x: np.ndarray, cache: EvalCache) -> Evaluation:
    """Evaluate the problem at x through the cache.

    A cache hit returns the existing record and costs nothing.  A fresh
    evaluation raises :class:`BudgetExhausted` if the budget is already
    spent, and :class:`NonFiniteValue` if any of f, g, h is NaN.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({problem.n},)")
    hit = cache.lookup(x)
    if hit is not None:
        return hit
    if len(cache) >= cache.budget:
        raise BudgetExhausted(
            f"evaluation budget of {cache.budget} exhausted at {problem.name}")
    f, g, h = problem.raw_values(x)
    if np.isnan(f) or np.any(np.isnan(g)) or np.any(np.isnan(h)):
        raise NonFiniteValue(f"{problem.name} returned NaN at x={x.tolist()}")
    record = Evaluation(
        x=x.copy(), f=f, g=g, h=h,
        in_X=problem.linear_feasible(x),
        eval_index=len(cache) + 1,
    )
    cache._append(record)
    return record


def nearby_points(cache: EvalCache, center: np.ndarray,
                  radius: float) -> list[Evaluation]:
    """Cached records within ``radius`` of center, nearest first.

    Ties are broken by evaluation order.  ``radius`` may be ``np.inf`` to get
    the whole cache sorted by distance.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not cache.records:
        return []
    center = np.asarray(center, dtype=float)
    d = np.sqrt(np.sum((cache.points() - center) ** 2, axis=1))
    order = np.lexsort((np.arange(len(d)), d))
    return [cache.records[i] for i in order if d[i] <= radius]
