"""Pattern-search solver on the penalty-barrier merit, plus run reporting.

One iteration runs an optional model-based search step, then an
opportunistic ordered poll; failures contract the step size and may cut the
penalty parameters.  Acceptance always requires a sufficient merit decrease
of gamma * alpha^2, never plain decrease.  The whole run is deterministic:
identical inputs produce identical histories.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .directions import (DirectionSet, conforming_directions, default_directions,
                         eps_active_set, scale_linear_rows)
from .errors import BudgetExhausted, InfeasibleStart, InvalidConfig
from .merit import (MeritParams, constraint_violation, g_min, merit_value,
                    multiplier_estimates, partition_inequalities)
from .problems import EvalCache, Evaluation, Problem, evaluate, fold_linear_rows, nearby_points
from .simplex_gradient import AscentIndicator, order_poll_directions, simplex_gradient
from .surrogate import RADIUS_FACTOR, search_step as surrogate_search_step

FEAS_TOL = 1e-4
ITERATION_CAP = 10 ** 6

LINEAR_MODES = ("penalty", "conforming")
BARRIER_MODES = ("logds", "extreme_barrier")
STOP_REASONS = ("alpha_min", "budget", "max_iter")


@dataclass(frozen=True)
class SolverConfig:
    """All tunables of a run.

    Defaults: sufficient-decrease constant gamma=1e-9, smoothing exponent
    nu=2, update exponent beta=1+1e-9, penalty cut zeta=1e-2, initial
    barrier weight 1e-1, budget 2000 evaluations, minimum step 1e-8.
    """

    alpha0: float = 1.0
    theta_alpha: float = 0.5
    phi: float = 1.0
    gamma: float = 1e-9
    nu: float = 2.0
    beta: float = 1.0 + 1e-9
    zeta: float = 1e-2
    rho0_log: float = 1e-1
    eps_active: float = 1e-5
    max_evals: int = 2000
    alpha_min: float = 1e-8
    linear_mode: str = "penalty"
    search_enabled: bool = True
    barrier_mode: str = "logds"

    def __post_init__(self):
        checks = [
            (self.alpha0 > 0, "alpha0 must be positive"),
            (0 < self.theta_alpha < 1, "theta_alpha must lie in (0, 1)"),
            (self.phi >= 1, "phi must be at least 1"),
            (self.gamma > 0, "gamma must be positive"),
            (1 < self.nu <= 2, "nu must lie in (1, 2]"),
            (self.beta > 1, "beta must exceed 1"),
            (0 < self.zeta < 1, "zeta must lie in (0, 1)"),
            (self.rho0_log > 0, "rho0_log must be positive"),
            (self.eps_active > 0, "eps_active must be positive"),
            (self.max_evals >= 1, "max_evals must be at least 1"),
            (self.alpha_min > 0, "alpha_min must be positive"),
            (self.linear_mode in LINEAR_MODES,
             f"linear_mode must be one of {LINEAR_MODES}"),
            (self.barrier_mode in BARRIER_MODES,
             f"barrier_mode must be one of {BARRIER_MODES}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidConfig(msg)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    outcome: str  # "search_success" | "poll_success" | "unsuccessful"
    alpha_before: float
    alpha_after: float
    rho_log_before: Optional[float]
    rho_log_after: Optional[float]
    rho_ext_before: Optional[float]
    rho_ext_after: Optional[float]
    merit_before: float
    merit_after: float
    evals_used: int
    incumbent_x: np.ndarray


@dataclass
class SolverState:
    """Mutable per-run state.  One state per run; never shared."""

    problem: Problem            # working problem (rows possibly folded)
    config: SolverConfig
    cache: EvalCache
    incumbent: Evaluation
    incumbent_merit: float
    alpha: float
    params: Optional[MeritParams]   # None in extreme-barrier mode
    k: int = 0
    history: list = field(default_factory=list)
    _default_dirs: DirectionSet = None
    _rows_scaled: tuple = None      # (A_bar, b_bar) incl. finite bound rows

    def merit_of(self, ev: Evaluation) -> float:
        if self.params is not None:
            return merit_value(ev, self.params).value
        # extreme barrier: objective on the feasible set, +inf elsewhere
        if ev.in_X and (ev.g.size == 0 or np.max(ev.g) <= 0):
            return ev.f
        return np.inf


def init(problem: Problem, config: SolverConfig) -> SolverState:
    """Evaluate the start point, fix the constraint partition and the
    penalty parameters, and set up direction machinery."""
    extreme = config.barrier_mode == "extreme_barrier"
    if extreme and problem.p > 0:
        raise InvalidConfig("extreme-barrier mode does not support equality constraints")
    working = problem
    if not extreme and config.linear_mode == "penalty":
        working = fold_linear_rows(problem)
    if not working.linear_feasible(working.x0):
        raise InfeasibleStart(f"{problem.name}: x0 violates the linear constraints")
    cache = EvalCache(config.max_evals)
    ev0 = evaluate(working, working.x0, cache)
    if extreme:
        if ev0.g.size and np.max(ev0.g) > 0:
            raise InfeasibleStart(
                f"{problem.name}: x0 violates the nonlinear constraints; "
                "extreme-barrier mode needs a feasible start")
        params = None
        merit0 = ev0.f
    else:
        g_log, g_ext = partition_inequalities(ev0.g)
        params = MeritParams(
            g_log=g_log, g_ext=g_ext,
            rho_log=config.rho0_log,
            rho_ext=1.0 / max(abs(ev0.f), 10.0),
            nu=config.nu, gamma=config.gamma,
            beta=config.beta, zeta=config.zeta,
        )
        merit0 = merit_value(ev0, params).value
    state = SolverState(
        problem=working, config=config, cache=cache,
        incumbent=ev0, incumbent_merit=merit0,
        alpha=config.alpha0, params=params,
    )
    state._default_dirs = default_directions(working.n)
    state._rows_scaled = _scaled_row_system(working)
    return state


def _scaled_row_system(problem: Problem) -> tuple[np.ndarray, np.ndarray]:
    """General rows plus finite bounds as one scaled row system a.x <= b."""
    rows = []
    rhs = []
    if problem.q:
        a_bar, b_bar = scale_linear_rows(problem.lin_a, problem.lin_b)
        rows.append(a_bar)
        rhs.append(b_bar)
    n = problem.n
    for i in range(n):
        if np.isfinite(problem.upper[i]):
            e = np.zeros(n)
            e[i] = 1.0
            rows.append(e[None, :])
            rhs.append(np.array([problem.upper[i]]))
        if np.isfinite(problem.lower[i]):
            e = np.zeros(n)
            e[i] = -1.0
            rows.append(e[None, :])
            rhs.append(np.array([-problem.lower[i]]))
    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack(rows), np.concatenate(rhs)


def _poll_directions(state: SolverState) -> DirectionSet:
    if state.config.linear_mode != "conforming":
        return state._default_dirs
    a_bar, b_bar = state._rows_scaled
    active = eps_active_set(a_bar, b_bar, state.incumbent.x, state.config.eps_active)
    if active.size == 0:
        return state._default_dirs
    return conforming_directions(a_bar[active], state.problem.n)


def _ascent_indicator(state: SolverState) -> AscentIndicator:
    """Simplex gradient from the nearest finite-merit cached points."""
    n = state.problem.n
    x = state.incumbent.x
    pts: list[np.ndarray] = []
    merits: list[float] = []
    for rec in nearby_points(state.cache, x, RADIUS_FACTOR * state.alpha):
        if rec.eval_index == state.incumbent.eval_index:
            continue
        z = state.merit_of(rec)
        if not np.isfinite(z):
            continue
        pts.append(rec.x)
        merits.append(z)
        if len(pts) == n:
            break
    return simplex_gradient(x, state.incumbent_merit, pts, merits)


def penalty_update(alpha_next: float, params: MeritParams,
                   gmin: float) -> MeritParams:
    """Apply the two decrease criteria; both read the pre-update rho_log.

    The barrier parameter is cut when alpha_next <= min(rho_log^beta,
    gmin^2); the exterior parameter additionally requires
    alpha_next <= rho_ext^beta.  The second criterion implies the first, so
    rho_ext never decreases without rho_log decreasing at the same
    iteration.  Each cut multiplies by zeta exactly.
    """
    bar = min(params.rho_log ** params.beta, gmin ** 2)
    cut_log = alpha_next <= bar
    cut_ext = alpha_next <= min(bar, params.rho_ext ** params.beta)
    if not (cut_log or cut_ext):
        return params
    return params.with_rho(
        rho_log=params.zeta * params.rho_log if cut_log else None,
        rho_ext=params.zeta * params.rho_ext if cut_ext else None,
    )


def step(state: SolverState) -> IterationRecord:
    """Run one iteration: search, then ordered opportunistic poll, then the
    penalty update on failure.  Raises BudgetExhausted when a needed fresh
    evaluation no longer fits the budget (spent evaluations stay recorded).
    """
    cfg = state.config
    alpha = state.alpha
    evals_before = len(state.cache)
    merit_before = state.incumbent_merit
    # gamma * alpha^2 can round away entirely for tiny alpha; the strict
    # comparison below then still rules out zero-progress acceptances, which
    # could otherwise cycle through cached points without spending budget.
    threshold = merit_before - cfg.gamma * alpha ** 2

    accepted: Optional[tuple[Evaluation, float]] = None
    outcome = "unsuccessful"

    if cfg.search_enabled:
        z = surrogate_search_step(state.problem, state.cache,
                                  state.incumbent.x, alpha, state.params)
        if z is not None:
            ev = evaluate(state.problem, z, state.cache)
            mz = state.merit_of(ev)
            if ev.in_X and mz <= threshold and mz < merit_before:
                accepted = (ev, mz)
                outcome = "search_success"

    if accepted is None:
        ordered = order_poll_directions(_poll_directions(state),
                                        _ascent_indicator(state))
        for d in ordered:
            y = state.incumbent.x + alpha * d
            # membership in X is checked before spending an evaluation
            if not state.problem.linear_feasible(y):
                continue
            ev = evaluate(state.problem, y, state.cache)
            my = state.merit_of(ev)
            if my <= threshold and my < merit_before:
                accepted = (ev, my)
                outcome = "poll_success"
                break

    rho_log_b = state.params.rho_log if state.params else None
    rho_ext_b = state.params.rho_ext if state.params else None
    params_after = state.params
    if accepted is not None:
        state.incumbent, state.incumbent_merit = accepted
        alpha_after = cfg.phi * alpha
        merit_after = accepted[1]
    else:
        alpha_after = cfg.theta_alpha * alpha
        merit_after = merit_before
        if state.params is not None:
            gmin = g_min(state.incumbent, state.params.g_log)
            params_after = penalty_update(alpha_after, state.params, gmin)
            if params_after is not state.params:
                state.params = params_after
                state.incumbent_merit = merit_value(state.incumbent,
                                                    params_after).value

    record = IterationRecord(
        k=state.k, outcome=outcome,
        alpha_before=alpha, alpha_after=alpha_after,
        rho_log_before=rho_log_b,
        rho_log_after=params_after.rho_log if params_after else None,
        rho_ext_before=rho_ext_b,
        rho_ext_after=params_after.rho_ext if params_after else None,
        merit_before=merit_before, merit_after=merit_after,
        evals_used=len(state.cache) - evals_before,
        incumbent_x=state.incumbent.x.copy(),
    )
    state.history.append(record)
    state.alpha = alpha_after
    state.k += 1
    return record


@dataclass(frozen=True)
class SolveResult:
    problem: str
    config: SolverConfig
    best_x: np.ndarray
    best_f: float
    best_c: float
    evals: int
    iterations: int
    stop_reason: str
    multipliers: Optional[tuple[np.ndarray, np.ndarray]]
    history: list
    trace: list  # (eval_index, f, violation) per evaluation, in order

    def to_json_dict(self) -> dict:
        """Stable-layout dictionary for the JSON report."""
        lam_mu = None
        if self.multipliers is not None:
            lam_mu = {"lambda": list(self.multipliers[0]),
                      "mu": list(self.multipliers[1])}
        return {
            "problem": self.problem,
            "config": asdict(self.config),
            "best_x": list(self.best_x),
            "best_f": self.best_f,
            "best_c": self.best_c,
            "evals": self.evals,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "multipliers": lam_mu,
            "history": [
                {
                    "k": r.k,
                    "outcome": r.outcome,
                    "alpha": r.alpha_after,
                    "rho_log": r.rho_log_after,
                    "rho_ext": r.rho_ext_after,
                    "merit": r.merit_after,
                    "evals_used": r.evals_used,
                }
                for r in self.history
            ],
        }


def solve(problem: Problem, config: SolverConfig | None = None) -> SolveResult:
    """Minimise the problem; stop on step-size floor, budget, or the
    iteration cap.

    The reported point is the best cached one by feasibility-then-objective:
    least f among points with violation <= 1e-4 that satisfy the linear
    constraints, or the least-violation point when none qualifies.
    Multiplier estimates are taken at the final incumbent.
    """
    config = config or SolverConfig()
    state = init(problem, config)
    while True:
        if state.alpha < config.alpha_min:
            stop = "alpha_min"
            break
        if state.k >= ITERATION_CAP:
            stop = "max_iter"
            break
        try:
            step(state)
        except BudgetExhausted:
            stop = "budget"
            break
    return _result(state, stop)


def extreme_barrier_solve(problem: Problem,
                          config: SolverConfig | None = None) -> SolveResult:
    """Baseline comparator: same loop with merit = f on the feasible set,
    +inf elsewhere; no penalty parameters.  Needs a nonlinearly feasible
    start and no equality constraints."""
    config = config or SolverConfig()
    if config.barrier_mode != "extreme_barrier":
        config = SolverConfig(**{**asdict(config), "barrier_mode": "extreme_barrier"})
    return solve(problem, config)


def _result(state: SolverState, stop: str) -> SolveResult:
    records = state.cache.records
    trace = [(r.eval_index, r.f, constraint_violation(r)) for r in records]
    if state.params is None:
        # extreme barrier never trades feasibility away: only exactly
        # feasible points qualify (the start point always does)
        feasible = [r for r in records
                    if r.in_X and (r.g.size == 0 or np.max(r.g) <= 0)]
    else:
        feasible = [r for r in records
                    if r.in_X and constraint_violation(r) <= FEAS_TOL]
    if feasible:
        best = min(feasible, key=lambda r: (r.f, r.eval_index))
    else:
        best = min(records, key=lambda r: (constraint_violation(r), r.eval_index))
    multipliers = None
    if state.params is not None:
        multipliers = multiplier_estimates(state.incumbent, state.params)
    return SolveResult(
        problem=state.problem.name,
        config=state.config,
        best_x=best.x.copy(),
        best_f=best.f,
        best_c=constraint_violation(best),
        evals=len(state.cache),
        iterations=state.k,
        stop_reason=stop,
        multipliers=multipliers,
        history=list(state.history),
        trace=trace,
    )
