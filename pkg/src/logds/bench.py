"""Benchmark harness: run solver configurations over a suite, apply the
relative-accuracy convergence test, and emit performance/data profiles.

A run's history is its per-evaluation trace of (index, objective,
violation).  Points with violation above 1e-4 count as infeasible and carry
an infinite objective for profiling purposes.  Profiles are emitted as CSV
breakpoint lists plus rendered figures, one pair per accuracy level.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (DuplicateRun, EmptyTable, InfeasibleStart, InvalidBracket,
                     InvalidConfig)
from .registry import SUITES, registry_lookup
from .solver import FEAS_TOL, SolverConfig, solve

TAUS = (1e-1, 1e-3, 1e-5)

# Experimental arms: how each solver label maps onto a configuration.
SOLVER_LABELS = {
    "logds-penalty": {"barrier_mode": "logds", "linear_mode": "penalty"},
    "logds-conforming": {"barrier_mode": "logds", "linear_mode": "conforming"},
    "extreme-barrier": {"barrier_mode": "extreme_barrier"},
}


@dataclass(frozen=True)
class RunHistory:
    """Per-evaluation trace of one (problem, solver) run."""

    problem: str
    solver: str
    n: int
    trace: tuple  # ((eval_index, f, c), ...) with indices 1..len

    def __post_init__(self):
        object.__setattr__(self, "trace", tuple(tuple(t) for t in self.trace))
        for pos, (i, _, _) in enumerate(self.trace, start=1):
            if i != pos:
                raise ValueError("trace indices must be 1..len, strictly increasing")


@dataclass(frozen=True)
class ProfileTable:
    """Evaluations-to-convergence per (problem, solver); inf = unsolved."""

    problems: tuple
    solvers: tuple
    t: np.ndarray    # (|P|, |S|), entries >= 1 or inf
    n_p: np.ndarray  # (|P|,)
    tau: float


def best_feasible_curve(history: RunHistory) -> list[tuple[int, float]]:
    """Running best feasible objective: one entry per evaluation, +inf until
    the first point with violation <= 1e-4."""
    best = math.inf
    curve = []
    for i, f, c in history.trace:
        if c <= FEAS_TOL and f < best:
            best = f
        curve.append((i, best))
    return curve


def convergence_eval_count(curve: list[tuple[int, float]], f_m: float,
                           f_l: float, tau: float) -> float:
    """First evaluation index at which f_m - f >= (1 - tau)(f_m - f_l).

    Returns inf when the test is never met.  ``f_m`` is the worst and
    ``f_l`` the best feasible value over the solver pool.
    """
    if f_m < f_l:
        raise InvalidBracket(f"f_M={f_m} < f_L={f_l}")
    need = (1.0 - tau) * (f_m - f_l)
    for i, best in curve:
        if math.isfinite(best) and f_m - best >= need:
            return i
    return math.inf


def build_table(histories: list[RunHistory], tau: float) -> ProfileTable:
    """Assemble the evaluations-to-convergence matrix for one accuracy.

    The bracket per problem comes from the solvers' final best feasible
    values: f_L is their minimum, f_M their maximum (unsolved runs are
    excluded).  Problems where no solver produced a feasible point are
    dropped with a warning.
    """
    problems: list[str] = []
    solvers: list[str] = []
    runs: dict[tuple[str, str], RunHistory] = {}
    dims: dict[str, int] = {}
    for h in histories:
        key = (h.problem, h.solver)
        if key in runs:
            raise DuplicateRun(f"duplicate run for {key}")
        runs[key] = h
        if h.problem not in problems:
            problems.append(h.problem)
        if h.solver not in solvers:
            solvers.append(h.solver)
        dims[h.problem] = h.n
    for p in problems:
        for s in solvers:
            if (p, s) not in runs:
                raise ValueError(f"missing run for ({p}, {s})")

    kept: list[str] = []
    rows: list[list[float]] = []
    for p in problems:
        curves = {s: best_feasible_curve(runs[(p, s)]) for s in solvers}
        finals = [c[-1][1] for c in curves.values() if c and math.isfinite(c[-1][1])]
        if not finals:
            warnings.warn(f"problem {p}: no solver found a feasible point; dropped")
            continue
        f_l, f_m = min(finals), max(finals)
        rows.append([convergence_eval_count(curves[s], f_m, f_l, tau)
                     for s in solvers])
        kept.append(p)
    return ProfileTable(
        problems=tuple(kept),
        solvers=tuple(solvers),
        t=np.array(rows, dtype=float) if rows else np.zeros((0, len(solvers))),
        n_p=np.array([dims[p] for p in kept], dtype=int),
        tau=tau,
    )


Breakpoints = list[tuple[float, float]]


def performance_profile(table: ProfileTable) -> dict[str, Breakpoints]:
    """Right-continuous step functions rho_s(alpha) as breakpoint lists.

    The ratio of a run is its evaluation count over the problem's best
    count; a problem whose best count is infinite contributes to no solver.
    Every solver's list starts at alpha = 1.
    """
    if len(table.problems) == 0:
        raise EmptyTable("no problems in table")
    n_prob = len(table.problems)
    tmin = np.min(table.t, axis=1)
    out: dict[str, Breakpoints] = {}
    for j, s in enumerate(table.solvers):
        with np.errstate(invalid="ignore"):
            ratios = np.where(np.isfinite(tmin), table.t[:, j] / tmin, np.inf)
        finite = np.sort(ratios[np.isfinite(ratios)])
        points: Breakpoints = []
        if finite.size == 0 or finite[0] > 1.0:
            points.append((1.0, float(np.sum(finite <= 1.0)) / n_prob))
        for r in np.unique(finite):
            points.append((float(r), float(np.sum(finite <= r)) / n_prob))
        out[s] = points
    return out


def data_profile(table: ProfileTable) -> dict[str, Breakpoints]:
    """Step functions d_s(kappa): fraction of problems solved within
    kappa * (n_p + 1) evaluations."""
    if len(table.problems) == 0:
        raise EmptyTable("no problems in table")
    n_prob = len(table.problems)
    out: dict[str, Breakpoints] = {}
    for j, s in enumerate(table.solvers):
        kappas = table.t[:, j] / (table.n_p + 1.0)
        finite = np.sort(kappas[np.isfinite(kappas)])
        points: Breakpoints = [(0.0, 0.0)]
        for k in np.unique(finite):
            points.append((float(k), float(np.sum(finite <= k)) / n_prob))
        out[s] = points
    return out


def _tau_slug(tau: float) -> str:
    e = round(math.log10(tau))
    if 10.0 ** e == tau:
        return f"1e{e}"
    return repr(tau)


def write_profile_csv(profile: dict[str, Breakpoints], kind: str,
                      path: Path) -> None:
    """CSV schema: 'solver,alpha,rho' (performance) or 'solver,kappa,d'
    (data); one row per breakpoint, LF endings, '.' decimals."""
    header = "solver,alpha,rho" if kind == "perf" else "solver,kappa,d"
    lines = [header]
    for solver, pts in profile.items():
        for xv, yv in pts:
            lines.append(f"{solver},{xv!r},{yv!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_profile_csv(path: Path) -> dict[str, Breakpoints]:
    out: dict[str, Breakpoints] = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        solver, xv, yv = line.split(",")
        out.setdefault(solver, []).append((float(xv), float(yv)))
    return out


def _render_figure(profile: dict[str, Breakpoints], kind: str, tau: float,
                   path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "logds"  # reproducible figure ids
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for solver, pts in profile.items():
        if not pts:
            continue
        xs = [x for x, _ in pts]
        ys = [y for _, y in pts]
        # extend the last plateau so step plots do not end at the jump
        xs.append(xs[-1] * 2 if kind == "perf" else xs[-1] + 1.0)
        ys.append(ys[-1])
        ax.step(xs, ys, where="post", label=solver)
    if kind == "perf":
        ax.set_xscale("log", base=2)
        ax.set_xlabel("performance ratio")
        ax.set_ylabel("fraction of problems")
    else:
        ax.set_xlabel("budget in simplex gradients")
        ax.set_ylabel("fraction of problems")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    ax.set_title(f"tau = {tau:g}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit(perf: dict[str, Breakpoints], data: dict[str, Breakpoints],
         tau: float, outdir: Path) -> list[Path]:
    """Write one CSV and one SVG per profile kind for this accuracy level."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if not perf and not data:
        warnings.warn("empty profiles; nothing emitted")
        return []
    slug = _tau_slug(tau)
    written = []
    for kind, profile in (("perf", perf), ("data", data)):
        csv_path = outdir / f"{kind}_tau{slug}.csv"
        write_profile_csv(profile, kind, csv_path)
        svg_path = outdir / f"{kind}_tau{slug}.svg"
        _render_figure(profile, kind, tau, svg_path)
        written += [csv_path, svg_path]
    return written


def write_history_jsonl(history: RunHistory, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, f, c in history.trace:
            fh.write(json.dumps({"i": i, "f": f, "c": c}) + "\n")


def read_history_jsonl(path: Path, problem: str, solver: str,
                       n: int) -> RunHistory:
    trace = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            trace.append((rec["i"], rec["f"], rec["c"]))
    return RunHistory(problem=problem, solver=solver, n=n, trace=tuple(trace))


def run_pair(problem_name: str, label: str,
             overrides: dict | None = None) -> RunHistory:
    """Run one (problem, solver-label) pair; failures to start leave an
    empty trace so the pair still participates in table assembly."""
    if label not in SOLVER_LABELS:
        raise KeyError(f"unknown solver label {label!r}; "
                       f"known: {', '.join(sorted(SOLVER_LABELS))}")
    problem = registry_lookup(problem_name)
    cfg = SolverConfig(**{**(overrides or {}), **SOLVER_LABELS[label]})
    try:
        result = solve(problem, cfg)
        trace = tuple(result.trace)
    except (InfeasibleStart, InvalidConfig) as exc:
        warnings.warn(f"{problem_name}/{label}: {exc}")
        trace = ()
    return RunHistory(problem=problem_name, solver=label, n=problem.n,
                      trace=trace)


def run_suite(suite: str, labels: list[str],
              overrides: dict | None = None,
              outdir: Path | None = None) -> list[RunHistory]:
    """Run all (problem, label) pairs of a named suite, optionally
    persisting each trace as JSON lines under ``outdir``/runs."""
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; known: {', '.join(sorted(SUITES))}")
    histories = []
    for name in SUITES[suite]:
        for label in labels:
            h = run_pair(name, label, overrides)
            histories.append(h)
            if outdir is not None:
                rdir = Path(outdir) / "runs"
                rdir.mkdir(parents=True, exist_ok=True)
                write_history_jsonl(h, rdir / f"{name}__{label}.jsonl")
    return histories


def emit_all(histories: list[RunHistory], outdir: Path) -> list[Path]:
    """Tables, profiles and files for every standard accuracy level."""
    written: list[Path] = []
    for tau in TAUS:
        table = build_table(histories, tau)
        if len(table.problems) == 0:
            warnings.warn(f"tau={tau:g}: empty table; skipped")
            continue
        written += emit(performance_profile(table), data_profile(table),
                        tau, outdir)
    return written
