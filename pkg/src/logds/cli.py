"""Command-line front end.

Verbs:
    solve           run one problem, print the JSON report on stdout
    bench           run a suite x solver-label grid, emit profile CSV/SVG
    compare         canned two-arm studies (linear handling / barrier handling)
    list-problems   show the registry

Exit codes: 0 success, 2 usage or problem errors, 3 internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .bench import SOLVER_LABELS, emit_all, run_suite
from .errors import LogdsError
from .problems import Problem
from .registry import SUITES, available_problems, load_problem_file, registry_lookup
from .solver import SolverConfig, solve

_CONFIG_FIELDS = {f.name: f.type for f in fields(SolverConfig)}

_STUDIES = {
    "linear": ("logds-penalty", "logds-conforming"),
    "barrier": ("logds-penalty", "extreme-barrier"),
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    o = parser.add_argument
    o("--max-evals", type=int, default=None)
    o("--alpha-min", type=float, default=None)
    o("--alpha0", type=float, default=None)
    o("--theta-alpha", type=float, default=None)
    o("--phi", type=float, default=None)
    o("--gamma", type=float, default=None)
    o("--nu", type=float, default=None)
    o("--beta", type=float, default=None)
    o("--zeta", type=float, default=None)
    o("--rho0-log", type=float, default=None)
    o("--eps-active", type=float, default=None)
    o("--linear-mode", choices=("penalty", "conforming"), default=None)
    o("--barrier-mode", choices=("logds", "extreme_barrier"), default=None)
    o("--no-search", action="store_const", const=True, default=None,
      help="disable the model-based search step")
    o("--config", type=Path, default=None, metavar="FILE",
      help="key=value file with SolverConfig fields; flags win over the file")
    o("--seedless", action="store_const", const=True, default=None,
      help="reserved; the solver has no randomness, so this flag is rejected")


def parse_config_file(path: Path) -> dict:
    """key=value lines, '#' comments; keys are SolverConfig field names."""
    out: dict = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or key not in _CONFIG_FIELDS:
            raise ValueError(f"bad config line {raw!r}")
        out[key] = _coerce_config_value(key, value)
    return out


def _coerce_config_value(key: str, value: str):
    if key == "max_evals":
        return int(value)
    if key in ("linear_mode", "barrier_mode"):
        return value
    if key == "search_enabled":
        if value not in ("true", "false"):
            raise ValueError(f"search_enabled must be true/false, got {value!r}")
        return value == "true"
    return float(value)


def build_config(args: argparse.Namespace) -> SolverConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    merged: dict = {}
    if args.config is not None:
        merged.update(parse_config_file(args.config))
    flag_map = {
        "max_evals": args.max_evals, "alpha_min": args.alpha_min,
        "alpha0": args.alpha0, "theta_alpha": args.theta_alpha,
        "phi": args.phi, "gamma": args.gamma, "nu": args.nu,
        "beta": args.beta, "zeta": args.zeta, "rho0_log": args.rho0_log,
        "eps_active": args.eps_active, "linear_mode": args.linear_mode,
        "barrier_mode": args.barrier_mode,
    }
    for key, value in flag_map.items():
        if value is not None:
            merged[key] = value
    if args.no_search:
        merged["search_enabled"] = False
    return SolverConfig(**merged)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logds",
        description="Derivative-free constrained optimisation via pattern "
                    "search on a penalty-barrier merit function.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem")
    p_solve.add_argument("--problem", default=None,
                         help="registered problem name")
    p_solve.add_argument("--problem-file", type=Path, default=None,
                         help="declarative problem file")
    _add_config_flags(p_solve)

    p_bench = sub.add_parser("bench", help="profile solvers over a suite")
    p_bench.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_bench.add_argument("--solvers", required=True,
                         help="comma-separated labels: "
                              + ", ".join(sorted(SOLVER_LABELS)))
    p_bench.add_argument("--out", type=Path, default=Path("bench_out"))
    _add_config_flags(p_bench)

    p_cmp = sub.add_parser("compare", help="two-arm comparison study")
    p_cmp.add_argument("--study", required=True, choices=sorted(_STUDIES),
                       help="linear: penalty vs conforming handling of "
                            "linear rows; barrier: merit vs extreme barrier")
    p_cmp.add_argument("--suite", default="hs2d", choices=sorted(SUITES))
    p_cmp.add_argument("--out", type=Path, default=Path("compare_out"))
    _add_config_flags(p_cmp)

    sub.add_parser("list-problems", help="list registered problems")
    return parser


def _reject_seedless(args: argparse.Namespace) -> None:
    if getattr(args, "seedless", None):
        raise LogdsError("--seedless is reserved: the solver is fully "
                         "deterministic and has no seed to drop")


def _load_problem(args: argparse.Namespace) -> Problem:
    if (args.problem is None) == (args.problem_file is None):
        raise LogdsError("exactly one of --problem / --problem-file is required")
    if args.problem is not None:
        return registry_lookup(args.problem)
    return load_problem_file(args.problem_file)


def _cmd_solve(args: argparse.Namespace) -> int:
    _reject_seedless(args)
    problem = _load_problem(args)
    result = solve(problem, build_config(args))
    json.dump(result.to_json_dict(), sys.stdout)
    sys.stdout.write("\n")
    return 0


def _run_bench(suite: str, labels: list[str], args: argparse.Namespace,
               outdir: Path) -> int:
    for label in labels:
        if label not in SOLVER_LABELS:
            raise LogdsError(f"unknown solver label {label!r}; known: "
                             + ", ".join(sorted(SOLVER_LABELS)))
    overrides = {k: v for k, v in _config_dict(args).items()}
    histories = run_suite(suite, labels, overrides, outdir=outdir)
    written = emit_all(histories, outdir)
    for path in written:
        print(path)
    return 0


def _config_dict(args: argparse.Namespace) -> dict:
    from dataclasses import asdict
    return asdict(build_config(args))


def _cmd_bench(args: argparse.Namespace) -> int:
    _reject_seedless(args)
    labels = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if not labels:
        raise LogdsError("--solvers needs at least one label")
    return _run_bench(args.suite, labels, args, args.out)


def _cmd_compare(args: argparse.Namespace) -> int:
    _reject_seedless(args)
    return _run_bench(args.suite, list(_STUDIES[args.study]), args, args.out)


def _cmd_list(_args: argparse.Namespace) -> int:
    for name in available_problems():
        p = registry_lookup(name)
        print(f"{name:12s} n={p.n} m={p.m} p={p.p}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "compare": _cmd_compare,
        "list-problems": _cmd_list,
    }
    try:
        return handlers[args.verb](args)
    except (LogdsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
