"""Built-in problem registry and the declarative problem-file loader.

The built-in suite re-encodes a desk-scale subset of the published
Hock-Schittkowski collection (formulas taken from their standard published
definitions) plus two small fixtures, TOY-CIRCLE and TOY-EQ.  Start points
published outside the variable bounds are projected onto the bounds, which is
the usual convention for solvers that keep bounds hard.

All callables are written with numpy operations on ``x[0] .. x[n-1]`` so they
broadcast over arrays of points; the test-suite oracles rely on that.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import UnknownProblem
from .problems import Problem

_REGISTRY: dict[str, Problem] = {}


def _register(problem: Problem) -> Problem:
    _REGISTRY[problem.name] = problem
    return problem


def registry_lookup(name: str) -> Problem:
    """Return the registered problem called ``name``."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownProblem(
            f"unknown problem {name!r}; known: {', '.join(sorted(_REGISTRY))}"
        ) from None


def available_problems() -> list[str]:
    return sorted(_REGISTRY)


# ---------------------------------------------------------------------------
# Fixtures

_register(Problem(
    name="TOY-CIRCLE", n=2,
    objective=lambda x: x[0] + x[1],
    ineq=(lambda x: x[0] ** 2 + x[1] ** 2 - 1,),
    lower=[-2, -2], upper=[2, 2], x0=[0, 0],
))

_register(Problem(
    name="TOY-EQ", n=2,
    objective=lambda x: x[0] ** 2 + x[1] ** 2,
    ineq=(lambda x: -x[0],),
    eq=(lambda x: x[0] + x[1] - 1,),
    lower=[-2, -2], upper=[2, 2], x0=[1, 1],
))


# ---------------------------------------------------------------------------
# Hock-Schittkowski subset.  Inequalities are stored in g(x) <= 0 form, i.e.
# the published "c(x) >= 0" constraints appear negated.  Where the published
# problem has no bound on a variable, a generous finite box is added so the
# feasible region is compact; every added bound is far from the optimizer.

_register(Problem(
    name="HS12", n=2,
    objective=lambda x: 0.5 * x[0] ** 2 + x[1] ** 2 - x[0] * x[1] - 7 * x[0] - 7 * x[1],
    ineq=(lambda x: 4 * x[0] ** 2 + x[1] ** 2 - 25,),
    lower=[-10, -10], upper=[10, 10], x0=[0, 0],
))

_register(Problem(
    name="HS13", n=2,
    objective=lambda x: (x[0] - 2) ** 2 + x[1] ** 2,
    ineq=(lambda x: x[1] - (1 - x[0]) ** 3,),
    lower=[0, 0], upper=[10, 10], x0=[0, 0],
))

_register(Problem(
    name="HS16", n=2,
    objective=lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2,
    ineq=(
        lambda x: -(x[0] + x[1] ** 2),
        lambda x: -(x[0] ** 2 + x[1]),
    ),
    lower=[-0.5, -10], upper=[0.5, 1], x0=[-0.5, 1],
))

_register(Problem(
    name="HS19", n=2,
    objective=lambda x: (x[0] - 10) ** 3 + (x[1] - 20) ** 3,
    ineq=(
        lambda x: 100 - (x[0] - 5) ** 2 - (x[1] - 5) ** 2,
        lambda x: (x[1] - 5) ** 2 + (x[0] - 6) ** 2 - 82.81,
    ),
    lower=[13, 0], upper=[100, 100], x0=[20.1, 5.84],
))

_register(Problem(
    name="HS20", n=2,
    objective=lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2,
    ineq=(
        lambda x: -(x[0] + x[1] ** 2),
        lambda x: -(x[0] ** 2 + x[1]),
        lambda x: 1 - x[0] ** 2 - x[1] ** 2,
    ),
    lower=[-0.5, -10], upper=[0.5, 10], x0=[-0.5, 1],
))

_register(Problem(
    name="HS21", n=2,
    objective=lambda x: 0.01 * x[0] ** 2 + x[1] ** 2 - 100,
    ineq=(lambda x: 10 - 10 * x[0] + x[1],),
    lower=[2, -50], upper=[50, 50], x0=[2, -1],
))

_register(Problem(
    name="HS23", n=2,
    objective=lambda x: x[0] ** 2 + x[1] ** 2,
    ineq=(
        lambda x: 1 - x[0] - x[1],
        lambda x: 1 - x[0] ** 2 - x[1] ** 2,
        lambda x: 9 - 9 * x[0] ** 2 - x[1] ** 2,
        lambda x: x[1] - x[0] ** 2,
        lambda x: x[0] - x[1] ** 2,
    ),
    lower=[-50, -50], upper=[50, 50], x0=[3, 1],
))

_register(Problem(
    name="HS30", n=3,
    objective=lambda x: x[0] ** 2 + x[1] ** 2 + x[2] ** 2,
    ineq=(lambda x: 1 - x[0] ** 2 - x[1] ** 2,),
    lower=[1, -10, -10], upper=[10, 10, 10], x0=[1, 1, 1],
))

_register(Problem(
    name="HS43", n=4,
    objective=lambda x: (x[0] ** 2 + x[1] ** 2 + 2 * x[2] ** 2 + x[3] ** 2
                         - 5 * x[0] - 5 * x[1] - 21 * x[2] + 7 * x[3]),
    ineq=(
        lambda x: (x[0] ** 2 + x[1] ** 2 + x[2] ** 2 + x[3] ** 2
                   + x[0] - x[1] + x[2] - x[3] - 8),
        lambda x: (x[0] ** 2 + 2 * x[1] ** 2 + x[2] ** 2 + 2 * x[3] ** 2
                   - x[0] - x[3] - 10),
        lambda x: (2 * x[0] ** 2 + x[1] ** 2 + x[2] ** 2
                   + 2 * x[0] - x[1] - x[3] - 5),
    ),
    lower=[-10] * 4, upper=[10] * 4, x0=[0, 0, 0, 0],
))

_register(Problem(
    name="HS65", n=3,
    objective=lambda x: ((x[0] - x[1]) ** 2 + (x[0] + x[1] - 10) ** 2 / 9
                         + (x[2] - 5) ** 2),
    ineq=(lambda x: x[0] ** 2 + x[1] ** 2 + x[2] ** 2 - 48,),
    lower=[-4.5, -4.5, -5], upper=[4.5, 4.5, 5], x0=[-4.5, 4.5, 0],
))


def _hs74_75(name: str, a: float) -> Problem:
    return Problem(
        name=name, n=4,
        objective=lambda x: (3 * x[0] + 1e-6 * x[0] ** 3
                             + 2 * x[1] + (2e-6 / 3) * x[1] ** 3),
        ineq=(
            lambda x: x[2] - x[3] - a,
            lambda x: x[3] - x[2] - a,
        ),
        eq=(
            lambda x: 1000 * np.sin(-x[2] - 0.25) + 1000 * np.sin(-x[3] - 0.25)
            + 894.8 - x[0],
            lambda x: 1000 * np.sin(x[2] - 0.25) + 1000 * np.sin(x[2] - x[3] - 0.25)
            + 894.8 - x[1],
            lambda x: 1000 * np.sin(x[3] - 0.25) + 1000 * np.sin(x[3] - x[2] - 0.25)
            + 1294.8,
        ),
        lower=[0, 0, -a, -a], upper=[1200, 1200, a, a], x0=[0, 0, 0, 0],
    )


_register(_hs74_75("HS74", 0.55))
_register(_hs74_75("HS75", 0.48))


SUITES: dict[str, tuple[str, ...]] = {
    "toy": ("TOY-CIRCLE", "TOY-EQ"),
    "hs2d": ("HS12", "HS13", "HS16", "HS19", "HS20", "HS21", "HS23"),
}
SUITES["all"] = SUITES["toy"] + SUITES["hs2d"] + ("HS30", "HS43", "HS65", "HS74", "HS75")


# ---------------------------------------------------------------------------
# Declarative problem files.
#
# One problem per file, blank lines and '#' comments ignored:
#
#   name  my-problem
#   n     2
#   lower -2 -2          # optional, 'inf'/'-inf' allowed
#   upper  2  2
#   x0    0 0
#   linrow 1 1 1.5       # row a . x <= b, coefficients then b (repeatable)
#   f  x1 + x2
#   g  x1^2 + x2^2 - 1   # inequality g <= 0 (repeatable)
#   h  x1 - x2           # equality  h = 0  (repeatable)
#
# Expressions use variables x1..xn, operators + - * / ^, and the functions
# sin cos exp log abs sqrt max.

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log,
    "abs": np.abs, "sqrt": np.sqrt, "max": np.maximum,
}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load,
)


def compile_expression(text: str, n: int):
    """Compile an expression string into a callable of the point vector."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from None
    var_names = {f"x{i + 1}" for i in range(n)}
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ValueError(
                f"disallowed construct {type(node).__name__} in {text!r}")
        if isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
                raise ValueError(f"unknown function call in {text!r}")
            if node.keywords:
                raise ValueError(f"keyword arguments not allowed in {text!r}")
        elif isinstance(node, ast.Name):
            if node.id not in var_names and node.id not in _FUNCS:
                raise ValueError(f"unknown name {node.id!r} in {text!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ValueError(f"non-numeric constant in {text!r}")
    code = compile(tree, "<expression>", "eval")

    def fn(x, _code=code, _n=n):
        names = {f"x{i + 1}": x[i] for i in range(_n)}
        names.update(_FUNCS)
        return eval(_code, {"__builtins__": {}}, names)

    return fn


def _parse_numbers(tokens: list[str]) -> list[float]:
    return [float(t) for t in tokens]


def load_problem_file(path) -> Problem:
    """Load a :class:`Problem` from the declarative text format above."""
    fields: dict[str, str] = {}
    g_exprs: list[str] = []
    h_exprs: list[str] = []
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key == "g":
                g_exprs.append(rest)
            elif key == "h":
                h_exprs.append(rest)
            elif key == "linrow":
                rows.append(_parse_numbers(rest.split()))
            elif key in ("name", "n", "lower", "upper", "x0", "f"):
                if key in fields:
                    raise ValueError(f"duplicate field {key!r} in {path}")
                fields[key] = rest
            else:
                raise ValueError(f"unknown field {key!r} in {path}")
    for required in ("name", "n", "x0", "f"):
        if required not in fields:
            raise ValueError(f"missing field {required!r} in {path}")
    n = int(fields["n"])
    lin_a = lin_b = None
    if rows:
        for row in rows:
            if len(row) != n + 1:
                raise ValueError(
                    f"linrow needs {n} coefficients plus the bound, got {row}")
        lin_a = np.array([r[:-1] for r in rows])
        lin_b = np.array([r[-1] for r in rows])
    return Problem(
        name=fields["name"],
        n=n,
        objective=compile_expression(fields["f"], n),
        ineq=tuple(compile_expression(e, n) for e in g_exprs),
        eq=tuple(compile_expression(e, n) for e in h_exprs),
        lin_a=lin_a,
        lin_b=lin_b,
        lower=_parse_numbers(fields["lower"].split()) if "lower" in fields else None,
        upper=_parse_numbers(fields["upper"].split()) if "upper" in fields else None,
        x0=_parse_numbers(fields["x0"].split()),
    )
