"""Quadratic surrogate models and the model-based search step.

Models are built exclusively from cached evaluations; no problem evaluation
is ever spent on model building.  Depending on how many usable points sit
near the incumbent, the builder returns a minimum-Frobenius-norm model
(fewer points than quadratic coefficients), a plain interpolant (exactly as
many), or a least-squares regression model (more).  Per-constraint models
are combined analytically into a model of the merit function, which the
search step minimises inside a ball around the incumbent intersected with
the linear constraints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoisingFailure
from .merit import MeritParams, _TINY
from .problems import EvalCache, Problem, nearby_points

# Ball/sample radius as a multiple of the step size, and the cap on extra
# regression points beyond the quadratic coefficient count.
RADIUS_FACTOR = 2.0
CAP_EXTRA = 10
_COND_LIMIT = 1e14
_INNER_ITERS = 50


@dataclass(frozen=True)
class QuadraticModel:
    """m(x) = c + grad.(x - center) + 0.5 (x - center)^T hess (x - center)."""

    c: float
    grad: np.ndarray
    hess: np.ndarray
    center: np.ndarray
    kind: str  # "interpolation" | "min_frobenius" | "regression"

    def value(self, x: np.ndarray) -> float:
        s = np.asarray(x, dtype=float) - self.center
        return float(self.c + self.grad @ s + 0.5 * s @ self.hess @ s)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        s = np.asarray(x, dtype=float) - self.center
        return self.grad + self.hess @ s


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray    # (k, n)
    values_f: np.ndarray  # (k,)
    values_g: np.ndarray  # (k, m)
    values_h: np.ndarray  # (k, p)

    def __len__(self) -> int:
        return self.points.shape[0]


def select_sample_set(cache: EvalCache, center: np.ndarray,
                      alpha: float) -> SampleSet:
    """Cached points within RADIUS_FACTOR * alpha of center, nearest first.

    Capped at (n+1)(n+2)/2 + CAP_EXTRA points.  Raw f, g, h values are used
    as stored: points that were infeasible for the merit still carry valid
    information about the underlying functions.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    center = np.asarray(center, dtype=float)
    n = center.size
    cap = (n + 1) * (n + 2) // 2 + CAP_EXTRA
    recs = nearby_points(cache, center, RADIUS_FACTOR * alpha)[:cap]
    if not recs:
        return SampleSet(np.zeros((0, n)), np.zeros(0),
                         np.zeros((0, 0)), np.zeros((0, 0)))
    return SampleSet(
        points=np.array([r.x for r in recs]),
        values_f=np.array([r.f for r in recs]),
        values_g=np.array([r.g for r in recs]),
        values_h=np.array([r.h for r in recs]),
    )


def _basis(shifted: np.ndarray) -> np.ndarray:
    """Rows phi(s) = [1, s, {s_i s_j}_{i<j}, {s_i^2 / 2}] for each sample."""
    k, n = shifted.shape
    cols = [np.ones((k, 1)), shifted]
    for i in range(n):
        for j in range(i, n):
            if i == j:
                cols.append(0.5 * shifted[:, i: i + 1] ** 2)
            else:
                cols.append(shifted[:, i: i + 1] * shifted[:, j: j + 1])
    return np.hstack(cols)


def _unpack(coef: np.ndarray, n: int) -> tuple[float, np.ndarray, np.ndarray]:
    c = float(coef[0])
    grad = coef[1: n + 1].copy()
    hess = np.zeros((n, n))
    k = n + 1
    for i in range(n):
        for j in range(i, n):
            hess[i, j] = hess[j, i] = coef[k]
            k += 1
    return c, grad, hess


def _solve_checked(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solve with a condition guard.

    One SVD serves both the conditioning estimate and the solve.
    """
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    if s[-1] == 0.0 or s[0] / s[-1] > _COND_LIMIT:
        raise PoisingFailure("sample set is not well poised")
    return vt.T @ ((u.T @ rhs) / s)


def build_quadratic_model(points: np.ndarray, values: np.ndarray,
                          center: np.ndarray) -> QuadraticModel:
    """Fit a quadratic to sample values, choosing the regime by point count.

    Requires at least n + 1 points (callers skip modeling below that).
    Raises :class:`PoisingFailure` when the underlying linear system has a
    condition estimate above 1e14.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float)
    center = np.asarray(center, dtype=float)
    k, n = points.shape
    if k < n + 1:
        raise ValueError(f"need at least {n + 1} points, got {k}")
    q = (n + 1) * (n + 2) // 2
    shifted = points - center
    if k < q:
        return _min_frobenius(shifted, values, center)
    phi = _basis(shifted)
    coef = _solve_checked(phi, values)
    kind = "interpolation" if k == q else "regression"
    c, grad, hess = _unpack(coef, n)
    return QuadraticModel(c, grad, hess, center.copy(), kind)


def _min_frobenius(shifted: np.ndarray, values: np.ndarray,
                   center: np.ndarray) -> QuadraticModel:
    # Least-norm Hessian subject to interpolation: with H = 0.5 sum_i l_i s_i
    # s_i^T the interpolation conditions become a KKT system in the
    # multipliers l and the affine coefficients (c, g).
    k, n = shifted.shape
    gram = shifted @ shifted.T
    quad = 0.25 * gram ** 2
    lin = np.hstack([np.ones((k, 1)), shifted])
    kkt = np.block([
        [quad, lin],
        [lin.T, np.zeros((n + 1, n + 1))],
    ])
    sol = _solve_checked(kkt, np.concatenate([values, np.zeros(n + 1)]))
    lam = sol[:k]
    c = float(sol[k])
    grad = sol[k + 1:].copy()
    hess = 0.5 * (shifted.T * lam) @ shifted
    hess = 0.5 * (hess + hess.T)  # kill rounding asymmetry
    return QuadraticModel(c, grad, hess, center.copy(), "min_frobenius")


class _ModelStack:
    """Coefficient arrays of several quadratic models, evaluated in one shot."""

    def __init__(self, models: list[QuadraticModel]):
        self.size = len(models)
        if self.size:
            self.c = np.array([m.c for m in models])
            self.grad = np.array([m.grad for m in models])
            self.hess = np.array([m.hess for m in models])
            self.center = np.array([m.center for m in models])

    def values(self, x: np.ndarray) -> np.ndarray:
        s = x - self.center
        hs = np.einsum("ijk,ik->ij", self.hess, s)
        return self.c + np.einsum("ij,ij->i", self.grad, s) \
            + 0.5 * np.einsum("ij,ij->i", s, hs)

    def gradients(self, x: np.ndarray) -> np.ndarray:
        s = x - self.center
        return self.grad + np.einsum("ijk,ik->ij", self.hess, s)


class MeritModel:
    """Analytic combination of per-function models into a merit surrogate.

    Evaluates to +inf wherever a barrier-group model is nonnegative, mirroring
    the true merit's shape.  ``params=None`` collapses to the objective model
    alone (extreme-barrier searches model only f).
    """

    def __init__(self, mf: QuadraticModel, mg: list[QuadraticModel],
                 mh: list[QuadraticModel], params: MeritParams | None):
        if params is not None:
            m = len(params.g_log) + len(params.g_ext)
            if len(mg) != m:
                raise ValueError(f"expected {m} inequality models, got {len(mg)}")
        self.mf = mf
        self.mg = mg
        self.mh = mh
        self.params = params
        self._gs = _ModelStack(mg)
        self._hs = _ModelStack(mh)

    def __call__(self, x: np.ndarray) -> float:
        z = self.mf.value(x)
        if self.params is None:
            return z
        p = self.params
        ext = 0.0
        if self._gs.size:
            u = self._gs.values(x)
            slack = -u[p._log_idx]
            if slack.size:
                if np.min(slack) < _TINY:
                    return np.inf
                z -= p.rho_log * float(np.sum(np.log(slack)))
            if p._ext_idx.size:
                ext += float(np.sum(np.maximum(u[p._ext_idx], 0.0) ** p.nu))
        if self._hs.size:
            ext += float(np.sum(np.abs(self._hs.values(x)) ** p.nu))
        z += ext / p.rho_ext
        return z if np.isfinite(z) else np.inf

    def gradient(self, x: np.ndarray) -> np.ndarray:
        gr = self.mf.gradient(x)
        if self.params is None:
            return gr
        p = self.params
        if self._gs.size:
            u = self._gs.values(x)
            du = self._gs.gradients(x)
            if p._log_idx.size:
                gr = gr + p.rho_log * np.sum(
                    du[p._log_idx] / (-u[p._log_idx])[:, None], axis=0)
            if p._ext_idx.size:
                w = p.nu * np.maximum(u[p._ext_idx], 0.0) ** (p.nu - 1) / p.rho_ext
                gr = gr + w @ du[p._ext_idx]
        if self._hs.size:
            v = self._hs.values(x)
            w = p.nu * np.abs(v) ** (p.nu - 1) * np.sign(v) / p.rho_ext
            gr = gr + w @ self._hs.gradients(x)
        return gr


def assemble_merit_model(mf: QuadraticModel, mg: list[QuadraticModel],
                         mh: list[QuadraticModel],
                         params: MeritParams | None) -> MeritModel:
    return MeritModel(mf, mg, mh, params)


def _pull_feasible(problem: Problem, anchor: np.ndarray,
                   y: np.ndarray) -> np.ndarray:
    """Shrink y toward a feasible anchor until the linear rows hold."""
    if problem.linear_feasible(y):
        return y
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if problem.linear_feasible(anchor + mid * (y - anchor)):
            lo = mid
        else:
            hi = mid
    return anchor + lo * (y - anchor)


def search_step(problem: Problem, cache: EvalCache, x: np.ndarray,
                alpha: float, params: MeritParams | None) -> np.ndarray | None:
    """Propose a trial point by minimising the merit model near x.

    Builds models from cached points within RADIUS_FACTOR * alpha of x and
    runs a projected-gradient descent (Armijo backtracking, bounded inner
    iterations) over the ball of that radius intersected with the linear
    constraints.  Spends no problem evaluations.  Returns None whenever
    modeling or minimisation cannot produce a usable candidate.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    sample = select_sample_set(cache, x, alpha)
    if len(sample) < n + 1:
        return None
    try:
        mf = build_quadratic_model(sample.points, sample.values_f, x)
        mg: list[QuadraticModel] = []
        mh: list[QuadraticModel] = []
        if params is not None:
            mg = [build_quadratic_model(sample.points, sample.values_g[:, j], x)
                  for j in range(sample.values_g.shape[1])]
            mh = [build_quadratic_model(sample.points, sample.values_h[:, j], x)
                  for j in range(sample.values_h.shape[1])]
    except PoisingFailure:
        return None
    model = assemble_merit_model(mf, mg, mh, params)

    radius = RADIUS_FACTOR * alpha
    z = x.copy()
    fz = model(z)
    if not np.isfinite(fz):
        return None
    f_start = fz
    step = None
    has_rows = problem.q > 0
    for _ in range(_INNER_ITERS):
        gr = model.gradient(z)
        gn = float(np.linalg.norm(gr))
        if gn <= 1e-14 * (1.0 + abs(fz)):
            break
        if step is None:
            step = radius / gn
        step = min(step, radius / gn)
        moved = False
        t = step
        for _ in range(25):
            y = np.clip(z - t * gr, problem.lower, problem.upper)
            offset = y - x
            dist = float(np.linalg.norm(offset))
            if dist > radius:
                y = x + offset * (radius / dist)
            if has_rows:
                y = _pull_feasible(problem, z, y)
            disp = float(np.linalg.norm(y - z))
            if disp <= 1e-16 * (1.0 + np.linalg.norm(z)):
                t *= 0.5
                continue
            fy = model(y)
            if np.isfinite(fy) and fy <= fz - 1e-4 / t * disp ** 2:
                gain = fz - fy
                z, fz = y, fy
                step = 2.0 * t
                moved = gain > 1e-14 * (1.0 + abs(fz))
                break
            t *= 0.5
        if not moved:
            break
    if fz >= f_start or np.linalg.norm(z - x) <= 1e-12:
        return None
    if not problem.linear_feasible(z):
        return None
    return z
