"""Merit function, constraint-violation measure and multiplier estimates.

The inequality constraints are split once, at the starting point, into a
barrier group (strictly satisfied at x0, handled by a logarithmic barrier)
and an exterior group (violated or active at x0, handled together with the
equalities by a power penalty).  The merit of a point x is

    Z(x) = f(x) - rho_log * sum_{l in G_log} ln(-g_l(x))
         + (1/rho_ext) * ( sum_{l in G_ext} max(g_l(x), 0)^nu + sum_j |h_j(x)|^nu )

when x satisfies the linear constraints and g_l(x) < 0 for every barrier
index, and +inf otherwise.  The barrier weight rho_log and the exterior
weight rho_ext are independent knobs, updated separately by the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .errors import DomainError, InvalidConfig
from .problems import Evaluation

# Barrier slacks below this underflow threshold count as boundary hits.
_TINY = float(np.finfo(float).tiny)

FINITE = "finite"
OUTSIDE_X = "outside_X"
LOG_BOUNDARY = "log_boundary_or_violated"


def partition_inequalities(g_at_x0: np.ndarray) -> tuple[frozenset[int], frozenset[int]]:
    """Split inequality indices by their value at the starting point.

    Index l goes to the barrier group iff g_l(x0) < 0 strictly; an exactly
    active constraint goes to the exterior group.  Indices are 0-based.
    """
    g_at_x0 = np.asarray(g_at_x0, dtype=float)
    g_log = frozenset(int(i) for i in np.nonzero(g_at_x0 < 0)[0])
    g_ext = frozenset(range(g_at_x0.size)) - g_log
    return g_log, g_ext


@dataclass(frozen=True)
class MeritParams:
    """Constraint partition plus the penalty-barrier parameters.

    ``rho_log`` weights the barrier, ``rho_ext`` the exterior penalty;
    ``nu`` is the smoothing exponent, ``gamma`` the sufficient-decrease
    constant, ``beta`` and ``zeta`` drive the update criteria and the
    multiplicative cut applied on each update.
    """

    g_log: frozenset
    g_ext: frozenset
    rho_log: float
    rho_ext: float
    nu: float = 2.0
    gamma: float = 1e-9
    beta: float = 1.0 + 1e-9
    zeta: float = 1e-2
    _log_idx: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    _ext_idx: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        m = len(self.g_log) + len(self.g_ext)
        if self.g_log & self.g_ext:
            raise InvalidConfig("barrier and exterior groups overlap")
        if (self.g_log | self.g_ext) != frozenset(range(m)):
            raise InvalidConfig("groups must partition 0..m-1")
        if not (self.rho_log > 0 and self.rho_ext > 0):
            raise InvalidConfig("penalty parameters must be positive")
        if not (1 < self.nu <= 2):
            raise InvalidConfig("nu must lie in (1, 2]")
        if not self.gamma > 0:
            raise InvalidConfig("gamma must be positive")
        if not self.beta > 1:
            raise InvalidConfig("beta must exceed 1")
        if not (0 < self.zeta < 1):
            raise InvalidConfig("zeta must lie in (0, 1)")
        object.__setattr__(self, "_log_idx",
                           np.array(sorted(self.g_log), dtype=int))
        object.__setattr__(self, "_ext_idx",
                           np.array(sorted(self.g_ext), dtype=int))

    def with_rho(self, rho_log: float | None = None,
                 rho_ext: float | None = None) -> "MeritParams":
        return replace(
            self,
            rho_log=self.rho_log if rho_log is None else rho_log,
            rho_ext=self.rho_ext if rho_ext is None else rho_ext,
        )


@dataclass(frozen=True)
class MeritValue:
    value: float
    finite_reason: str

    @property
    def finite(self) -> bool:
        return self.finite_reason == FINITE


def merit_components(f: float, g: np.ndarray, h: np.ndarray, in_X: bool,
                     params: MeritParams) -> MeritValue:
    """Merit from raw values; the worker behind :func:`merit_value`."""
    if not in_X:
        return MeritValue(np.inf, OUTSIDE_X)
    slack = -g[params._log_idx]
    # strictly inside the barrier region, with an underflow guard so the log
    # never produces a non-finite float
    if slack.size and np.min(slack) < _TINY:
        return MeritValue(np.inf, LOG_BOUNDARY)
    z = f
    if slack.size:
        z -= params.rho_log * float(np.sum(np.log(slack)))
    ext = 0.0
    if params._ext_idx.size:
        ext += float(np.sum(np.maximum(g[params._ext_idx], 0.0) ** params.nu))
    if h.size:
        ext += float(np.sum(np.abs(h) ** params.nu))
    z += ext / params.rho_ext
    if not np.isfinite(z):
        # overflow in the penalty terms; treat like a blown-up violation
        return MeritValue(np.inf, LOG_BOUNDARY)
    return MeritValue(z, FINITE)


def merit_value(evaluation: Evaluation, params: MeritParams) -> MeritValue:
    """Merit of an evaluation under the current parameters."""
    return merit_components(evaluation.f, evaluation.g, evaluation.h,
                            evaluation.in_X, params)


def constraint_violation(evaluation: Evaluation) -> float:
    """Aggregate nonlinear violation: sum of positive g parts and |h|."""
    c = 0.0
    if evaluation.g.size:
        c += float(np.sum(np.maximum(evaluation.g, 0.0)))
    if evaluation.h.size:
        c += float(np.sum(np.abs(evaluation.h)))
    return c


def g_min(evaluation: Evaluation, g_log: Iterable[int]) -> float:
    """Smallest |g_l| over the barrier group; +inf when the group is empty.

    Measures how close the point sits to the barrier boundary.  The +inf
    convention makes the penalty-update criteria collapse to their rho-only
    parts when no constraint is handled by the barrier.
    """
    idx = sorted(g_log)
    if not idx:
        return np.inf
    return float(np.min(np.abs(evaluation.g[np.array(idx, dtype=int)])))


def multiplier_estimates(evaluation: Evaluation,
                         params: MeritParams) -> tuple[np.ndarray, np.ndarray]:
    """Lagrange-multiplier estimates at a finite-merit point.

    Barrier constraints get rho_log / (-g_l); exterior constraints and
    equalities get nu * max(g_l, 0)^(nu-1) / rho_ext resp.
    nu * |h_j|^(nu-1) / rho_ext.  Equality multipliers are magnitudes; the
    estimate carries no sign information.
    """
    g = evaluation.g
    lam = np.zeros(g.size)
    if params._log_idx.size:
        slack = -g[params._log_idx]
        if np.any(slack <= 0):
            raise DomainError("barrier constraint active or violated; "
                              "multiplier estimate undefined")
        lam[params._log_idx] = params.rho_log / slack
    if params._ext_idx.size:
        lam[params._ext_idx] = (params.nu
                                * np.maximum(g[params._ext_idx], 0.0) ** (params.nu - 1)
                                / params.rho_ext)
    mu = params.nu * np.abs(evaluation.h) ** (params.nu - 1) / params.rho_ext
    return lam, mu
