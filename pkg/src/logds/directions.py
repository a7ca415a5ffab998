"""Poll direction sets: the default set and cone-conforming sets.

Near a linear constraint the poll directions must positively span the
epsilon-tangent cone {d | A_active d <= 0}, otherwise the method can stall
against the boundary.  Directions are always unit norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateActiveSet, ZeroRow

# Rank decisions and cone-membership checks.
_RANK_RTOL = 1e-10
CONE_TOL = 1e-10


@dataclass(frozen=True)
class DirectionSet:
    """Rows of ``dirs`` are unit directions; provenance records how they
    were generated."""

    dirs: np.ndarray
    provenance: str  # "default" or "conforming"

    def __len__(self) -> int:
        return self.dirs.shape[0]


def scale_linear_rows(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalise each row of ``a x <= b`` to unit norm.

    Leaves the feasible set unchanged and makes the epsilon-activity test
    meaningful across differently scaled rows.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms == 0.0):
        raise ZeroRow("cannot scale a zero row")
    return a / norms[:, None], b / norms


def eps_active_set(a_bar: np.ndarray, b_bar: np.ndarray, x: np.ndarray,
                   eps: float) -> np.ndarray:
    """Indices of rows within ``eps`` of equality at x (rows pre-scaled)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    a_bar = np.atleast_2d(np.asarray(a_bar, dtype=float))
    b_bar = np.atleast_1d(np.asarray(b_bar, dtype=float))
    if a_bar.shape[0] == 0:
        return np.zeros(0, dtype=int)
    return np.nonzero(a_bar @ np.asarray(x, dtype=float) >= b_bar - eps)[0]


def default_directions(n: int) -> DirectionSet:
    """Normalised all-ones vector, its negation and the signed coordinate
    vectors; at most 2n + 2 directions after deduplication."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    ones = np.ones(n) / np.sqrt(n)
    cand = np.vstack([ones, -ones, np.eye(n), -np.eye(n)])
    return DirectionSet(_dedupe(cand), "default")


def conforming_directions(active_rows: np.ndarray, n: int) -> DirectionSet:
    """Unit generators of the cone {d | W d <= 0} for the active rows W.

    With W of full row rank k, the cone is the direct sum of the null space
    of W (spanned positively by plus/minus an orthonormal basis N) and the
    cone generated by the columns of -W^T (W W^T)^{-1}, each of which drives
    exactly one active constraint strictly feasible.  Linearly dependent
    active sets are rejected; degenerate cone generation is out of scope.
    """
    w = np.atleast_2d(np.asarray(active_rows, dtype=float))
    if w.shape[0] == 0 or w.size == 0:
        return default_directions(n)
    if w.shape[1] != n:
        raise ValueError(f"active rows have {w.shape[1]} columns, expected {n}")
    k = w.shape[0]
    u, s, vt = np.linalg.svd(w, full_matrices=True)
    rank = int(np.sum(s > _RANK_RTOL * s[0])) if s.size else 0
    if rank < k:
        raise DegenerateActiveSet(
            f"{k} active rows with rank {rank}; degenerate case unsupported")
    # rows of vt beyond the rank span null(W)
    null_basis = vt[rank:]
    gens = [null_basis, -null_basis] if null_basis.size else []
    inward = -w.T @ np.linalg.inv(w @ w.T)  # column i maps to W d = -e_i
    gens.append(inward.T)
    dirs = np.vstack(gens)
    dirs = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    return DirectionSet(_dedupe(dirs), "conforming")


def _dedupe(dirs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    kept: list[np.ndarray] = []
    for d in dirs:
        if not any(np.linalg.norm(d - e) <= tol for e in kept):
            kept.append(d)
    return np.array(kept)
