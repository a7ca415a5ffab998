"""Simplex gradients of the merit and the poll-order heuristic built on them.

A simplex gradient is the least-squares linear fit to merit differences over
nearby cached points.  It serves as an ascent indicator only: polling first
along the direction making the largest angle with it tends to find descent
early, which pays off under opportunistic polling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .directions import DirectionSet

_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class AscentIndicator:
    vec: np.ndarray
    valid: bool


def simplex_gradient(center: np.ndarray, center_merit: float,
                     points: list[np.ndarray], merits: list[float]) -> AscentIndicator:
    """Least-squares gradient of merit differences around ``center``.

    Solves S^T gr ~= delta with S columns y_i - center and
    delta_i = Z(y_i) - Z(center).  Exact for affine data with a square
    nonsingular S; with fewer points than dimensions the minimum-norm
    solution is returned.  Fewer than two points, or a numerically
    rank-zero S, give an invalid indicator.
    """
    n = np.asarray(center).size
    if len(points) < 2:
        return AscentIndicator(np.zeros(n), False)
    s_t = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    delta = np.asarray(merits, dtype=float) - center_merit
    sv = np.linalg.svd(s_t, compute_uv=False)
    if sv[0] == 0.0 or np.sum(sv > _RANK_RTOL * sv[0]) < 1:
        return AscentIndicator(np.zeros(n), False)
    gr, *_ = np.linalg.lstsq(s_t, delta, rcond=None)
    return AscentIndicator(gr, True)


def order_poll_directions(dirs: DirectionSet,
                          ascent: AscentIndicator) -> np.ndarray:
    """Directions reordered by increasing cosine with the ascent indicator.

    The first direction makes the largest angle with the ascent vector
    (best descent guess first).  Invalid or zero indicators keep the
    original order; ties keep original relative order.
    """
    arr = dirs.dirs
    norm = np.linalg.norm(ascent.vec)
    if not ascent.valid or norm == 0.0:
        return arr.copy()
    # directions are unit norm, so the dot product orders like the cosine
    key = arr @ (ascent.vec / norm)
    order = np.argsort(key, kind="stable")
    return arr[order]
