"""Pareto geometry for maximization problems.

Dominance, fast non-dominated sorting, exact hypervolume (recursive
exclusive-volume decomposition), hypervolume improvement, and reference-point
inference. All objectives are maximized; minimization problems are negated by
the caller before reaching this module.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from .validation import (
    DimensionMismatchError,
    ReferencePointError,
    as_matrix,
    as_vector,
)

__all__ = [
    "dominates",
    "pareto_rank",
    "hypervolume",
    "hvi",
    "infer_reference_point",
    "ReferencePointError",
]


def dominates(a, b) -> bool:
    """True iff ``a`` is >= ``b`` in every objective and > in at least one."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes differ: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def pareto_rank(Y) -> npt.NDArray[np.int64]:
    """Non-domination rank of each row of ``Y`` (rank 1 = non-dominated).

    Successive fronts are peeled off: rank k points are non-dominated once
    ranks < k are removed. Duplicate rows never dominate each other, so they
    always share a rank.
    """
    Y = as_matrix(Y, "Y", min_rows=1)
    n, L = Y.shape
    ge_all = np.ones((n, n), dtype=bool)
    gt_any = np.zeros((n, n), dtype=bool)
    for col in Y.T:
        ge_all &= col[:, None] >= col[None, :]
        gt_any |= col[:, None] > col[None, :]
    dom = ge_all & gt_any  # dom[i, j]: i dominates j
    n_dominators = dom.sum(axis=0)
    ranks = np.zeros(n, dtype=np.int64)
    remaining = np.ones(n, dtype=bool)
    rank = 0
    while remaining.any():
        rank += 1
        front = remaining & (n_dominators == 0)
        ranks[front] = rank
        n_dominators = n_dominators - dom[front].sum(axis=0)
        remaining &= ~front
    return ranks


def _prune_maximal(pts: np.ndarray) -> np.ndarray:
    """Keep one copy of each maximal (non-dominated) point."""
    if pts.shape[0] <= 1:
        return pts
    pts = np.unique(pts, axis=0)
    n = pts.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        others = pts[keep]
        dominated = np.any(
            np.all(others >= pts[i], axis=1) & np.any(others > pts[i], axis=1)
        )
        if dominated:
            keep[i] = False
    return pts[keep]


def _hv_2d(pts: np.ndarray) -> float:
    # Union of axis boxes anchored at the origin: sweep in descending x.
    order = np.argsort(-pts[:, 0])
    hv = 0.0
    y_max = 0.0
    for x, y in pts[order]:
        if y > y_max:
            hv += x * (y - y_max)
            y_max = y
    return hv


def _hv(pts: np.ndarray) -> float:
    """Hypervolume of boxes [0, p] for rows p > 0, by exclusive volumes.

    hv(S) = sum_i [ vol(box(p_i)) - hv(min(S_after_i, p_i)) ] with points
    processed in ascending order of the last coordinate. Every clipped point
    then shares its last coordinate with p_i, so the inner volume factors
    into that coordinate times an (L-1)-dimensional hypervolume — each level
    of the recursion drops one dimension.
    """
    n = pts.shape[0]
    if n == 0:
        return 0.0
    if n == 1:
        return float(np.prod(pts[0]))
    if pts.shape[1] == 1:
        return float(pts.max())
    if pts.shape[1] == 2:
        return _hv_2d(pts)
    if n == 2:
        a, b = pts
        return float(np.prod(a) + np.prod(b) - np.prod(np.minimum(a, b)))
    order = np.argsort(pts[:, -1])
    pts = pts[order]
    hv = 0.0
    for i in range(n):
        p = pts[i]
        rest = np.minimum(pts[i + 1 :, :-1], p[:-1])
        hv += float(np.prod(p)) - p[-1] * _hv(_prune_maximal(rest))
    return hv


def _check_reference(front: np.ndarray, r: np.ndarray, what: str) -> None:
    bad = ~np.all(front > r, axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise ReferencePointError(
            f"{what}[{i}] = {front[i].tolist()} does not strictly dominate "
            f"reference point {r.tolist()}"
        )


def hypervolume(front, r) -> float:
    """Exact hypervolume of ``front`` with respect to reference point ``r``.

    Every front point must strictly dominate ``r`` in all coordinates.
    Dominated and duplicate points are permitted (they contribute nothing).
    """
    front = as_matrix(front, "front")
    r = as_vector(r, "r")
    if front.shape[0] == 0:
        return 0.0
    if front.shape[1] != r.shape[0]:
        raise DimensionMismatchError(
            f"front has {front.shape[1]} objectives, r has {r.shape[0]}"
        )
    _check_reference(front, r, "front")
    return _hv(_prune_maximal(front - r))


def hvi(y_new, front, r) -> float:
    """Hypervolume improvement of ``y_new`` over ``front`` w.r.t. ``r``.

    Equals hypervolume(front + [y_new], r) - hypervolume(front, r), computed
    as the exclusive volume of ``y_new``: vol(box(r, y_new)) minus the
    hypervolume of the front clipped into that box. Exactly 0.0 when a front
    member dominates or equals ``y_new``.
    """
    front = as_matrix(front, "front")
    y = as_vector(y_new, "y_new")
    r = as_vector(r, "r")
    if front.shape[0] and front.shape[1] != y.shape[0]:
        raise DimensionMismatchError(
            f"front has {front.shape[1]} objectives, y_new has {y.shape[0]}"
        )
    if y.shape[0] != r.shape[0]:
        raise DimensionMismatchError(
            f"y_new has {y.shape[0]} objectives, r has {r.shape[0]}"
        )
    _check_reference(y[None, :], r, "y_new")
    if front.shape[0]:
        _check_reference(front, r, "front")
    w = y - r
    clipped = np.minimum(front - r, w)
    return float(np.prod(w)) - _hv(_prune_maximal(clipped))


def infer_reference_point(front) -> npt.NDArray[np.float64]:
    """Reference point slightly dominated by the nadir of ``front``.

    r_l = nadir_l - 0.1 * max(ideal_l - nadir_l, 1e-8), so every front point
    strictly dominates r even when an objective is constant across the front.
    """
    front = as_matrix(front, "front", min_rows=1)
    nadir = front.min(axis=0)
    ideal = front.max(axis=0)
    return nadir - 0.1 * np.maximum(ideal - nadir, 1e-8)
