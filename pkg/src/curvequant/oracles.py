"""Brute-force reference solutions, independent of the Lloyd solver."""

from __future__ import annotations

import math

import numpy as np

from .codebook import Codebook
from .curve import DomainError
from .solver import QuantizationResult


def _dp_layer(prev: np.ndarray, span_cost: np.ndarray, monotone: bool, block: int = 256):
    size = len(prev)
    idx = np.arange(size)
    best = np.full(size, np.inf)
    arg = np.zeros(size, dtype=np.int64)
    start = 0
    for lo in range(0, size, block):
        j = idx[lo : lo + block]
        cols = idx[start : j[-1]]
        if len(cols) == 0:
            continue
        gap = j[:, None] - cols[None, :]
        cost = np.where(gap > 0, prev[cols][None, :] + span_cost[np.clip(gap, 0, None)], np.inf)
        k = np.argmin(cost, axis=1)
        best[j] = cost[np.arange(len(j)), k]
        arg[j] = cols[k]
        if monotone and np.isfinite(best[j[-1]]):
            # leftmost optimal breakpoints are non-decreasing in j for a convex span cost
            start = int(arg[j[-1]])
    return best, arg


def oracle_segment_dp(
    a: float, b: float, n: int, grid: int = 10_000, monotone: bool = True
) -> QuantizationResult:
    """Optimal ``n`` interval partition of uniform ``[a, b]`` over a breakpoint grid.

    On a line, optimal cells are intervals, so the problem reduces to
    choosing ``n - 1`` breakpoints among ``grid + 1`` equally spaced ones.  The
    cost of an interval is its mass times its variance about its own mean.
    The dynamic program is evaluated in row blocks; with ``monotone`` each
    block only scans breakpoints at or beyond the previous block's optimum,
    which is exact because the span cost is convex (Monge).
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if not a < b:
        raise DomainError("need a < b")
    if grid < 10 * n:
        raise DomainError(f"grid must be at least 10 n = {10 * n}")
    h = (b - a) / grid
    idx = np.arange(grid + 1)
    # interval cost depends only on the number of grid steps it spans
    span_cost = (h * idx) ** 3 / (12.0 * (b - a))
    best = span_cost.copy()
    best[0] = np.inf
    back = np.zeros((n, grid + 1), dtype=np.int64)
    for layer in range(1, n):
        best, back[layer] = _dp_layer(best, span_cost, monotone)
    cuts = [grid]
    for layer in range(n - 1, 0, -1):
        cuts.append(int(back[layer, cuts[-1]]))
    cuts.append(0)
    cuts = cuts[::-1]
    edges = a + h * np.asarray(cuts, dtype=float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return QuantizationResult(
        codebook=Codebook(np.column_stack([centers, np.zeros(n)])),
        distortion=float(best[grid]),
        cell_masses=np.diff(edges) / (b - a),
        iterations=0,
        converged=True,
        centroid_residual=0.0,
    )


def _equal_arcs(n: int, offset: float) -> tuple[np.ndarray, float]:
    theta = offset + 2 * math.pi * np.arange(n + 1) / n
    t0, t1 = theta[:-1], theta[1:]
    width = t1 - t0
    pts = np.column_stack([np.sin(t1) - np.sin(t0), np.cos(t0) - np.cos(t1)]) / width[:, None]
    # each arc: E|X|^2 = 1, so its share of the error is mass * (1 - |centroid|^2)
    err = float(np.sum(width / (2 * math.pi) * (1.0 - np.sum(pts**2, axis=1))))
    return pts, err


def oracle_circle_offset(n: int, offsets: int = 32, agree_tol: float = 1e-10) -> QuantizationResult:
    """Equal-arc partitions of the unit circle scanned over a rotation offset.

    The error must not depend on the offset; a spread above ``agree_tol``
    raises ``RuntimeError``.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    scans = [_equal_arcs(n, 2 * math.pi * s / (offsets * n)) for s in range(offsets)]
    errs = np.array([e for _, e in scans])
    if errs.max() - errs.min() > agree_tol:
        raise RuntimeError(f"offset scan disagrees by {errs.max() - errs.min():.3g}")
    k = int(np.argmin(errs))
    pts = scans[k][0]
    if n == 1:
        pts = np.zeros((1, 2))
    return QuantizationResult(
        codebook=Codebook(pts),
        distortion=float(errs[k]),
        cell_masses=np.full(n, 1.0 / n),
        iterations=0,
        converged=True,
        centroid_residual=0.0,
    )
