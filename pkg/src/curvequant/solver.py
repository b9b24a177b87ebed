"""Numerical optimal quantizers on curve-supported measures.

The workhorse is Lloyd's fixed-point iteration (nearest-point assignment
followed by centroid update) with k-means++ multi-start.  Integrals over
Voronoi cells are exact: quadrature subintervals that straddle a cell
boundary are split at the point where the assignment switches, and every
piece of curve contributes its exact mass, mean and central second moment.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .codebook import Codebook
from .curve import CurveDistribution, DomainError, sub_moments

log = logging.getLogger(__name__)

InitMethod = Literal["kmeans++", "curve-uniform", "user"]
INIT_METHODS = ("kmeans++", "curve-uniform", "user")
COARSE_NODES = 1_024
COARSE_PER_POINT = 32


class EmptyCellError(RuntimeError):
    """A codebook point received no probability mass."""

    def __init__(self, cells: Sequence[int]):
        self.cells = list(cells)
        super().__init__(f"empty Voronoi cells: {self.cells}")


@dataclass(frozen=True)
class SolverConfig:
    n: int
    restarts: int = 64
    max_iters: int = 10_000
    rel_tol: float = 1e-12
    seed: int = 0
    init: InitMethod = "kmeans++"
    init_codebook: Codebook | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if self.max_iters < 0:
            raise DomainError("max_iters must be non-negative")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.init not in INIT_METHODS:
            raise DomainError(f"init must be one of {INIT_METHODS}")
        if self.init == "user":
            if self.init_codebook is None:
                raise DomainError("init='user' needs init_codebook")
            if self.init_codebook.n != self.n:
                raise DomainError("init_codebook size differs from n")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "rel_tol": self.rel_tol,
            "seed": self.seed,
            "init": self.init,
            "init_codebook": None if self.init_codebook is None else self.init_codebook.tolist(),
        }


@dataclass(frozen=True, eq=False)
class QuantizationResult:
    codebook: Codebook
    distortion: float
    cell_masses: np.ndarray
    iterations: int
    converged: bool
    centroid_residual: float
    history: tuple[float, ...] = field(repr=False, default=())
    restart: int = 0
    seed: int | None = None

    def to_json(self) -> dict:
        return {
            "n": self.codebook.n,
            "points": [[float(f"{x:.17g}"), float(f"{y:.17g}")] for x, y in self.codebook.points],
            "distortion": float(f"{self.distortion:.17g}"),
            "cell_masses": [float(f"{m:.17g}") for m in self.cell_masses],
            "centroid_residual": float(f"{self.centroid_residual:.17g}"),
            "iterations": self.iterations,
            "converged": self.converged,
            "restart": self.restart,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class Partition:
    """Curve cut along the Voronoi boundaries of a codebook.

    Quadrature subintervals lying inside one cell are kept whole (``whole``
    mask, cell ``labels``); those crossing a boundary are replaced by split
    atoms.  ``sums`` holds, per cell, the mass and the first and second
    moments about ``dist.center``.  ``switches`` lists
    ``(piece, local arc length, i, j)`` for every point where the nearest
    codebook index changes from ``i`` to ``j`` walking along the curve.
    """

    dist: CurveDistribution
    points: np.ndarray
    labels: np.ndarray
    whole: np.ndarray
    split_cell: np.ndarray
    split_mass: np.ndarray
    split_mean: np.ndarray
    split_var: np.ndarray
    sums: np.ndarray
    switches: list[tuple[int, float, int, int]]

    @property
    def n(self) -> int:
        return len(self.points)

    def cell_masses(self) -> np.ndarray:
        return self.sums[:, 0].copy()

    def distortion(self) -> float:
        c = self.points - self.dist.center
        s0, s1, s2 = self.sums[:, 0], self.sums[:, 1:3], self.sums[:, 3]
        per_cell = s2 - 2.0 * np.einsum("ij,ij->i", c, s1) + np.einsum("ij,ij->i", c, c) * s0
        return float(max(per_cell.sum(), 0.0))

    def atoms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(cell, mass, mean, var)`` for every atom of the partition."""
        d, w = self.dist, self.whole
        return (
            np.concatenate([self.labels[w], self.split_cell]),
            np.concatenate([d.masses[w], self.split_mass]),
            np.concatenate([d.means[w], self.split_mean]),
            np.concatenate([d.variances[w], self.split_var]),
        )

    def contributions(self) -> tuple[np.ndarray, np.ndarray]:
        """Atom means and their contribution to the distortion."""
        cell, mass, mean, var = self.atoms()
        gap = mean - self.points[cell]
        return mean, mass * (var + np.einsum("ij,ij->i", gap, gap))


def _points(cb) -> np.ndarray:
    if isinstance(cb, Codebook):
        return np.asarray(cb.points)
    pts = np.asarray(cb, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise DomainError("codebook is empty")
    return pts


def _nearest(x: np.ndarray, pts: np.ndarray) -> np.ndarray:
    # |x|^2 is common to every row, so it does not affect the argmin
    score = (-2.0 * pts) @ x.T + np.einsum("ij,ij->i", pts, pts)[:, None]
    return np.argmin(score, axis=0)


def _bisector_crossing(curve, piece, u0, u1, ci, cj):
    """Local arc length in [u0, u1] where codes ci and cj are equidistant.

    The squared-distance difference is affine in arc length on a line piece,
    so the interpolated root is exact there; arcs get a few Newton steps.
    """
    d = cj - ci
    const = np.einsum("ij,ij->i", ci, ci) - np.einsum("ij,ij->i", cj, cj)

    def g(v):
        return 2.0 * np.einsum("ij,ij->i", curve.points(piece, v), d) + const

    ga, gb = g(u0), g(u1)
    denom = gb - ga
    ok = denom > 0
    frac = np.where(ok, -ga / np.where(ok, denom, 1.0), 0.5)
    v = u0 + np.clip(frac, 0.0, 1.0) * (u1 - u0)
    if curve.has_arcs:
        for _ in range(3):
            slope = 2.0 * np.einsum("ij,ij->i", curve.tangents(piece, v), d)
            nz = slope != 0
            v = np.clip(v - np.where(nz, g(v) / np.where(nz, slope, 1.0), 0.0), u0, u1)
    return v


def partition(dist: CurveDistribution, cb) -> Partition:
    """Split the curve into exact Voronoi atoms for codebook ``cb``."""
    pts = _points(cb)
    q = dist.quadrature
    edge_label = _nearest(q.edges, pts)
    lab_l = edge_label[q.left]
    lab_r = edge_label[q.right]
    whole = lab_l == lab_r
    switches: list[tuple[int, float, int, int]] = []

    todo = np.flatnonzero(~whole)
    piece = q.piece[todo]
    u0 = q.lo[todo].copy()
    u1 = q.hi[todo].copy()
    li = lab_l[todo]
    lj = lab_r[todo]
    pending_piece, pending_u0, pending_u1, pending_i = [], [], [], []
    for _ in range(64):
        if len(piece) == 0:
            break
        ustar = _bisector_crossing(dist.curve, piece, u0, u1, pts[li], pts[lj])
        at = dist.curve.points(piece, ustar)
        d2 = np.sum((at[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        best = np.argmin(d2, axis=1)
        dij = np.minimum(d2[np.arange(len(piece)), li], d2[np.arange(len(piece)), lj])
        ok = d2[np.arange(len(piece)), best] >= dij - 1e-14 * (1.0 + dij)
        # accepted: [u0, u*] belongs to i and [u*, u1] to j
        for sel_u0, sel_u1, lab in ((u0, ustar, li), (ustar, u1, lj)):
            pending_piece.append(piece[ok])
            pending_u0.append(sel_u0[ok])
            pending_u1.append(sel_u1[ok])
            pending_i.append(lab[ok])
        switches.extend(zip(piece[ok].tolist(), ustar[ok].tolist(), li[ok].tolist(), lj[ok].tolist()))
        # a third cell k sits inside the interval: recurse on both halves
        bad = ~ok
        k = best[bad]
        piece = np.concatenate([piece[bad], piece[bad]])
        u0, u1 = np.concatenate([u0[bad], ustar[bad]]), np.concatenate([ustar[bad], u1[bad]])
        li, lj = np.concatenate([li[bad], k]), np.concatenate([k, lj[bad]])
    if len(piece):
        raise RuntimeError("could not resolve Voronoi boundaries inside a subinterval")

    n = len(pts)
    table = dist.moment_table
    sums = np.column_stack([np.bincount(lab_l, weights=row, minlength=n) for row in table])
    if len(todo):
        sums -= np.column_stack(
            [np.bincount(lab_l[todo], weights=row[todo], minlength=n) for row in table]
        )
    if pending_piece:
        sp = np.concatenate(pending_piece)
        s0 = np.concatenate(pending_u0)
        s1 = np.concatenate(pending_u1)
        keep = s1 > s0
        sp, s0, s1 = sp[keep], s0[keep], s1[keep]
        lab = np.concatenate(pending_i)[keep]
        offsets = np.concatenate([[0.0], dist.curve.cumulative_lengths[:-1]])
        mass = dist.density_at(offsets[sp] + 0.5 * (s0 + s1)) * (s1 - s0)
        mean, var = sub_moments(dist.curve, sp, s0, s1)
        rel = mean - dist.center
        extra = np.column_stack([mass, mass * rel[:, 0], mass * rel[:, 1], mass * (var + np.sum(rel**2, axis=1))])
        sums += np.column_stack([np.bincount(lab, weights=extra[:, c], minlength=n) for c in range(4)])
    else:
        lab = np.empty(0, dtype=int)
        mass = var = np.empty(0)
        mean = np.empty((0, 2))

    switches.sort()
    return Partition(
        dist=dist,
        points=pts,
        labels=lab_l,
        whole=whole,
        split_cell=lab,
        split_mass=mass,
        split_mean=mean,
        split_var=var,
        sums=sums,
        switches=switches,
    )


def distortion(dist: CurveDistribution, cb) -> float:
    """Expected squared distance from a ``dist``-distributed point to ``cb``."""
    return partition(dist, cb).distortion()


def voronoi_assign(dist: CurveDistribution, cb) -> np.ndarray:
    """Index of the nearest codebook point for every quadrature node.

    Ties go to the lowest index.
    """
    return _nearest(dist.node_points, _points(cb))


def centroids(dist: CurveDistribution, assignment) -> np.ndarray:
    """Conditional means of the measure over each cell of ``assignment``.

    ``assignment`` is either a :class:`Partition` (exact cells) or an array of
    node labels such as returned by :func:`voronoi_assign`, in which case each
    quadrature subinterval counts wholly toward its node's cell.  Returns an
    ``(n, 2)`` array; raises :class:`EmptyCellError` if a cell has no mass.
    """
    if isinstance(assignment, Partition):
        w = assignment.sums[:, 0]
        first = assignment.sums[:, 1:3]
        offset = dist.center
    else:
        cell = np.asarray(assignment, dtype=int)
        n = int(cell.max()) + 1
        w = np.bincount(cell, weights=dist.masses, minlength=n)
        first = np.column_stack(
            [np.bincount(cell, weights=dist.masses * dist.means[:, c], minlength=n) for c in range(2)]
        )
        offset = 0.0
    empty = np.flatnonzero(w <= 0)
    if len(empty):
        raise EmptyCellError(empty.tolist())
    return first / w[:, None] + offset


def verify_centroid_condition(dist: CurveDistribution, cb) -> float:
    """Largest distance between a codebook point and the centroid of its cell.

    An empty cell counts as an infinite residual.
    """
    part = partition(dist, cb)
    try:
        cent = centroids(dist, part)
    except EmptyCellError:
        return math.inf
    return float(np.max(np.linalg.norm(cent - part.points, axis=1)))


def canonical_residuals(dist: CurveDistribution, cb) -> list[float]:
    """Equidistance residuals at every point where the Voronoi cell changes.

    At a switch point ``d`` between cells of ``p`` and ``q`` the residual is
    ``| |p - d|^2 - |q - d|^2 |``.
    """
    pts = _points(cb)
    if len(pts) < 2:
        raise DomainError("canonical residuals need at least two points")
    part = partition(dist, pts)
    out = []
    for k, u, i, j in part.switches:
        d = dist.curve.pieces[k].point(u)
        out.append(abs(float(np.sum((pts[i] - d) ** 2) - np.sum((pts[j] - d) ** 2))))
    return out


def switch_points(dist: CurveDistribution, cb) -> np.ndarray:
    """Global arc lengths at which the nearest codebook point changes."""
    offsets = np.concatenate([[0.0], dist.curve.cumulative_lengths[:-1]])
    return np.array([offsets[k] + u for k, u, _, _ in partition(dist, cb).switches])


def _repair(part: Partition, empty: Sequence[int]) -> np.ndarray:
    pts = part.points.copy()
    means, contrib = part.contributions()
    order = np.argsort(-contrib, kind="stable")
    used = 0
    for idx in empty:
        while True:
            cand = means[order[used]]
            used += 1
            if np.min(np.linalg.norm(pts - cand, axis=1)) > 1e-12:
                break
        pts[idx] = cand
    return pts


def lloyd_run(
    dist: CurveDistribution,
    init,
    max_iters: int = 10_000,
    rel_tol: float = 1e-12,
) -> QuantizationResult:
    """Single Lloyd descent from ``init``.

    Stops once the relative decrease of the distortion over one
    (assign, centroid) sweep drops below ``rel_tol``.  ``history`` records the
    distortion of the initial codebook and after every sweep.
    """
    pts = _points(init).copy()
    part = partition(dist, pts)
    current = part.distortion()
    history = [current]
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        try:
            new_pts = centroids(dist, part)
        except EmptyCellError as exc:
            log.debug("repairing empty cells %s", exc.cells)
            new_pts = _repair(part, exc.cells)
        new_part = partition(dist, new_pts)
        new = new_part.distortion()
        history.append(new)
        decrease = current - new
        pts, part = new_pts, new_part
        if new <= 0 or decrease <= rel_tol * current:
            current = new
            if np.all(part.cell_masses() > 0):
                converged = True
                break
            continue
        current = new
    try:
        cent = centroids(dist, part)
        residual = float(np.max(np.linalg.norm(cent - pts, axis=1)))
    except EmptyCellError:
        residual = math.inf
    return QuantizationResult(
        codebook=Codebook(pts),
        distortion=current,
        cell_masses=part.cell_masses(),
        iterations=it,
        converged=converged,
        centroid_residual=residual,
        history=tuple(history),
    )


def kmeanspp_init(dist: CurveDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding over quadrature nodes weighted by their mass."""
    x = dist.node_points
    w = dist.masses
    centers = np.empty((n, 2))
    centers[0] = x[rng.choice(len(x), p=w / w.sum())]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for i in range(1, n):
        p = w * d2
        total = p.sum()
        if total <= 0:
            raise DomainError("not enough distinct quadrature nodes for k-means++")
        centers[i] = x[rng.choice(len(x), p=p / total)]
        d2 = np.minimum(d2, np.sum((x - centers[i]) ** 2, axis=1))
    return centers


def curve_uniform_init(dist: CurveDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` distinct quadrature nodes drawn with probability equal to their mass."""
    w = dist.masses
    idx = rng.choice(len(w), size=n, replace=False, p=w / w.sum())
    return dist.node_points[np.sort(idx)]


def _threads() -> int:
    raw = os.environ.get("CURVEQUANT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer CURVEQUANT_THREADS=%r", raw)
    return os.cpu_count() or 1


def search_nodes(dist: CurveDistribution, n: int) -> int:
    """Quadrature size used for the multi-start phase of :func:`lloyd_solve`."""
    return min(len(dist.quadrature), max(COARSE_NODES, COARSE_PER_POINT * n))


def lloyd_solve(dist: CurveDistribution, cfg: SolverConfig) -> QuantizationResult:
    """Best of ``cfg.restarts`` Lloyd descents.

    Cell integrals are exact at any quadrature resolution, so the restarts
    run on a coarser copy of ``dist`` (see :func:`search_nodes`) and only the
    winner is polished on the full quadrature.  Ties in distortion go to the
    lowest restart index.
    """
    if cfg.n > len(dist.quadrature):
        raise DomainError(f"n={cfg.n} exceeds the {len(dist.quadrature)} quadrature nodes")
    m = search_nodes(dist, cfg.n)
    coarse = dist if m == len(dist.quadrature) else dist.with_nodes(m)
    if cfg.init == "user":
        best, best_idx = lloyd_run(coarse, cfg.init_codebook, cfg.max_iters, cfg.rel_tol), 0
    else:
        children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
        seeder = kmeanspp_init if cfg.init == "kmeans++" else curve_uniform_init

        def run(i: int) -> QuantizationResult:
            rng = np.random.default_rng(children[i])
            return lloyd_run(coarse, seeder(coarse, cfg.n, rng), cfg.max_iters, cfg.rel_tol)

        workers = min(_threads(), cfg.restarts)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, range(cfg.restarts)))
        else:
            results = [run(i) for i in range(cfg.restarts)]
        best_idx = min(range(cfg.restarts), key=lambda i: (results[i].distortion, i))
        best = results[best_idx]
    if coarse is not dist:
        polish = lloyd_run(dist, best.codebook, max(cfg.max_iters - best.iterations, 1), cfg.rel_tol)
        best = QuantizationResult(
            codebook=polish.codebook,
            distortion=polish.distortion,
            cell_masses=polish.cell_masses,
            iterations=best.iterations + polish.iterations,
            converged=polish.converged,
            centroid_residual=polish.centroid_residual,
            history=best.history + polish.history[1:],
        )
    return _tag(best, best_idx, cfg.seed)


def _tag(res: QuantizationResult, restart: int, seed: int) -> QuantizationResult:
    return QuantizationResult(
        codebook=res.codebook,
        distortion=res.distortion,
        cell_masses=res.cell_masses,
        iterations=res.iterations,
        converged=res.converged,
        centroid_residual=res.centroid_residual,
        history=res.history,
        restart=restart,
        seed=seed,
    )
