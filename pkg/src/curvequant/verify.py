"""Cross-check suite: closed forms vs solver vs oracles.

Each group of checks returns :class:`Check` rows; ``run_suite`` collects
them and ``format_report`` renders the table printed by ``curvequant verify``.
Everything here is deterministic so two runs produce identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import closedform as cf
from .asymptotics import (
    circle_series,
    estimate_coefficient,
    estimate_dimension,
    segment_series,
    triangle_series,
)
from .curve import (
    DEFAULT_NODES,
    CurveDistribution,
    make_segment,
    make_unit_circle,
    make_unit_triangle_boundary,
    mean_and_variance,
)
from .oracles import oracle_circle_offset, oracle_segment_dp
from .solver import (
    SolverConfig,
    distortion,
    kmeanspp_init,
    lloyd_run,
    lloyd_solve,
    verify_centroid_condition,
)

SEED = 20240101
# restarts for the unimodal segment and circle landscapes; the triangle uses 64
CONVEX_RESTARTS = 8
TRIANGLE_RESTARTS = 64


@dataclass(frozen=True)
class Check:
    criterion: int
    group: str
    case: str
    expected: str
    computed: str
    tolerance: str
    passed: bool


def _num(x: float) -> str:
    return f"{x:.12g}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def match_points(a: np.ndarray, b: np.ndarray) -> float:
    """Largest coordinate gap after optimally pairing the rows of ``a`` and ``b``."""
    cost = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=-1)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def triangle_rotations(points: np.ndarray) -> list[np.ndarray]:
    """The three images of ``points`` under rotations about the triangle centroid."""
    out = []
    for turn in range(3):
        A, t = cf.rotation_about(cf.TRIANGLE_CENTROID, 2 * math.pi * turn / 3)
        out.append(points @ A.T + t)
    return out


def tolerance_scale(nodes: int) -> float:
    """Loosening factor for quadrature-sensitive tolerances at a coarse node count.

    Follows a midpoint-rule O(M^-2) model.  Cell integrals are exact here, so
    measured errors do not actually grow at coarse M; the scale is a bound.
    """
    return max(1.0, (DEFAULT_NODES / nodes) ** 2)


class Suite:
    def __init__(self, nodes: int = DEFAULT_NODES):
        self.nodes = nodes
        self.scale = tolerance_scale(nodes)
        self._dists: dict[str, CurveDistribution] = {}

    def dist(self, shape: str) -> CurveDistribution:
        if shape not in self._dists:
            maker = {
                "segment": lambda: make_segment(0.0, 1.0, self.nodes),
                "circle": lambda: make_unit_circle(self.nodes),
                "triangle": lambda: make_unit_triangle_boundary(self.nodes),
            }[shape]
            self._dists[shape] = maker()
        return self._dists[shape]

    # criterion 1
    def segment(self) -> list[Check]:
        rows = []
        d = self.dist("segment")
        for n in range(1, 17):
            res = lloyd_solve(d, SolverConfig(n=n, restarts=CONVEX_RESTARTS, seed=SEED))
            exact = cf.segment_codebook(0.0, 1.0, n)
            tol = 1e-5 * self.scale
            rel = _rel(res.distortion, exact.error)
            rows.append(Check(1, "segment", f"V_{n}", _num(exact.error), _num(res.distortion), f"rel {tol:.0e}", rel <= tol))
            xs = np.sort(res.codebook.points[:, 0])
            gap = float(max(np.max(np.abs(xs - exact.codebook.points[:, 0])), np.max(np.abs(res.codebook.points[:, 1]))))
            rows.append(Check(1, "segment", f"codebook n={n}", "(2i-1)/(2n)", _num(gap), "abs 1e-04", gap <= 1e-4))
        return rows

    # criterion 2
    def circle(self) -> list[Check]:
        rows = []
        d = self.dist("circle")
        for n in range(1, 13):
            res = lloyd_solve(d, SolverConfig(n=n, restarts=CONVEX_RESTARTS, seed=SEED))
            exact = cf.circle_error(n)
            tol = 1e-5 * self.scale
            rows.append(
                Check(2, "circle", f"V_{n}", _num(exact), _num(res.distortion), f"rel {tol:.0e}", _rel(res.distortion, exact) <= tol)
            )
            radii = np.linalg.norm(res.codebook.points, axis=1)
            gap = float(np.max(np.abs(radii - cf.circle_radius(n))))
            rows.append(
                Check(2, "circle", f"radius n={n}", _num(cf.circle_radius(n)), _num(gap), "abs 1e-04", gap <= 1e-4)
            )
        return rows

    # criterion 3
    def triangle(self) -> list[Check]:
        rows = []
        d = self.dist("triangle")
        for n in range(2, 7):
            res = lloyd_solve(d, SolverConfig(n=n, restarts=TRIANGLE_RESTARTS, seed=SEED))
            published = cf.PUBLISHED_TRIANGLE[n][1]
            gap = abs(res.distortion - published)
            rows.append(Check(3, "triangle", f"V_{n}", _num(published), _num(res.distortion), "abs 2e-05", gap <= 2e-5))
            if n == 3:
                target = np.array(cf.PUBLISHED_TRIANGLE[3][0])
                gap = min(match_points(res.codebook.points, img) for img in triangle_rotations(target))
                rows.append(Check(3, "triangle", "codebook n=3", "exact set or rotation", _num(gap), "abs 1e-04", gap <= 1e-4))
        return rows

    # criterion 4
    def family(self) -> list[Check]:
        rows = []
        d = self.dist("triangle")
        for k in range(1, 9):
            res = cf.triangle_3k3_codebook(k)
            got = distortion(d, res.codebook)
            tol = 1e-6 * self.scale
            rows.append(
                Check(4, "3k+3", f"V_{3 * k + 3} (k={k})", _num(res.error), _num(got), f"rel {tol:.0e}", _rel(got, res.error) <= tol)
            )
            resid = verify_centroid_condition(d, res.codebook)
            rows.append(Check(4, "3k+3", f"centroid residual k={k}", "0", _num(resid), "abs 1e-06", resid < 1e-6))
        for k in (1, 2, 3):
            n = 3 * k + 3
            res = lloyd_solve(d, SolverConfig(n=n, restarts=TRIANGLE_RESTARTS, seed=SEED))
            exact = cf.triangle_3k3_error(k)
            rows.append(
                Check(4, "3k+3", f"solver V_{n}", _num(exact), _num(res.distortion), "rel 1e-04", _rel(res.distortion, exact) <= 1e-4)
            )
        return rows

    # criterion 5
    def oracles(self) -> list[Check]:
        rows = []
        for n in range(1, 9):
            res = oracle_segment_dp(0.0, 1.0, n, grid=10_000)
            exact = cf.segment_codebook(0.0, 1.0, n).error
            rows.append(
                Check(5, "oracle", f"segment DP n={n}", _num(exact), _num(res.distortion), "rel 1e-04", _rel(res.distortion, exact) <= 1e-4)
            )
        for n in range(1, 13):
            res = oracle_circle_offset(n)
            exact = cf.circle_error(n)
            rows.append(
                Check(5, "oracle", f"circle offsets n={n}", _num(exact), _num(res.distortion), "rel 1e-09", _rel(res.distortion, exact) <= 1e-9)
            )
        return rows

    # criterion 6
    def asymptotics(self) -> list[Check]:
        rows = []
        ns = range(2, 1025)
        seg, circ = segment_series(ns), circle_series(ns)
        for name, series in (("segment", seg), ("circle", circ)):
            est = estimate_dimension(series)
            rows.append(
                Check(6, "asymptotics", f"{name} dimension n=1024", "1", _num(est.value), "[0.95, 1.05]", 0.95 <= est.value <= 1.05)
            )
            rows.append(
                Check(
                    6, "asymptotics", f"{name} local log-log slope n=1024", "1", _num(est.local_slope),
                    "[0.95, 1.05]", 0.95 <= est.local_slope <= 1.05,
                )
            )
        for name, series, limit, label in (
            ("segment", seg, 1 / 12, "1/12"),
            ("circle", circ, math.pi**2 / 3, "pi^2/3"),
        ):
            coeff = estimate_coefficient(series, 1.0).value
            rows.append(
                Check(6, "asymptotics", f"{name} n^2 V_n n=1024", label, _num(coeff), "rel 1e-04", _rel(coeff, limit) <= 1e-4)
            )
        coeff = estimate_coefficient(triangle_series([1000]), 1.0).value
        rows.append(
            Check(6, "asymptotics", "triangle n^2 V_n k=1000", "3/4", _num(coeff), "rel 1e-02", _rel(coeff, 0.75) <= 1e-2)
        )
        return rows

    # criterion 7
    def properties(self) -> list[Check]:
        rows = []
        rng = np.random.default_rng(SEED)
        worst, cases = 0.0, 0
        shapes = ("segment", "circle", "triangle")
        for case in range(100):
            shape = shapes[case % 3]
            n = int(rng.integers(1, 9))
            d = self.dist(shape).with_nodes(2_000)
            init = kmeanspp_init(d, n, np.random.default_rng(int(rng.integers(2**32))))
            hist = np.array(lloyd_run(d, init, max_iters=200).history)
            worst = max(worst, float(np.max(np.diff(hist), initial=0.0)))
            cases += 1
        rows.append(
            Check(7, "properties", f"Lloyd monotone descent ({cases} cases)", "increase <= 1e-14", _num(worst), "abs 1e-14", worst <= 1e-14)
        )

        worst = 0.0
        for shape, res in self._closed_forms():
            run = lloyd_run(self.dist(shape), res.codebook, max_iters=2)
            worst = max(worst, run.centroid_residual)
        rows.append(
            Check(7, "properties", "closed forms are 2-iteration fixed points", "0", _num(worst), "abs 1e-07", worst < 1e-7)
        )

        mean, var = mean_and_variance(self.dist("triangle"))
        gap = float(max(abs(mean[0] - 0.5), abs(mean[1] - math.sqrt(3) / 6), abs(var - 1 / 6)))
        rows.append(Check(7, "properties", "triangle mean and variance", "(1/2, sqrt3/6), 1/6", _num(gap), "abs 1e-09", gap <= 1e-9))

        base = lloyd_solve(self.dist("segment"), SolverConfig(n=5, restarts=4, seed=SEED))
        for c in (0.5, 2.0, 10.0):
            scaled = lloyd_solve(make_segment(0.0, c, self.nodes), SolverConfig(n=5, restarts=4, seed=SEED))
            pts = np.abs(scaled.codebook.points - c * base.codebook.points).max() / c
            err = _rel(scaled.distortion, c * c * base.distortion)
            gap = float(max(pts, err))
            rows.append(Check(7, "properties", f"scaling covariance c={c:g}", "x -> c x, V -> c^2 V", _num(gap), "rel 1e-09", gap <= 1e-9))
        return rows

    def _closed_forms(self) -> Iterable[tuple[str, cf.ClosedFormResult]]:
        for n in (1, 2, 3, 5, 8, 16):
            yield "segment", cf.segment_codebook(0.0, 1.0, n)
        for n in (1, 2, 3, 4, 6, 12):
            yield "circle", cf.circle_codebook(n)
        for n in range(1, 7):
            yield "triangle", cf.triangle_small_n(n)
        for k in (1, 2, 3, 8):
            yield "triangle", cf.triangle_3k3_codebook(k)


GROUPS: dict[str, Callable[[Suite], list[Check]]] = {
    "segment": Suite.segment,
    "circle": Suite.circle,
    "triangle": Suite.triangle,
    "3k+3": Suite.family,
    "oracle": Suite.oracles,
    "asymptotics": Suite.asymptotics,
    "properties": Suite.properties,
}


def run_suite(only: Iterable[str] | None = None, nodes: int = DEFAULT_NODES) -> list[Check]:
    suite = Suite(nodes)
    names = list(GROUPS) if not only else list(only)
    unknown = [n for n in names if n not in GROUPS]
    if unknown:
        raise ValueError(f"unknown check groups {unknown}; choose from {list(GROUPS)}")
    rows: list[Check] = []
    for name in names:
        rows.extend(GROUPS[name](suite))
    return rows


def format_report(rows: list[Check]) -> str:
    header = ("crit", "case", "paper value", "computed", "tolerance", "status")
    body = [
        (str(r.criterion), f"{r.group}: {r.case}", r.expected, r.computed, r.tolerance, "PASS" if r.passed else "FAIL")
        for r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in [header, *body]]
    failed = sum(not r.passed for r in rows)
    lines.append(f"{len(rows) - failed}/{len(rows)} checks passed")
    return "\n".join(lines) + "\n"
