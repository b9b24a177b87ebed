"""Planar curves with exact arc-length parametrization and measures on them.

A curve is an ordered chain of line and circular-arc pieces.  A
:class:`CurveDistribution` carries a density over arc length together with a
composite midpoint quadrature.  Besides the usual (node, weight) pairs, every
quadrature subinterval also stores the exact first and second moments of the
piece of curve it covers, so integrals of squared distances are exact for
piecewise-constant densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

CLOSE_TOL = 1e-12
DEFAULT_NODES = 100_000


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def _pt(p: Sequence[float]) -> tuple[float, float]:
    try:
        arr = np.asarray(p, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"expected a planar point, got {p!r}") from exc
    if arr.shape != (2,) or not np.all(np.isfinite(arr)):
        raise DomainError(f"expected a finite planar point, got {p!r}")
    return float(arr[0]), float(arr[1])


@dataclass(frozen=True)
class LinePiece:
    p0: tuple[float, float]
    p1: tuple[float, float]

    kind = "line"

    def __post_init__(self):
        if self.length <= 0:
            raise DomainError("line piece has zero length")

    @property
    def length(self) -> float:
        return math.dist(self.p0, self.p1)

    @property
    def direction(self) -> np.ndarray:
        return (np.asarray(self.p1) - np.asarray(self.p0)) / self.length

    def point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.asarray(self.p0) + u[..., None] * self.direction

    def tangent(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self.direction, u.shape + (2,))

    def moments(self, u0, u1) -> tuple[np.ndarray, np.ndarray]:
        """Mean point and second central moment of the uniform law on [u0, u1]."""
        u0 = np.asarray(u0, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        return self.point(0.5 * (u0 + u1)), (u1 - u0) ** 2 / 12.0

    def to_json(self) -> dict:
        return {"kind": "line", "p0": list(self.p0), "p1": list(self.p1)}


@dataclass(frozen=True)
class ArcPiece:
    """Circular arc swept from ``start`` to ``end`` (radians).

    The sweep is counterclockwise when ``end > start`` and clockwise otherwise.
    """

    center: tuple[float, float]
    radius: float
    start: float
    end: float

    kind = "arc"

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("arc radius must be positive")
        if self.length <= 0:
            raise DomainError("arc piece has zero sweep")

    @property
    def sweep(self) -> float:
        return self.end - self.start

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def _angle(self, u):
        return self.start + math.copysign(1.0, self.sweep) * np.asarray(u, dtype=float) / self.radius

    def point(self, u) -> np.ndarray:
        th = self._angle(u)
        return np.asarray(self.center) + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def tangent(self, u) -> np.ndarray:
        th = self._angle(u)
        sign = math.copysign(1.0, self.sweep)
        return sign * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def moments(self, u0, u1) -> tuple[np.ndarray, np.ndarray]:
        u0 = np.asarray(u0, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        half = 0.5 * (u1 - u0) / self.radius
        th = self._angle(0.5 * (u0 + u1))
        shrink = _sinc(half)
        mean = np.asarray(self.center) + (self.radius * shrink)[..., None] * np.stack(
            [np.cos(th), np.sin(th)], axis=-1
        )
        # R^2 (1 - sinc^2) written to avoid cancellation for short arcs
        var = self.radius**2 * _one_minus_sinc(half) * (1.0 + shrink)
        return mean, var

    def to_json(self) -> dict:
        return {
            "kind": "arc",
            "center": list(self.center),
            "radius": self.radius,
            "start": self.start,
            "end": self.end,
        }


def _sinc(x):
    x = np.asarray(x, dtype=float)
    return np.sinc(x / np.pi)


def _one_minus_sinc(x):
    x = np.abs(np.asarray(x, dtype=float))
    small = x < 1e-2
    xs = np.where(small, x, 0.0)
    series = xs**2 / 6 - xs**4 / 120 + xs**6 / 5040
    safe = np.where(small, 1.0, x)
    direct = (safe - np.sin(safe)) / safe
    return np.where(small, series, direct)


Piece = LinePiece | ArcPiece


def piece_from_json(obj: dict) -> Piece:
    kind = obj.get("kind")
    try:
        if kind == "line":
            return LinePiece(_pt(obj["p0"]), _pt(obj["p1"]))
        if kind == "arc":
            return ArcPiece(
                _pt(obj["center"]),
                float(obj["radius"]),
                float(obj["start"]),
                float(obj["end"]),
            )
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed {kind} piece: {obj!r}") from exc
    raise DomainError(f"unknown piece kind {kind!r}")


@dataclass(frozen=True)
class ParametricCurve:
    pieces: tuple[Piece, ...]
    closed: bool = field(init=False)
    cumulative_lengths: np.ndarray = field(init=False, repr=False, compare=False)
    total_length: float = field(init=False)
    _geom: "_PieceTable" = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise DomainError("a curve needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        for prev, nxt in zip(pieces, pieces[1:]):
            gap = np.linalg.norm(prev.point(prev.length) - nxt.point(0.0))
            if gap > CLOSE_TOL:
                raise DomainError(f"pieces do not join (gap {gap:.3g})")
        cum = np.cumsum([p.length for p in pieces])
        cum.setflags(write=False)
        object.__setattr__(self, "cumulative_lengths", cum)
        object.__setattr__(self, "total_length", float(cum[-1]))
        first = pieces[0].point(0.0)
        last = pieces[-1].point(pieces[-1].length)
        object.__setattr__(self, "closed", bool(np.linalg.norm(first - last) <= CLOSE_TOL))
        object.__setattr__(self, "_geom", _PieceTable(pieces))

    def locate(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Piece index and local arc length for global arc length ``s``."""
        s = np.asarray(s, dtype=float)
        L = self.total_length
        if np.any((s < 0) | (s > L)) or np.any(np.isnan(s)):
            raise DomainError(f"arc length outside [0, {L}]")
        idx = np.searchsorted(self.cumulative_lengths, s, side="right")
        idx = np.minimum(idx, len(self.pieces) - 1)
        offsets = np.concatenate([[0.0], self.cumulative_lengths[:-1]])
        return idx, s - offsets[idx]

    def point_at(self, s) -> np.ndarray:
        idx, u = self.locate(s)
        return self._geom.points(idx, u)

    def points(self, piece, u) -> np.ndarray:
        """Points at local arc length ``u`` on pieces ``piece`` (vectorized)."""
        return self._geom.points(np.asarray(piece), np.asarray(u, dtype=float))

    def tangents(self, piece, u) -> np.ndarray:
        return self._geom.tangents(np.asarray(piece), np.asarray(u, dtype=float))

    @property
    def has_arcs(self) -> bool:
        return bool(self._geom.is_arc.any())

    def to_json(self) -> dict:
        return {"pieces": [p.to_json() for p in self.pieces], "density": "uniform"}


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Composite midpoint rule over arc length.

    Subinterval ``m`` covers local arc lengths ``[lo[m], hi[m]]`` of piece
    ``piece[m]``; ``nodes`` are global midpoints and ``weights`` the lengths.
    ``edges`` lists every subinterval endpoint once per piece, with ``left``
    and ``right`` indexing into it.
    """

    piece: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    edges: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)


def _split_counts(lengths: np.ndarray, m: int) -> np.ndarray:
    share = m * lengths / lengths.sum()
    counts = np.maximum(np.floor(share).astype(int), 1)
    # largest remainder so the total is exactly m
    while counts.sum() < m:
        counts[np.argmax(share - counts)] += 1
    while counts.sum() > m and np.any(counts > 1):
        cand = np.where(counts > 1, share - counts, np.inf)
        counts[np.argmin(cand)] -= 1
    return counts


def midpoint_quadrature(curve: ParametricCurve, m: int = DEFAULT_NODES) -> Quadrature:
    if m < len(curve.pieces):
        raise DomainError(f"need at least {len(curve.pieces)} quadrature nodes")
    lengths = np.array([p.length for p in curve.pieces])
    counts = _split_counts(lengths, m)
    offsets = np.concatenate([[0.0], curve.cumulative_lengths[:-1]])
    piece_idx, lo, hi, edges, left, right = [], [], [], [], [], []
    base = 0
    for k, (piece, c) in enumerate(zip(curve.pieces, counts)):
        u = np.linspace(0.0, piece.length, c + 1)
        piece_idx.append(np.full(c, k))
        lo.append(u[:-1])
        hi.append(u[1:])
        edges.append(piece.point(u))
        left.append(base + np.arange(c))
        right.append(base + np.arange(1, c + 1))
        base += c + 1
    piece_arr = np.concatenate(piece_idx)
    lo_arr = np.concatenate(lo)
    hi_arr = np.concatenate(hi)
    return Quadrature(
        piece=piece_arr,
        lo=lo_arr,
        hi=hi_arr,
        nodes=offsets[piece_arr] + 0.5 * (lo_arr + hi_arr),
        weights=hi_arr - lo_arr,
        edges=np.concatenate(edges),
        left=np.concatenate(left),
        right=np.concatenate(right),
    )


class _PieceTable:
    """Piece parameters as arrays so curve evaluation vectorizes over pieces."""

    def __init__(self, pieces):
        self.is_arc = np.array([p.kind == "arc" for p in pieces])
        self.origin = np.array([p.center if p.kind == "arc" else p.p0 for p in pieces], dtype=float)
        self.direction = np.array(
            [p.direction if p.kind == "line" else (0.0, 0.0) for p in pieces], dtype=float
        )
        self.radius = np.array([p.radius if p.kind == "arc" else 1.0 for p in pieces])
        self.start = np.array([p.start if p.kind == "arc" else 0.0 for p in pieces])
        self.sign = np.array([math.copysign(1.0, p.sweep) if p.kind == "arc" else 1.0 for p in pieces])
        self.any_arc = bool(self.is_arc.any())
        self.all_arc = bool(self.is_arc.all())

    def points(self, k, u):
        out = self.origin[k] + u[..., None] * self.direction[k]
        if self.any_arc:
            th = self.start[k] + self.sign[k] * u / self.radius[k]
            arc = self.origin[k] + self.radius[k][..., None] * np.stack([np.cos(th), np.sin(th)], axis=-1)
            out = arc if self.all_arc else np.where(self.is_arc[k][..., None], arc, out)
        return out

    def tangents(self, k, u):
        out = np.broadcast_to(self.direction[k], np.shape(u) + (2,))
        if self.any_arc:
            th = self.start[k] + self.sign[k] * u / self.radius[k]
            arc = self.sign[k][..., None] * np.stack([-np.sin(th), np.cos(th)], axis=-1)
            out = arc if self.all_arc else np.where(self.is_arc[k][..., None], arc, out)
        return out

    def moments(self, k, u0, u1):
        mean = self.points(k, 0.5 * (u0 + u1))
        var = (u1 - u0) ** 2 / 12.0
        if self.any_arc:
            r = self.radius[k]
            half = 0.5 * (u1 - u0) / r
            shrink = _sinc(half)
            arc_mean = self.origin[k] + shrink[..., None] * (mean - self.origin[k])
            # R^2 (1 - sinc^2) written to avoid cancellation for short arcs
            arc_var = r**2 * _one_minus_sinc(half) * (1.0 + shrink)
            if self.all_arc:
                mean, var = arc_mean, arc_var
            else:
                mean = np.where(self.is_arc[k][..., None], arc_mean, mean)
                var = np.where(self.is_arc[k], arc_var, var)
        return mean, var


def sub_moments(curve: ParametricCurve, piece, u0, u1) -> tuple[np.ndarray, np.ndarray]:
    """Exact (mean, central second moment) of uniform arc-length law on sub-pieces."""
    return curve._geom.moments(
        np.asarray(piece), np.asarray(u0, dtype=float), np.asarray(u1, dtype=float)
    )


@dataclass(frozen=True, eq=False)
class CurveDistribution:
    """Probability measure on a curve given by a density over arc length.

    ``density`` maps an array of arc lengths to non-negative weights and is
    evaluated at quadrature midpoints, so it is integrated exactly when it is
    constant on each subinterval.
    """

    curve: ParametricCurve
    density: Callable[[np.ndarray], np.ndarray]
    quadrature: Quadrature
    name: str = "custom"
    density_label: str = "uniform"
    masses: np.ndarray = field(init=False, repr=False)
    means: np.ndarray = field(init=False, repr=False)
    variances: np.ndarray = field(init=False, repr=False)
    center: np.ndarray = field(init=False, repr=False)
    moment_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = self.quadrature
        dens = np.broadcast_to(np.asarray(self.density(q.nodes), dtype=float), q.nodes.shape)
        if np.any(dens < 0):
            raise DomainError("density must be non-negative")
        masses = q.weights * dens
        total = masses.sum()
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"density integrates to {total!r}, not 1")
        means, variances = sub_moments(self.curve, q.piece, q.lo, q.hi)
        center = (masses[:, None] * means).sum(axis=0) / total
        rel = means - center
        # rows: per-subinterval mass, first and second moments about ``center``
        table = np.stack(
            [masses, masses * rel[:, 0], masses * rel[:, 1], masses * (variances + np.sum(rel**2, axis=1))]
        )
        for arr in (masses, means, variances, center, table):
            arr.setflags(write=False)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "moment_table", table)

    @property
    def total_length(self) -> float:
        return self.curve.total_length

    @property
    def node_points(self) -> np.ndarray:
        return self.means

    def density_at(self, s) -> np.ndarray:
        return np.asarray(self.density(np.asarray(s, dtype=float)), dtype=float)

    def probability(self, s0: float, s1: float) -> float:
        """Mass of the arc between arc lengths ``s0 <= s1``."""
        if not 0 <= s0 <= s1 <= self.total_length:
            raise DomainError("need 0 <= s0 <= s1 <= L")
        q = self.quadrature
        offsets = np.concatenate([[0.0], self.curve.cumulative_lengths[:-1]])
        a = offsets[q.piece] + q.lo
        b = offsets[q.piece] + q.hi
        overlap = np.clip(np.minimum(b, s1) - np.maximum(a, s0), 0.0, None)
        return float(np.sum(overlap * self.density_at(q.nodes)))

    def with_nodes(self, m: int) -> "CurveDistribution":
        return CurveDistribution(
            self.curve,
            self.density,
            midpoint_quadrature(self.curve, m),
            name=self.name,
            density_label=self.density_label,
        )


class _Uniform:
    """Constant density 1/L (a class rather than a lambda so it pickles)."""

    def __init__(self, length: float):
        self.value = 1.0 / length

    def __call__(self, s):
        return np.full(np.shape(s), self.value)


def uniform_distribution(
    curve: ParametricCurve, m: int = DEFAULT_NODES, name: str = "custom"
) -> CurveDistribution:
    return CurveDistribution(
        curve, _Uniform(curve.total_length), midpoint_quadrature(curve, m), name=name
    )


def make_segment(a: float, b: float, m: int = DEFAULT_NODES) -> CurveDistribution:
    """Uniform distribution on the interval ``[a, b]`` of the x-axis."""
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    curve = ParametricCurve((LinePiece((float(a), 0.0), (float(b), 0.0)),))
    return uniform_distribution(curve, m, name="segment")


def make_unit_circle(m: int = DEFAULT_NODES) -> CurveDistribution:
    curve = ParametricCurve((ArcPiece((0.0, 0.0), 1.0, 0.0, 2 * math.pi),))
    return uniform_distribution(curve, m, name="circle")


TRIANGLE_O = (0.0, 0.0)
TRIANGLE_A = (1.0, 0.0)
TRIANGLE_B = (0.5, math.sqrt(3) / 2)


def make_unit_triangle_boundary(m: int = DEFAULT_NODES) -> CurveDistribution:
    """Uniform law on the boundary O -> A -> B -> O of the unit equilateral triangle."""
    curve = ParametricCurve(
        (
            LinePiece(TRIANGLE_O, TRIANGLE_A),
            LinePiece(TRIANGLE_A, TRIANGLE_B),
            LinePiece(TRIANGLE_B, TRIANGLE_O),
        )
    )
    return uniform_distribution(curve, m, name="triangle")


def point_at(curve: ParametricCurve, s) -> np.ndarray:
    return curve.point_at(s)


def mean_and_variance(dist: CurveDistribution) -> tuple[np.ndarray, float]:
    """Return ``(E[X], E||X - E[X]||^2)`` for ``X`` distributed as ``dist``."""
    w = dist.masses
    mean = (w[:, None] * dist.means).sum(axis=0) / w.sum()
    spread = dist.variances + np.sum((dist.means - mean) ** 2, axis=1)
    return mean, float(np.sum(w * spread) / w.sum())


def curve_from_json(obj: dict, m: int = DEFAULT_NODES) -> CurveDistribution:
    """Build a uniform distribution from the curve-file JSON schema."""
    if not isinstance(obj, dict) or "pieces" not in obj:
        raise DomainError("curve description needs a 'pieces' list")
    density = obj.get("density", "uniform")
    if density != "uniform":
        raise DomainError(f"unsupported density {density!r}; only 'uniform' is accepted")
    pieces = obj["pieces"]
    if not isinstance(pieces, list):
        raise DomainError("'pieces' must be a list")
    curve = ParametricCurve(tuple(piece_from_json(p) for p in pieces))
    return uniform_distribution(curve, m, name=obj.get("name", "custom"))
