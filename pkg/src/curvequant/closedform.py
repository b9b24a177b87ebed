"""Exact optimal codebooks for the segment, the circle and the triangle boundary.

These serve as ground truth for the numerical solver.  The triangle has the
unit equilateral boundary O(0, 0) -> A(1, 0) -> B(1/2, sqrt(3)/2) -> O.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .codebook import Codebook
from .curve import TRIANGLE_A, TRIANGLE_B, TRIANGLE_O, DomainError

CaseTag = Literal["segment", "circle", "triangle-small-n", "triangle-3k+3"]

SQRT3 = math.sqrt(3.0)
SQRT7 = math.sqrt(7.0)
TRIANGLE_CENTROID = (0.5, SQRT3 / 6)


@dataclass(frozen=True, eq=False)
class ClosedFormResult:
    codebook: Codebook
    error: float
    case_tag: CaseTag
    parameters: dict[str, Any] = field(default_factory=dict)
    paper_ref: str = ""

    def __post_init__(self):
        if not self.error > 0:
            raise ValueError("a curve-supported measure always has positive error")


def _check_count(n: int, name: str = "n") -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"{name} must be a positive integer, got {n!r}")


def segment_codebook(a: float, b: float, n: int) -> ClosedFormResult:
    """Midpoints of ``n`` equal subintervals of ``[a, b]``; error ``(b-a)^2 / (12 n^2)``."""
    _check_count(n)
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    i = np.arange(1, n + 1)
    x = a + (2 * i - 1) * (b - a) / (2 * n)
    return ClosedFormResult(
        Codebook(np.column_stack([x, np.zeros(n)])),
        segment_error(a, b, n),
        "segment",
        {"a": a, "b": b, "n": n},
        "segment closed form",
    )


def segment_error(a: float, b: float, n: int) -> float:
    _check_count(n)
    return (a - b) ** 2 / (12 * n**2)


def circle_radius(n: int) -> float:
    """Distance of the optimal n-means of the unit circle from its center."""
    return n / math.pi * math.sin(math.pi / n)


def circle_error(n: int) -> float:
    return 1.0 - circle_radius(n) ** 2


def circle_codebook(n: int) -> ClosedFormResult:
    """Centroids of ``n`` equal arcs of the unit circle starting at angle 0."""
    _check_count(n)
    rho = circle_radius(n)
    if n == 1:
        pts = np.zeros((1, 2))
    else:
        ang = (2 * np.arange(1, n + 1) - 1) * math.pi / n
        pts = rho * np.column_stack([np.cos(ang), np.sin(ang)])
    return ClosedFormResult(Codebook(pts), circle_error(n), "circle", {"n": n, "radius": rho}, "circle closed form")


def _two_means() -> tuple[np.ndarray, dict[str, float]]:
    # the Voronoi boundary cuts OA at t = alpha and AB at t = beta, splitting
    # the boundary into the corner at A and the rest
    alpha = (math.sqrt(17.0) - 1.0) / 8.0
    beta = (79.0 / 8.0 * (math.sqrt(17.0) - 1.0) - 51.0) / (65.0 * (math.sqrt(17.0) - 1.0) - 232.0)
    dp = -alpha - 2.0 * (beta - 1.0) + 1.0
    p = (
        (-(alpha**2) / 2 - 2 * (beta**2 / 2 - 0.5) + 0.5) / dp,
        -2 * (-SQRT3 * beta**2 / 2 + SQRT3 * beta - SQRT3 / 2) / dp,
    )
    dq = alpha - 2.0 * (0.5 - beta) + 1.0
    q = (
        (alpha**2 / 2 - 2 * (1 / 8 - beta**2 / 2) + 1 / 4) / dq,
        (SQRT3 / 4 - 2 * (SQRT3 * beta**2 / 2 - SQRT3 * beta + 3 * SQRT3 / 8)) / dq,
    )
    return np.array([q, p]), {"alpha": alpha, "beta": beta}


# Fixed points of the exact centroid map, started from the published
# six-digit sets; listed in the published order.
_TRIANGLE_TABLE: dict[int, tuple[list[list[float]], float]] = {
    4: (
        [
            [0.13378438827298988, 0.1407346709555914],
            [0.5, 0.0],
            [0.8662156117270101, 0.1407346709555914],
            [0.5, 0.6537629382933179],
        ],
        0.02826901892963634,
    ),
    5: (
        [
            [0.13062460224881456, 0.13856443051009124],
            [0.48591227280560334, 0.0],
            [0.8839662282416663, 0.06699212935977844],
            [0.7429561364027795, 0.44521303152414005],
            [0.44531198424175267, 0.6836189646226631],
        ],
        0.02052502787069705,
    ),
    6: (
        [
            [0.1128540574111574, 0.06515632042547986],
            [0.5, 0.0],
            [0.8871459425888395, 0.0651563204254903],
            [0.75, 0.4330127018921959],
            [0.5, 0.7357127629334408],
            [0.25, 0.4330127018921901],
        ],
        0.01320774339545568,
    ),
}

# Published reference values (six significant figures).
PUBLISHED_TRIANGLE: dict[int, tuple[list[tuple[float, float]], float]] = {
    1: ([(0.5, SQRT3 / 6)], 1 / 6),
    2: ([(0.314187, 0.395954), (0.771396, 0.131985)], 0.0994281),
    3: ([(13 / 16, SQRT3 / 16), (1 / 2, 3 * SQRT3 / 8), (3 / 16, SQRT3 / 16)], 7 / 192),
    4: ([(0.133784, 0.140735), (0.5, 0.0), (0.866216, 0.140735), (0.5, 0.653763)], 0.028269),
    5: (
        [(0.130625, 0.138564), (0.485912, 0.0), (0.883966, 0.0669921), (0.742956, 0.445213), (0.445312, 0.683619)],
        0.020525,
    ),
    6: (
        [(0.112854, 0.0651563), (0.5, 0.0), (0.887146, 0.0651563), (0.75, 0.433013), (0.5, 0.735713), (0.25, 0.433013)],
        0.0132077,
    ),
}

_TWO_MEANS_ERROR = 0.09942813352443727


def triangle_small_n(n: int) -> ClosedFormResult:
    """Optimal ``n``-means of the triangle boundary for ``1 <= n <= 6``.

    For ``n >= 2`` several optimal sets exist (images under the rotations of
    the triangle); the representative returned is the published one.
    """
    _check_count(n)
    if n > 6:
        raise DomainError(f"tabulated triangle optima cover n = 1..6, got {n}")
    params: dict[str, Any] = {"n": n}
    if n == 1:
        pts, err = np.array([TRIANGLE_CENTROID]), 1 / 6
    elif n == 2:
        pts, extra = _two_means()
        err = _TWO_MEANS_ERROR
        params.update(extra)
    elif n == 3:
        pts = np.array(PUBLISHED_TRIANGLE[3][0])
        err = 7 / 192
    else:
        table, err = _TRIANGLE_TABLE[n]
        pts = np.array(table)
    return ClosedFormResult(Codebook(pts), err, "triangle-small-n", params, f"triangle {n}-means table")


def trapezoid_ratio(k: int) -> float:
    """Side ``r`` of the corner cells in the ``n = 3k + 3`` construction."""
    _check_count(k, "k")
    return (8.0 - 2.0 * SQRT7 * k) / (16.0 - 7.0 * k * k)


def triangle_3k3_error(k: int) -> float:
    _check_count(k, "k")
    return 7.0 * (7.0 * k * k - 8.0 * SQRT7 * k + 16.0) / (12.0 * (16.0 - 7.0 * k * k) ** 2)


def side_maps() -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Affine maps ``(M, t)`` carrying side OA onto AB and onto OB.

    The first sends (t, 0) to (1 - t) B + t A, the second to (1 - t) B + t O.
    """
    O, A, B = (np.asarray(v) for v in (TRIANGLE_O, TRIANGLE_A, TRIANGLE_B))
    to_ab = (np.column_stack([A - B, [0.0, 1.0]]), B)
    to_ob = (np.column_stack([O - B, [0.0, 1.0]]), B)
    return to_ab, to_ob


def triangle_3k3_codebook(k: int) -> ClosedFormResult:
    """Optimal ``(3k + 3)``-means of the triangle boundary.

    Three points sit in the corner cells (equilateral with side ``r``) and
    ``k`` equally spaced points cover the middle ``[r, 1 - r]`` of each side.
    """
    _check_count(k, "k")
    r = trapezoid_ratio(k)
    corners = np.array(
        [
            [3 * r / 8, SQRT3 * r / 8],
            [1 - 3 * r / 8, SQRT3 * r / 8],
            [0.5, -SQRT3 * (r - 2) / 4],
        ]
    )
    j = np.arange(1, k + 1)
    base = np.column_stack([r + (2 * j - 1) * (1 - 2 * r) / (2 * k), np.zeros(k)])
    (m1, t1), (m2, t2) = side_maps()
    pts = np.vstack([corners, base, base @ m1.T + t1, base @ m2.T + t2])
    return ClosedFormResult(
        Codebook(pts),
        triangle_3k3_error(k),
        "triangle-3k+3",
        {"k": k, "n": 3 * k + 3, "r": r},
        "triangle 3k+3 construction",
    )


def triangle_codebook(n: int) -> ClosedFormResult:
    """Closed form for ``n`` in 1..6 or ``n = 3k + 3``; otherwise a domain error."""
    _check_count(n)
    if n <= 6:
        return triangle_small_n(n)
    if n % 3 == 0:
        return triangle_3k3_codebook(n // 3 - 1)
    raise DomainError(
        f"no closed form for triangle n={n}; supported: n in 1..6 or n = 3k+3 (k >= 1)"
    )


def has_triangle_closed_form(n: int) -> bool:
    return 1 <= n <= 6 or (n >= 6 and n % 3 == 0)


def affine_transform(cb: Codebook, A, t) -> Codebook:
    """Image of ``cb`` under ``p -> A p + t`` for an invertible 2x2 ``A``."""
    A = np.asarray(A, dtype=float)
    t = np.asarray(t, dtype=float).reshape(2)
    if A.shape != (2, 2):
        raise DomainError("A must be a 2x2 matrix")
    if abs(np.linalg.det(A)) <= 1e-12:
        raise DomainError("A must be invertible")
    return Codebook(np.asarray(cb.points) @ A.T + t)


def similarity_scale(A) -> float:
    """Scale factor ``c`` if ``A = c Q`` with ``Q`` orthogonal, else a domain error."""
    A = np.asarray(A, dtype=float)
    gram = A.T @ A
    c2 = gram[0, 0]
    if c2 <= 0 or not np.allclose(gram, c2 * np.eye(2), rtol=1e-12, atol=1e-12):
        raise DomainError("A is not a similarity (scaled orthogonal) matrix")
    return math.sqrt(c2)


def transform_result(res: ClosedFormResult, A, t) -> ClosedFormResult:
    """Transport an optimal set and its error under a similarity transform.

    The quantization error scales with the square of the similarity factor.
    """
    c = similarity_scale(A)
    return ClosedFormResult(
        affine_transform(res.codebook, A, t),
        res.error * c * c,
        res.case_tag,
        {**res.parameters, "scale": c},
        res.paper_ref,
    )


def rotation_about(center, angle: float) -> tuple[np.ndarray, np.ndarray]:
    """``(A, t)`` for the rotation by ``angle`` about ``center``."""
    c, s = math.cos(angle), math.sin(angle)
    A = np.array([[c, -s], [s, c]])
    center = np.asarray(center, dtype=float)
    return A, center - A @ center


def segment_image(n: int) -> tuple[Codebook, float]:
    """Optimal n-means of the uniform law on the segment (0,0)-(1,sqrt 3).

    Obtained by pushing the unit-interval optimum through (t, 0) -> (t, sqrt(3) t);
    that map is not a similarity, so the error is the unit-interval error
    times the squared length ratio (|(1, sqrt 3)| = 2).
    """
    base = segment_codebook(0.0, 1.0, n)
    cb = affine_transform(base.codebook, [[1.0, 0.0], [SQRT3, 1.0]], [0.0, 0.0])
    return cb, base.error * 4.0
