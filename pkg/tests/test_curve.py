import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvequant.curve import (
    ArcPiece,
    DomainError,
    LinePiece,
    ParametricCurve,
    curve_from_json,
    make_segment,
    make_unit_circle,
    make_unit_triangle_boundary,
    mean_and_variance,
    midpoint_quadrature,
    point_at,
    uniform_distribution,
)

coord = st.floats(-5, 5, allow_nan=False)


def test_piece_lengths():
    assert LinePiece((0, 0), (3, 4)).length == 5.0
    arc = ArcPiece((1, 1), 2.0, 0.5, -1.0)
    assert arc.length == pytest.approx(3.0)


def test_degenerate_pieces_rejected():
    with pytest.raises(DomainError):
        LinePiece((1, 1), (1, 1))
    with pytest.raises(DomainError):
        ArcPiece((0, 0), 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        ArcPiece((0, 0), 1.0, 1.0, 1.0)


def test_pieces_must_join():
    with pytest.raises(DomainError):
        ParametricCurve((LinePiece((0, 0), (1, 0)), LinePiece((1, 0.1), (2, 0))))


def test_closed_flag():
    assert make_unit_circle(100).curve.closed
    assert make_unit_triangle_boundary(99).curve.closed
    assert not make_segment(0, 1, 10).curve.closed


def test_segment_point_at():
    d = make_segment(0.0, 1.0, 100)
    np.testing.assert_allclose(point_at(d.curve, 0.25), [0.25, 0.0])


def test_circle_point_at_quarter_turn():
    d = make_unit_circle(100)
    np.testing.assert_allclose(point_at(d.curve, math.pi / 2), [0.0, 1.0], atol=1e-15)


def test_triangle_point_at_vertex_b():
    d = make_unit_triangle_boundary(99)
    np.testing.assert_allclose(point_at(d.curve, 1.5), [0.75, math.sqrt(3) / 4], atol=1e-15)
    np.testing.assert_allclose(point_at(d.curve, 2.0), [0.5, math.sqrt(3) / 2], atol=1e-15)


def test_arc_length_outside_domain():
    d = make_segment(0.0, 1.0, 10)
    with pytest.raises(DomainError):
        point_at(d.curve, 1.5)
    with pytest.raises(DomainError):
        point_at(d.curve, -1e-3)


def test_make_segment_needs_a_below_b():
    with pytest.raises(DomainError):
        make_segment(1.0, 1.0)
    with pytest.raises(DomainError):
        make_segment(2.0, 1.0)


@given(s=st.floats(0, 3), t=st.floats(0, 3))
def test_triangle_is_piecewise_isometric(s, t):
    curve = make_unit_triangle_boundary(99).curve
    gap = np.linalg.norm(curve.point_at(s) - curve.point_at(t))
    assert gap <= abs(s - t) + 1e-12
    if math.floor(s) == math.floor(t) and s < 3 and t < 3:
        assert gap == pytest.approx(abs(s - t), abs=1e-12)


@given(s=st.floats(0, 2 * math.pi), t=st.floats(0, 2 * math.pi))
def test_circle_chord_is_at_most_arc(s, t):
    curve = make_unit_circle(100).curve
    gap = np.linalg.norm(curve.point_at(s) - curve.point_at(t))
    assert gap == pytest.approx(2 * math.sin(abs(s - t) / 2), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    pts=st.lists(st.tuples(coord, coord), min_size=2, max_size=5, unique=True),
    m=st.integers(5, 500),
)
def test_uniform_polyline_normalizes(pts, m):
    pieces = [LinePiece(p, q) for p, q in zip(pts, pts[1:]) if math.dist(p, q) > 1e-3]
    if not pieces or any(a.p1 != b.p0 for a, b in zip(pieces, pieces[1:])):
        return
    curve = ParametricCurve(tuple(pieces))
    m = max(m, len(pieces))
    d = uniform_distribution(curve, m)
    assert d.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert d.probability(0.0, curve.total_length) == pytest.approx(1.0, abs=1e-12)


def test_probability_of_half_segment():
    d = make_segment(0.0, 2.0, 1_001)
    assert d.probability(0.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_quadrature_covers_every_piece():
    q = midpoint_quadrature(make_unit_triangle_boundary(99).curve, 3)
    assert sorted(q.piece.tolist()) == [0, 1, 2]
    with pytest.raises(DomainError):
        midpoint_quadrature(make_unit_triangle_boundary(99).curve, 2)


def test_triangle_mean_and_variance():
    mean, var = mean_and_variance(make_unit_triangle_boundary(3))
    np.testing.assert_allclose(mean, [0.5, math.sqrt(3) / 6], atol=1e-14)
    assert var == pytest.approx(1 / 6, abs=1e-14)


@pytest.mark.parametrize("m", [1, 7, 1000])
def test_circle_mean_and_variance_exact_at_any_resolution(m):
    mean, var = mean_and_variance(make_unit_circle(m))
    np.testing.assert_allclose(mean, [0.0, 0.0], atol=1e-14)
    assert var == pytest.approx(1.0, abs=1e-12)


def test_segment_variance():
    mean, var = mean_and_variance(make_segment(0.0, 3.0, 5))
    np.testing.assert_allclose(mean, [1.5, 0.0])
    assert var == pytest.approx(9 / 12)


def test_arc_moments_match_fine_sampling():
    arc = ArcPiece((0.3, -0.2), 1.7, 0.4, 2.9)
    mean, var = arc.moments(0.1, 2.5)
    u = np.linspace(0.1, 2.5, 200_001)
    u = 0.5 * (u[1:] + u[:-1])
    p = arc.point(u)
    np.testing.assert_allclose(mean, p.mean(axis=0), atol=1e-9)
    assert var == pytest.approx(np.mean(np.sum((p - p.mean(axis=0)) ** 2, axis=1)), rel=1e-8)


def test_short_arc_variance_has_no_cancellation():
    arc = ArcPiece((0, 0), 1.0, 0.0, 1.0)
    _, var = arc.moments(0.0, 1e-6)
    # short arcs look like segments: var ~ len^2 / 12
    assert var == pytest.approx(1e-12 / 12, rel=1e-6)


def test_curve_json_round_trip():
    d = make_unit_triangle_boundary(300)
    again = curve_from_json(d.curve.to_json(), 300)
    assert again.curve == d.curve
    np.testing.assert_array_equal(again.masses, d.masses)


@pytest.mark.parametrize(
    "bad",
    [
        {},
        {"pieces": 3},
        {"pieces": [{"kind": "spline"}]},
        {"pieces": [{"kind": "line", "p0": [0, 0]}]},
        {"pieces": [{"kind": "line", "p0": [0, 0], "p1": [1, 0]}], "density": "beta"},
    ],
)
def test_malformed_curve_json(bad):
    with pytest.raises(DomainError):
        curve_from_json(bad, 10)
