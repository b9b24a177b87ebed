import math

import numpy as np
import pytest

from curvequant import closedform as cf
from curvequant.curve import DomainError
from curvequant.solver import canonical_residuals, distortion, verify_centroid_condition

S3 = math.sqrt(3)


def test_segment_single_point():
    res = cf.segment_codebook(0.0, 1.0, 1)
    np.testing.assert_array_equal(res.codebook.points, [[0.5, 0.0]])
    assert res.error == pytest.approx(1 / 12)


def test_segment_three_points():
    res = cf.segment_codebook(0.0, 1.0, 3)
    np.testing.assert_allclose(res.codebook.points[:, 0], [1 / 6, 1 / 2, 5 / 6])
    assert res.error == pytest.approx(1 / 108)


def test_segment_shifted():
    res = cf.segment_codebook(-2.0, 2.0, 2)
    np.testing.assert_allclose(res.codebook.points[:, 0], [-1.0, 1.0])
    assert res.error == pytest.approx(1 / 3)


def test_segment_rejects_bad_input():
    with pytest.raises(DomainError):
        cf.segment_codebook(0.0, 1.0, 0)
    with pytest.raises(DomainError):
        cf.segment_codebook(1.0, 0.0, 2)


def test_circle_one_point_is_origin():
    res = cf.circle_codebook(1)
    np.testing.assert_array_equal(res.codebook.points, [[0.0, 0.0]])
    assert res.error == pytest.approx(1.0, abs=1e-15)


def test_circle_three_points():
    res = cf.circle_codebook(3)
    assert res.error == pytest.approx(1 - 9 / math.pi**2 * math.sin(math.pi / 3) ** 2, rel=1e-14)
    np.testing.assert_allclose(np.linalg.norm(res.codebook.points, axis=1), 3 * S3 / (2 * math.pi))


def test_circle_error_large_n():
    assert cf.circle_error(1000) * 1000**2 == pytest.approx(math.pi**2 / 3, rel=1e-5)


def test_triangle_one_point():
    res = cf.triangle_small_n(1)
    np.testing.assert_allclose(res.codebook.points, [[0.5, S3 / 6]])
    assert res.error == pytest.approx(1 / 6)


def test_triangle_two_point_parameters():
    res = cf.triangle_small_n(2)
    alpha, beta = res.parameters["alpha"], res.parameters["beta"]
    assert alpha == pytest.approx((math.sqrt(17) - 1) / 8)
    assert beta == pytest.approx((1 + alpha) / 2, rel=1e-12)


def test_triangle_three_points():
    res = cf.triangle_small_n(3)
    np.testing.assert_allclose(sorted(map(tuple, res.codebook.points)), sorted([(13 / 16, S3 / 16), (1 / 2, 3 * S3 / 8), (3 / 16, S3 / 16)]))
    assert res.error == pytest.approx(7 / 192)


@pytest.mark.parametrize("n", range(1, 7))
def test_small_n_agrees_with_published_values(n, triangle):
    res = cf.triangle_small_n(n)
    pts, err = cf.PUBLISHED_TRIANGLE[n]
    assert abs(res.error - err) < 5e-6
    np.testing.assert_allclose(res.codebook.points, pts, atol=5e-6)
    assert distortion(triangle, res.codebook) == pytest.approx(res.error, rel=1e-12)


@pytest.mark.parametrize("n", range(1, 7))
def test_small_n_sets_are_fixed_points(n, triangle):
    assert verify_centroid_condition(triangle, cf.triangle_small_n(n).codebook) < 1e-9


@pytest.mark.parametrize("n", [0, 7, 8, 10, 11])
def test_unsupported_triangle_n(n):
    with pytest.raises(DomainError, match="1..6|positive"):
        cf.triangle_codebook(n)


def test_dispatch_to_family():
    assert cf.triangle_codebook(9).case_tag == "triangle-3k+3"
    assert cf.triangle_codebook(6).case_tag == "triangle-small-n"
    assert [n for n in range(1, 20) if cf.has_triangle_closed_form(n)] == [1, 2, 3, 4, 5, 6, 9, 12, 15, 18]


def test_trapezoid_ratio_range_and_monotonicity():
    r = np.array([cf.trapezoid_ratio(k) for k in range(1, 10_001)])
    assert np.all((r > 0) & (r < 0.5))
    assert np.all(np.diff(r) < 0)


def test_family_k1_matches_six_means():
    res = cf.triangle_3k3_codebook(1)
    assert res.error == pytest.approx(cf.triangle_small_n(6).error, rel=1e-12)
    assert res.codebook.n == 6


@pytest.mark.parametrize("k", [1, 2, 5, 12])
def test_family_error_and_fixed_point(k, triangle):
    res = cf.triangle_3k3_codebook(k)
    assert res.codebook.n == 3 * k + 3
    assert distortion(triangle, res.codebook) == pytest.approx(res.error, rel=1e-12)
    assert verify_centroid_condition(triangle, res.codebook) < 1e-9


def test_family_has_threefold_symmetry():
    pts = cf.triangle_3k3_codebook(4).codebook.points
    A, t = cf.rotation_about(cf.TRIANGLE_CENTROID, 2 * math.pi / 3)
    img = pts @ A.T + t
    gap = np.abs(img[:, None, :] - pts[None, :, :]).max(axis=-1).min(axis=1)
    assert gap.max() < 1e-12


def test_side_maps_carry_base_onto_other_sides():
    (M1, t1), (M2, t2) = cf.side_maps()
    np.testing.assert_allclose(M1 @ [0.0, 0.0] + t1, [0.5, S3 / 2])
    np.testing.assert_allclose(M1 @ [1.0, 0.0] + t1, [1.0, 0.0])
    np.testing.assert_allclose(M2 @ [1.0, 0.0] + t2, [0.0, 0.0])


def test_affine_similarity_scales_error():
    res = cf.segment_codebook(0.0, 1.0, 4)
    c = 3.0
    scaled = cf.transform_result(res, c * np.eye(2), [1.0, -2.0])
    assert scaled.error == pytest.approx(c * c * res.error)
    np.testing.assert_allclose(scaled.codebook.points, c * res.codebook.points + [1.0, -2.0])


def test_affine_singular_rejected():
    with pytest.raises(DomainError):
        cf.affine_transform(cf.circle_codebook(3).codebook, [[1, 2], [2, 4]], [0, 0])


@pytest.mark.parametrize("n", [1, 2, 5])
def test_segment_image(n):
    from curvequant.curve import LinePiece, ParametricCurve, uniform_distribution

    cb, err = cf.segment_image(n)
    assert err == pytest.approx(1 / (3 * n * n))
    d = uniform_distribution(ParametricCurve((LinePiece((0.0, 0.0), (1.0, S3)),)), 1000)
    assert distortion(d, cb) == pytest.approx(err, rel=1e-10)


def test_canonical_residuals_circle(circle):
    assert max(canonical_residuals(circle, cf.circle_codebook(4).codebook)) < 1e-9


def test_canonical_residuals_triangle_two_means(triangle):
    assert max(canonical_residuals(triangle, cf.triangle_small_n(2).codebook)) < 1e-6


def test_canonical_residuals_random_segment_codebook(segment):
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 1, 6))
    from curvequant.codebook import Codebook

    cb = Codebook(np.column_stack([x, np.zeros(6)]))
    # equidistance holds exactly at every switch even away from optimality
    assert max(canonical_residuals(segment, cb)) < 1e-12
