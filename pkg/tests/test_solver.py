import math

import numpy as np
import pytest

from curvequant import closedform as cf
from curvequant.codebook import Codebook
from curvequant.curve import DomainError, make_segment, make_unit_triangle_boundary
from curvequant.solver import (
    EmptyCellError,
    SolverConfig,
    centroids,
    distortion,
    kmeanspp_init,
    lloyd_run,
    lloyd_solve,
    partition,
    search_nodes,
    switch_points,
    verify_centroid_condition,
    voronoi_assign,
)
from curvequant.verify import match_points, triangle_rotations


def test_distortion_single_center(segment):
    assert distortion(segment, Codebook([[0.5, 0.0]])) == pytest.approx(1 / 12, rel=1e-14)


def test_distortion_offset_center(segment):
    # E|X - p|^2 = var + |mean - p|^2
    assert distortion(segment, Codebook([[0.0, 1.0]])) == pytest.approx(1 / 12 + 0.25 + 1.0, rel=1e-14)


@pytest.mark.parametrize("m", [11, 97, 1000])
def test_distortion_exact_at_coarse_quadrature(m):
    d = make_segment(0.0, 1.0, m)
    cb = cf.segment_codebook(0.0, 1.0, 7).codebook
    assert distortion(d, cb) == pytest.approx(1 / (12 * 49), rel=1e-12)


def test_circle_distortion_matches_closed_form(circle):
    for n in (1, 2, 5, 12):
        res = cf.circle_codebook(n)
        assert distortion(circle, res.codebook) == pytest.approx(res.error, rel=1e-12)


def test_voronoi_ties_go_to_lowest_index():
    d = make_segment(0.0, 1.0, 2)
    labels = voronoi_assign(d, Codebook([[0.5, 1.0], [0.5, -1.0]]))
    assert labels.tolist() == [0, 0]


def test_centroids_raise_on_empty_cell(segment):
    labels = np.zeros(len(segment.masses), dtype=int)
    labels[-1] = 2
    with pytest.raises(EmptyCellError) as info:
        centroids(segment, labels)
    assert info.value.cells == [1]


def test_centroids_of_halves(segment):
    part = partition(segment, Codebook([[0.2, 0.0], [0.6, 0.0]]))
    np.testing.assert_allclose(centroids(segment, part), [[0.2, 0.0], [0.7, 0.0]], atol=1e-14)


def test_empty_cell_residual_is_infinite(segment):
    assert verify_centroid_condition(segment, Codebook([[0.5, 0.0], [5.0, 0.0]])) == math.inf


def test_switch_points_are_midpoints(segment):
    s = switch_points(segment, Codebook([[0.1, 0.0], [0.5, 0.0], [0.7, 0.0]]))
    np.testing.assert_allclose(s, [0.3, 0.6], atol=1e-14)


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(n=0)
    with pytest.raises(DomainError):
        SolverConfig(n=2, restarts=0)
    with pytest.raises(DomainError):
        SolverConfig(n=2, init="user")
    with pytest.raises(DomainError):
        SolverConfig(n=2, init="user", init_codebook=Codebook([[0.0, 0.0]]))
    with pytest.raises(DomainError):
        SolverConfig(n=2, init="random")


def test_n_larger_than_nodes():
    with pytest.raises(DomainError):
        lloyd_solve(make_segment(0.0, 1.0, 3), SolverConfig(n=4, restarts=1))


@pytest.mark.parametrize("seed", range(5))
def test_lloyd_descent_is_monotone(seed, triangle):
    rng = np.random.default_rng(seed)
    init = kmeanspp_init(triangle, 7, rng)
    hist = np.array(lloyd_run(triangle, init, max_iters=300).history)
    assert np.all(np.diff(hist) <= 1e-15)


def test_repair_moves_a_stranded_point(segment):
    run = lloyd_run(segment, Codebook([[0.5, 0.0], [40.0, 3.0]]), max_iters=500)
    assert run.converged
    assert np.all(run.cell_masses > 0)
    assert run.distortion == pytest.approx(1 / 48, rel=1e-9)


def test_circle_single_point(circle):
    res = lloyd_solve(circle, SolverConfig(n=1, restarts=2))
    np.testing.assert_allclose(res.codebook.points, [[0.0, 0.0]], atol=1e-12)
    assert res.distortion == pytest.approx(1.0, rel=1e-10)


def test_segment_solution(segment):
    res = lloyd_solve(segment, SolverConfig(n=6, restarts=4, seed=1))
    assert res.converged
    assert res.distortion == pytest.approx(1 / 432, rel=1e-7)
    np.testing.assert_allclose(np.sort(res.codebook.points[:, 0]), (2 * np.arange(1, 7) - 1) / 12, atol=1e-5)
    assert res.cell_masses.sum() == pytest.approx(1.0)


def test_triangle_four_means(triangle):
    res = lloyd_solve(triangle, SolverConfig(n=4, restarts=64, seed=7))
    assert abs(res.distortion - 0.028269) < 1e-4


def test_solver_is_deterministic(triangle, monkeypatch):
    cfg = SolverConfig(n=5, restarts=6, seed=11)
    monkeypatch.setenv("CURVEQUANT_THREADS", "1")
    a = lloyd_solve(triangle, cfg)
    monkeypatch.setenv("CURVEQUANT_THREADS", "3")
    b = lloyd_solve(triangle, cfg)
    assert a.codebook == b.codebook
    assert a.distortion == b.distortion
    assert a.restart == b.restart


def test_user_init_is_not_worsened(triangle):
    rng = np.random.default_rng(5)
    start = Codebook(rng.uniform(0, 1, size=(5, 2)))
    res = lloyd_solve(triangle, SolverConfig(n=5, init="user", init_codebook=start))
    assert res.distortion <= distortion(triangle, start)
    best = lloyd_solve(triangle, SolverConfig(n=5, restarts=16))
    assert best.distortion <= res.distortion + 1e-12


def test_search_nodes():
    d = make_segment(0.0, 1.0, 100_000)
    assert search_nodes(d, 4) == 1024
    assert search_nodes(d, 100) == 3200
    assert search_nodes(make_segment(0.0, 1.0, 500), 4) == 500


def test_nine_means_have_three_points_per_side(triangle):
    # the solver finds the balanced 3k+3 configuration unaided
    res = lloyd_solve(triangle, SolverConfig(n=9, restarts=64, seed=2))
    target = cf.triangle_3k3_codebook(2).codebook.points
    gap = min(match_points(res.codebook.points, img) for img in triangle_rotations(target))
    assert gap < 1e-4


def test_scaling_covariance():
    base = lloyd_solve(make_segment(0.0, 1.0, 5_000), SolverConfig(n=4, restarts=2))
    big = lloyd_solve(make_segment(0.0, 10.0, 5_000), SolverConfig(n=4, restarts=2))
    assert big.distortion == pytest.approx(100 * base.distortion, rel=1e-9)
    np.testing.assert_allclose(big.codebook.points, 10 * base.codebook.points, rtol=1e-9, atol=1e-12)


def test_result_json_fields(segment):
    res = lloyd_solve(segment, SolverConfig(n=2, restarts=1))
    obj = res.to_json()
    assert {"points", "distortion", "cell_masses", "centroid_residual", "iterations", "converged", "seed"} <= set(obj)


def test_non_convergence_is_reported(segment):
    res = lloyd_solve(segment, SolverConfig(n=8, restarts=1, max_iters=1))
    assert not res.converged
