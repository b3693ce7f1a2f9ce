import numpy as np
import pytest

from eulersurf.complexes import brute_force_curve, brute_force_surface
from eulersurf.errors import DegenerateInputError, ValidationError
from eulersurf.simplicial import (
    SimplicialBifiltration,
    alpha_filtration,
    alpha_knn_bifiltration,
    delaunay_2d,
    ecc_points,
    ecs_points,
    extend_by_max,
    height_filter,
    knn_density_filter,
    unique_grid,
    vietoris_rips,
)

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])


def _counts(simplices):
    counts = [0, 0, 0]
    for s in simplices:
        counts[len(s) - 1] += 1
    return counts


# --- Delaunay ----------------------------------------------------------------


def test_delaunay_triangle():
    assert _counts(delaunay_2d(EQUILATERAL)) == [3, 3, 1]


def test_delaunay_square_is_degenerate_without_jitter():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(DegenerateInputError):
        delaunay_2d(square)
    simplices = delaunay_2d(square, jitter=True)
    assert _counts(simplices) == [4, 5, 2]
    assert sum((-1) ** (len(s) - 1) for s in simplices) == 1


def test_delaunay_collinear_rejected():
    line = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DegenerateInputError):
        delaunay_2d(line)


def test_delaunay_random_is_contractible(rng):
    points = rng.random((50, 2))
    simplices = delaunay_2d(points)
    assert sum((-1) ** (len(s) - 1) for s in simplices) == 1


def test_delaunay_empty_circumcircle(rng):
    points = rng.random((30, 2))
    simplices = delaunay_2d(points)
    from eulersurf.simplicial import _circumcircle

    for s in simplices:
        if len(s) != 3:
            continue
        center, radius = _circumcircle(*(points[v] for v in s))
        others = np.setdiff1d(np.arange(30), s)
        dists = np.linalg.norm(points[others] - center, axis=1)
        assert np.all(dists >= radius * (1 - 1e-9))


# --- filtering functions -------------------------------------------------------


def test_alpha_equilateral():
    simplices = delaunay_2d(EQUILATERAL)
    values = dict(zip(simplices, alpha_filtration(EQUILATERAL, simplices)))
    assert values[(0, 1)] == pytest.approx(0.5)
    assert values[(0, 2)] == pytest.approx(0.5)
    assert values[(0, 1, 2)] == pytest.approx(1 / np.sqrt(3))


def test_alpha_vertices_zero(rng):
    points = rng.random((20, 2))
    simplices = delaunay_2d(points)
    values = alpha_filtration(points, simplices)
    for s, v in zip(simplices, values):
        if len(s) == 1:
            assert v == 0.0


def test_alpha_obtuse_non_gabriel():
    points = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 0.1]])
    simplices = delaunay_2d(points)
    values = dict(zip(simplices, alpha_filtration(points, simplices)))
    # the long edge's diametral disk contains the apex, so it enters with the
    # triangle's circumradius instead of half its own length
    assert values[(0, 1)] == pytest.approx(values[(0, 1, 2)])
    assert values[(0, 1)] > 2.0


def test_alpha_monotone(rng):
    points = rng.random((40, 2))
    simplices = delaunay_2d(points)
    SimplicialBifiltration(simplices, alpha_filtration(points, simplices))


def test_knn_uniform_ring():
    # four neighbors all at distance 2 from the center point
    points = np.array([[0.0, 0.0], [2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, -2.0]])
    assert knn_density_filter(points, 4)[0] == pytest.approx(2.0)


def test_knn_collinear():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert knn_density_filter(points, 1) == pytest.approx([1.0, 1.0, 1.0])
    assert knn_density_filter(points, 2) == pytest.approx(
        [np.sqrt(2.5), 1.0, np.sqrt(2.5)]
    )


def test_knn_k_too_large():
    with pytest.raises(ValidationError):
        knn_density_filter(np.array([[0.0, 0.0], [1.0, 1.0]]), 2)


def test_height_filter_basic():
    points = np.array([[3.0, 7.0], [1.0, -2.0]])
    values = height_filter(points, [1.0, 0.0])
    assert values == pytest.approx([3.0, 1.0])
    assert height_filter(points, [-1.0, 0.0]) == pytest.approx(-values)


def test_height_extends_by_max():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    heights = height_filter(points, [0.0, 1.0])
    assert extend_by_max([(0, 1, 2)], heights)[0] == 2.0


def test_height_requires_unit_direction():
    with pytest.raises(ValidationError):
        height_filter(np.array([[0.0, 0.0], [1.0, 1.0]]), [1.0, 1.0])


def test_vietoris_rips_radius_cutoff():
    points = np.array([[0.0, 0.0], [2.0, 0.0]])
    simplices, _ = vietoris_rips(points, max_dim=2, max_radius=1.0)
    assert simplices == [(0,), (1,)]


def test_vietoris_rips_triangle():
    simplices, values = vietoris_rips(EQUILATERAL, max_dim=2)
    table = dict(zip(simplices, values))
    assert table[(0, 1, 2)] == pytest.approx(1.0)


def test_vietoris_rips_square_cycle():
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    simplices, values = vietoris_rips(square, max_dim=1)
    table = dict(zip(simplices, values))
    sides = [(0, 1), (1, 2), (2, 3), (0, 3)]
    for e in sides:
        assert table[e] == pytest.approx(1.0)
    for e in [(0, 2), (1, 3)]:
        assert table[e] == pytest.approx(np.sqrt(2.0))


# --- the scan ------------------------------------------------------------------


def test_ecs_points_empty_complex():
    filtration = SimplicialBifiltration([], np.zeros(0), np.zeros(0))
    surface = ecs_points(filtration, [0.0, 1.0], [0.0, 1.0])
    assert not surface.values.any()


def test_ecs_points_single_vertex_indicator():
    filtration = SimplicialBifiltration([(0,)], np.array([1.0]), np.array([2.0]))
    surface = ecs_points(filtration, [0, 1, 2], [0, 1, 2])
    assert surface.values.tolist() == [[0, 0, 0], [0, 0, 1], [0, 0, 1]]


def test_ecs_points_value_above_grid_contributes_nowhere():
    filtration = SimplicialBifiltration([(0,), (1,)], np.array([0.0, 5.0]))
    surface = ecs_points(filtration, [0.0, 1.0], [0.0])
    assert surface.values.tolist() == [[1], [1]]


def test_ecs_points_matches_oracle(rng):
    points = rng.random((20, 2))
    bifilt = alpha_knn_bifiltration(points, k=3)
    grid1 = unique_grid(bifilt.h1)
    grid2 = unique_grid(bifilt.h2)
    fast = ecs_points(bifilt, grid1, grid2)
    slow = brute_force_surface(bifilt.to_complex(), grid1, grid2)
    assert np.array_equal(fast.values, slow.values)


def test_ecs_points_transpose_symmetry(rng):
    points = rng.random((15, 2))
    bifilt = alpha_knn_bifiltration(points, k=2)
    grid1 = unique_grid(bifilt.h1)
    grid2 = unique_grid(bifilt.h2)
    forward = ecs_points(bifilt, grid1, grid2)
    swapped = SimplicialBifiltration(bifilt.simplices, bifilt.h2, bifilt.h1)
    backward = ecs_points(swapped, grid2, grid1)
    assert np.array_equal(forward.values, backward.values.T)


def test_ecs_points_grid_refinement(rng):
    points = rng.random((18, 2))
    bifilt = alpha_knn_bifiltration(points, k=3)
    fine1 = unique_grid(bifilt.h1)
    fine2 = unique_grid(bifilt.h2)
    coarse1 = fine1[::2]
    coarse2 = fine2[::3]
    fine = ecs_points(bifilt, fine1, fine2)
    coarse = ecs_points(bifilt, coarse1, coarse2)
    assert np.array_equal(coarse.values, fine.values[::2, ::3])


def test_ecc_points_equilateral_alpha():
    simplices = delaunay_2d(EQUILATERAL)
    values = alpha_filtration(EQUILATERAL, simplices)
    filtration = SimplicialBifiltration(simplices, values)
    curve = ecc_points(filtration, [0.0, 0.5, 1 / np.sqrt(3)])
    assert curve.values.tolist() == [3, 0, 1]


def test_ecc_points_single_vertex():
    filtration = SimplicialBifiltration([(0,)], np.array([0.7]))
    curve = ecc_points(filtration, [0.0, 1.0])
    assert curve.values.tolist() == [0, 1]


def test_ecc_points_full_complex_contractible(rng):
    points = rng.random((30, 2))
    bifilt = alpha_knn_bifiltration(points, k=3)
    curve = ecc_points(bifilt, unique_grid(bifilt.h1), which="h1")
    assert curve.values[-1] == 1
    oracle = brute_force_curve(bifilt.to_complex(), unique_grid(bifilt.h1))
    assert np.array_equal(curve.values, oracle.values)


def test_non_monotone_filtration_rejected():
    with pytest.raises(ValidationError):
        SimplicialBifiltration(
            [(0,), (1,), (0, 1)], np.array([1.0, 0.0, 0.5]), np.zeros(3)
        )


def test_missing_face_rejected():
    with pytest.raises(ValidationError):
        SimplicialBifiltration([(0,), (0, 1)], np.array([0.0, 1.0]))
