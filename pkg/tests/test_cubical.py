import numpy as np
import pytest

from eulersurf.complexes import brute_force_curve
from eulersurf.cubical import (
    build_cubical_complex,
    cell_value,
    derived_image,
    ecc_image,
    ecs_image_pair,
    naive_curve,
    naive_surface,
)
from eulersurf.errors import ValidationError


# --- cell values (min rule) ------------------------------------------------


def test_cell_value_single_square():
    assert cell_value([[7]], (0, 0), (1, 1)) == 7


def test_cell_value_shared_edge():
    # interior vertical edge between the two pixels of a 1x2 image
    assert cell_value([[3, 9]], (0, 1), (1, 0)) == 3


def test_cell_value_center_vertex():
    image = [[0, 255], [255, 0]]
    assert cell_value(image, (1, 1), (0, 0)) == 0


def test_cell_value_out_of_bounds():
    with pytest.raises(ValidationError):
        cell_value([[1, 2]], (0, 2), (1, 1))
    with pytest.raises(ValidationError):
        cell_value([[1, 2]], (0, 4), (0, 0))


# --- curves ------------------------------------------------------------------


def test_ecc_constant_image():
    curve = ecc_image(np.full((4, 5), 9, dtype=int), levels=16)
    expected = np.where(np.arange(16) >= 9, 1, 0)
    assert np.array_equal(curve.values, expected)


def test_ecc_two_bumps():
    curve = ecc_image(np.array([[0, 200, 0]]), levels=256)
    assert np.all(curve.values[:200] == 2)
    assert np.all(curve.values[200:] == 1)


def test_ecc_tops_out_at_one(rng):
    image = rng.integers(0, 32, (7, 5))
    curve = ecc_image(image, levels=32)
    assert curve.values[-1] == 1


def test_ecc_matches_naive_and_generic_oracle(rng):
    for _ in range(5):
        image = rng.integers(0, 8, (5, 6))
        fast = ecc_image(image, levels=8)
        assert np.array_equal(fast.values, naive_curve(image, 8).values)
        cx = build_cubical_complex(image)
        oracle = brute_force_curve(cx, np.arange(8))
        assert np.array_equal(fast.values, oracle.values)


def test_ecc_3d_constant():
    curve = ecc_image(np.full((2, 2, 2), 3, dtype=int), levels=8)
    assert np.array_equal(curve.values, np.where(np.arange(8) >= 3, 1, 0))


def test_ecc_3d_matches_naive(rng):
    image = rng.integers(0, 6, (4, 3, 4))
    fast = ecc_image(image, levels=6)
    assert np.array_equal(fast.values, naive_curve(image, 6).values)


# --- surfaces ----------------------------------------------------------------


def test_ecs_single_pixel_all_ones():
    surface = ecs_image_pair([[0]], [[0]], levels=256)
    assert surface.values.shape == (256, 256)
    assert np.all(surface.values == 1)


def test_ecs_diagonal_identity(rng):
    image = rng.integers(0, 12, (6, 7))
    surface = ecs_image_pair(image, image, levels=12)
    curve = ecc_image(image, levels=12)
    s, t = np.meshgrid(np.arange(12), np.arange(12), indexing="ij")
    assert np.array_equal(surface.values, curve.values[np.minimum(s, t)])


def test_ecs_matches_oracle_coarse_values_full_levels(rng):
    # 8 distinct intensities but the full 256x256 threshold grid
    image1 = rng.integers(0, 8, (4, 4)) * 31
    image2 = rng.integers(0, 8, (4, 4)) * 31
    fast = ecs_image_pair(image1, image2, levels=256)
    slow = naive_surface(image1, image2, levels=256)
    assert np.array_equal(fast.values, slow.values)


def test_ecs_matches_oracle_random(rng):
    for _ in range(8):
        shape = tuple(rng.integers(1, 9, 2))
        image1 = rng.integers(0, 8, shape)
        image2 = rng.integers(0, 8, shape)
        fast = ecs_image_pair(image1, image2, levels=8)
        slow = naive_surface(image1, image2, levels=8)
        assert np.array_equal(fast.values, slow.values)


def test_ecs_3d_matches_oracle_both_modes(rng):
    image1 = rng.integers(0, 6, (5, 5, 5))
    image2 = rng.integers(0, 6, (5, 5, 5))
    direct = ecs_image_pair(image1, image2, levels=6, mode="direct")
    eager = ecs_image_pair(image1, image2, levels=6, mode="table")
    slow = naive_surface(image1, image2, levels=6)
    assert np.array_equal(direct.values, slow.values)
    assert np.array_equal(eager.values, direct.values)


def test_ecs_worker_count_invariance(rng):
    image1 = rng.integers(0, 16, (9, 11))
    image2 = rng.integers(0, 16, (9, 11))
    lone = ecs_image_pair(image1, image2, levels=16, workers=1)
    multi = ecs_image_pair(image1, image2, levels=16, workers=3)
    assert np.array_equal(lone.values, multi.values)


def test_ecs_top_corner_is_one(rng):
    image1 = rng.integers(0, 10, (5, 4))
    image2 = rng.integers(0, 10, (5, 4))
    assert ecs_image_pair(image1, image2, levels=10).values[-1, -1] == 1


def test_ecs_shape_mismatch():
    with pytest.raises(ValidationError):
        ecs_image_pair(np.zeros((2, 2), int), np.zeros((2, 3), int), levels=4)


def test_ecs_intensity_out_of_range():
    with pytest.raises(ValidationError):
        ecs_image_pair(np.full((2, 2), 9, int), np.zeros((2, 2), int), levels=8)


# --- derived images ----------------------------------------------------------


def test_complement_of_black():
    image = np.zeros((3, 3), dtype=int)
    assert np.all(derived_image(image, "complement") == 255)


def test_laplacian_of_constant_is_zero_interior():
    image = np.full((5, 5), 40, dtype=int)
    lap = derived_image(image, "laplacian")
    assert np.all(lap[1:-1, 1:-1] == 0)


def test_laplacian_clamped_to_range():
    image = np.zeros((4, 4), dtype=int)
    image[1, 1] = 255
    lap = derived_image(image, "laplacian", levels=256)
    assert lap.max() <= 255 and lap.min() >= 0


def test_radial_gradient_center_zero():
    rad = derived_image(np.zeros((5, 7), dtype=int), "radial_gradient")
    assert rad[2, 3] == 0
    corners = [rad[0, 0], rad[0, -1], rad[-1, 0], rad[-1, -1]]
    assert all(c == 255 for c in corners)


def test_top_down_gradient_rows():
    grad = derived_image(np.zeros((28, 28), dtype=int), "top_down_gradient")
    rows = 255 * np.arange(28) // 28
    assert np.array_equal(grad, np.repeat(rows[:, None], 28, axis=1))
    assert np.all(grad[0] == 0)


def test_unknown_derived_kind():
    with pytest.raises(ValidationError):
        derived_image(np.zeros((2, 2), int), "sobel")
