"""Input validation helpers used by the estimators, engines and CLI."""

import numpy as np

from .errors import ValidationError


def check_levels(levels):
    levels = int(levels)
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}")
    return levels


def check_image(image, levels=None, ndim=None, name="image"):
    """Validate a grayscale image and return it as a C-contiguous int array.

    Intensities must be non-negative integers; when ``levels`` is given they
    must lie in ``[0, levels)``.
    """
    arr = np.asarray(image)
    if arr.ndim not in (2, 3):
        raise ValidationError(f"{name} must be 2D or 3D, got ndim={arr.ndim}")
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValidationError(f"{name} is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.floor(arr)):
            arr = arr.astype(np.int64)
        else:
            raise ValidationError(f"{name} must have integer intensities")
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    if arr.min() < 0:
        raise ValidationError(f"{name} has negative intensities")
    if levels is not None and arr.max() >= levels:
        raise ValidationError(
            f"{name} has intensity {arr.max()} >= levels={levels}"
        )
    return arr


def check_image_pair(image1, image2, levels=None):
    a = check_image(image1, levels, name="image1")
    b = check_image(image2, levels, name="image2")
    if a.shape != b.shape:
        raise ValidationError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def check_grid(grid, name="grid"):
    """Validate a threshold grid: non-empty, strictly increasing reals."""
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1D array")
    if g.size > 1 and not np.all(np.diff(g) > 0):
        raise ValidationError(f"{name} must be strictly increasing")
    return g


def check_points(points, dim=None, name="points"):
    """Validate a point cloud: finite, pairwise distinct coordinates."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValidationError(f"{name} must have shape (n, 2) or (n, 3)")
    if dim is not None and pts.shape[1] != dim:
        raise ValidationError(f"{name} must be {dim}-dimensional")
    if not np.all(np.isfinite(pts)):
        raise ValidationError(f"{name} contains non-finite coordinates")
    uniq = np.unique(pts, axis=0)
    if uniq.shape[0] != pts.shape[0]:
        raise ValidationError(f"{name} contains duplicate points")
    return pts


def check_probability(p, name="p"):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"{name} must be in [0, 1], got {p}")
    return p


def check_positive(x, name):
    x = float(x)
    if not x > 0:
        raise ValidationError(f"{name} must be > 0, got {x}")
    return x
