"""Seeded generators for the synthetic models: correlated uniform image
pairs, Clayton-copula samples and image pairs, and Poisson / Hawkes-cluster
point processes.

Every generator is a pure function of its parameters and a 64-bit seed,
backed by the counter-based Philox bit generator, so identical calls give
bit-identical output.
"""

import numpy as np

from ._validation import check_levels, check_positive, check_probability
from .errors import ValidationError

_TINY = np.finfo(np.float64).tiny


def _rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def gen_correlated_pair(n1, n2, p, levels=256, seed=0):
    """Pair of uniform random integer images with per-pixel correlation p.

    Each pixel draws x ~ U(0,1) plus two candidate intensities; with
    probability p both images share the first candidate, otherwise they get
    independent values.
    """
    p = check_probability(p)
    levels = check_levels(levels)
    rng = _rng(seed)
    x = rng.random((n1, n2))
    v1 = np.floor(rng.uniform(0, levels, (n1, n2))).astype(np.int64)
    v2 = np.floor(rng.uniform(0, levels, (n1, n2))).astype(np.int64)
    np.clip(v1, 0, levels - 1, out=v1)
    np.clip(v2, 0, levels - 1, out=v2)
    m1 = v1
    m2 = np.where(x <= p, v1, v2)
    return m1.copy(), m2


def gen_clayton_points(n, theta, levels=256, seed=0):
    """Points from a two-dimensional Clayton copula scaled to [0, levels)^2.

    Samples by conditional inversion: u ~ U(0,1), q ~ U(0,1), then
    w = ((q^(-theta/(1+theta)) - 1) * u^(-theta) + 1)^(-1/theta).  Kendall's
    tau of the pair is theta / (theta + 2).
    """
    theta = check_positive(theta, "theta")
    levels = check_levels(levels)
    rng = _rng(seed)
    u = np.maximum(rng.random(int(n)), _TINY)
    q = np.maximum(rng.random(int(n)), _TINY)
    w = (u ** (-theta) * (q ** (-theta / (1.0 + theta)) - 1.0) + 1.0) ** (-1.0 / theta)
    return np.column_stack([u, w]) * levels


def gen_copula_images_3d(n, theta, levels=256, seed=0):
    """Pair of n*n*n images whose voxel intensities are copula coordinates.

    The two coordinates of n**3 Clayton samples fill the two images in
    slice-row-major order, producing uniform marginals with dependence
    controlled by theta.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("n must be >= 1")
    points = gen_clayton_points(n**3, theta, levels, seed)
    m1 = np.floor(points[:, 0]).astype(np.int64).reshape(n, n, n)
    m2 = np.floor(points[:, 1]).astype(np.int64).reshape(n, n, n)
    np.clip(m1, 0, levels - 1, out=m1)
    np.clip(m2, 0, levels - 1, out=m2)
    return m1, m2


def gen_poisson(intensity, seed=0):
    """Poisson point process in the unit square."""
    intensity = check_positive(intensity, "intensity")
    rng = _rng(seed)
    count = rng.poisson(intensity)
    return rng.random((count, 2))


def gen_hawkes_cluster(parent_intensity, alpha, sigma, seed=0, clip=False):
    """Self-exciting cluster process in the plane.

    Parents form a Poisson process in the unit square; every point spawns
    Poisson(alpha) offspring displaced by an isotropic Gaussian with per-axis
    deviation sigma, recursively, so the expected total count is
    parent_intensity / (1 - alpha).  Offspring may leave the unit square;
    pass ``clip=True`` to discard those.
    """
    parent_intensity = check_positive(parent_intensity, "parent_intensity")
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValidationError(f"alpha must be in [0, 1), got {alpha}")
    sigma = check_positive(sigma, "sigma")
    rng = _rng(seed)
    count = rng.poisson(parent_intensity)
    parents = rng.random((count, 2))
    points, _ = _hawkes_branches(rng, parents, alpha, sigma)
    if clip:
        inside = np.all((points >= 0.0) & (points <= 1.0), axis=1)
        points = points[inside]
    return points


def _hawkes_branches(rng, parents, alpha, sigma):
    """Run the branching recursion; returns (all points, offspring offsets)."""
    generation = parents
    points = [generation]
    offsets = []
    while generation.shape[0]:
        litters = rng.poisson(alpha, generation.shape[0])
        total = int(litters.sum())
        if total == 0:
            break
        centers = np.repeat(generation, litters, axis=0)
        displacement = rng.normal(0.0, sigma, (total, 2))
        generation = centers + displacement
        points.append(generation)
        offsets.append(displacement)
    offsets = (
        np.concatenate(offsets, axis=0) if offsets else np.empty((0, 2))
    )
    return np.concatenate(points, axis=0), offsets
