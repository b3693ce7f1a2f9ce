"""Ensemble statistics over surfaces: means, terrains, analytic expectations,
region summaries, and featurization for downstream classifiers.

Standard deviations are population deviations (divide by N).  Ensembles must
share bitwise-identical grids; resample explicitly before mixing sources.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_levels, check_probability
from .complexes import EulerCurve, EulerSurface
from .errors import ValidationError

SD_CONVENTION = "population"


def _check_ensemble(surfaces):
    if not surfaces:
        raise ValidationError("ensemble is empty")
    g1, g2 = surfaces[0].grid1, surfaces[0].grid2
    for s in surfaces[1:]:
        if not (np.array_equal(s.grid1, g1) and np.array_equal(s.grid2, g2)):
            raise ValidationError("ensemble members have different grids")
    return np.stack([s.values for s in surfaces]).astype(np.float64), g1, g2


def mean_surface(surfaces):
    """Pointwise mean over an ensemble of surfaces on a common grid."""
    stack, _, _ = _check_ensemble(surfaces)
    return stack.mean(axis=0)


def std_surface(surfaces):
    """Pointwise population standard deviation over an ensemble."""
    stack, _, _ = _check_ensemble(surfaces)
    return stack.std(axis=0)


@dataclass
class Terrain:
    """Difference of two ensemble means, optionally sd-normalized.

    Cells where the normalization denominator vanishes against a nonzero
    numerator are undefined; they hold NaN, are flagged in ``sentinel_mask``,
    and their count lands in ``meta``.
    """

    grid1: np.ndarray
    grid2: np.ndarray
    values: np.ndarray
    kind: str = "raw"
    sentinel_mask: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sentinel_mask is None:
            self.sentinel_mask = np.zeros(self.values.shape, dtype=bool)
        self.meta.setdefault("kind", self.kind)
        self.meta.setdefault("sd", SD_CONVENTION)
        self.meta.setdefault("sentinels", int(self.sentinel_mask.sum()))


def terrain(ensemble_a, ensemble_b):
    """Pointwise difference of the two ensemble means."""
    stack_a, g1, g2 = _check_ensemble(ensemble_a)
    stack_b, g1b, g2b = _check_ensemble(ensemble_b)
    if not (np.array_equal(g1, g1b) and np.array_equal(g2, g2b)):
        raise ValidationError("ensembles live on different grids")
    return Terrain(g1, g2, stack_a.mean(axis=0) - stack_b.mean(axis=0), kind="raw")


def normalized_terrain(ensemble_a, ensemble_b):
    """Mean difference divided by the sum of the pointwise deviations.

    Where both deviations vanish the ratio is 0 when the numerator is 0 and a
    flagged sentinel (NaN) otherwise.
    """
    stack_a, g1, g2 = _check_ensemble(ensemble_a)
    stack_b, g1b, g2b = _check_ensemble(ensemble_b)
    if not (np.array_equal(g1, g1b) and np.array_equal(g2, g2b)):
        raise ValidationError("ensembles live on different grids")
    num = stack_a.mean(axis=0) - stack_b.mean(axis=0)
    denom = stack_a.std(axis=0) + stack_b.std(axis=0)
    zero = denom == 0
    sentinel = zero & (num != 0)
    values = np.zeros_like(num)
    np.divide(num, denom, out=values, where=~zero)
    values[sentinel] = np.nan
    return Terrain(g1, g2, values, kind="normalized", sentinel_mask=sentinel)


def expected_random_pair_surface(n1, n2, p, levels=256):
    """Expected surface of correlated uniform random image pairs.

    With pixel correlation ``p``, a top square sits below thresholds (s, t)
    with probability ``min(u, w) * p + u * w * (1 - p)`` where
    ``u = (s + 1) / levels`` and ``w = (t + 1) / levels``; lower cells are
    present when any covering square is, so linearity of expectation over the
    cell census gives the expected characteristic.
    """
    p = check_probability(p)
    levels = check_levels(levels)
    n1, n2 = int(n1), int(n2)
    if n1 < 1 or n2 < 1:
        raise ValidationError("image sides must be positive")
    u = (np.arange(levels, dtype=np.float64) + 1.0) / levels
    uu, ww = np.meshgrid(u, u, indexing="ij")
    p_square = np.minimum(uu, ww) * p + uu * ww * (1.0 - p)

    def present(count):
        return 1.0 - (1.0 - p_square) ** count

    n_vert_4 = (n1 - 1) * (n2 - 1)
    n_vert_2 = 2 * (n1 - 1) + 2 * (n2 - 1)
    n_vert_1 = 4
    n_edge_2 = n1 * (n2 + 1) + n2 * (n1 + 1) - 2 * n1 - 2 * n2
    n_edge_1 = 2 * n1 + 2 * n2
    expected = (
        n_vert_4 * present(4)
        + n_vert_2 * present(2)
        + n_vert_1 * present(1)
        - n_edge_2 * present(2)
        - n_edge_1 * present(1)
        + n1 * n2 * p_square
    )
    return expected


def resample_surface(surface, grid1, grid2):
    """Re-index a surface onto new grids via the nearest lower threshold.

    Surfaces are step functions of their thresholds, so the value at a new
    threshold is the value at the largest original threshold not above it.
    New thresholds below the recorded range are an error; mixing ensembles is
    always done through this explicit step, never silently.
    """
    from .complexes import EulerSurface

    grid1 = np.asarray(grid1, dtype=np.float64)
    grid2 = np.asarray(grid2, dtype=np.float64)
    idx1 = np.searchsorted(surface.grid1, grid1, side="right") - 1
    idx2 = np.searchsorted(surface.grid2, grid2, side="right") - 1
    if (idx1 < 0).any() or (idx2 < 0).any():
        raise ValidationError("cannot resample below the recorded threshold range")
    return EulerSurface(grid1, grid2, surface.values[np.ix_(idx1, idx2)])


def region_aggregate(terrain_, rect=None, min_abs=None):
    """Summary statistics over a region of a terrain.

    ``rect`` selects grid-index ranges ((s0, s1), (t0, t1)), half-open;
    ``min_abs`` keeps cells with ``|value| >= min_abs``.  Sentinel cells are
    excluded.  Raises if nothing remains.
    """
    values = terrain_.values
    selected = ~terrain_.sentinel_mask
    if rect is not None:
        (s0, s1), (t0, t1) = rect
        box = np.zeros_like(selected)
        box[s0:s1, t0:t1] = True
        selected &= box
    if min_abs is not None:
        selected &= np.abs(np.where(np.isnan(values), 0.0, values)) >= float(min_abs)
    if not selected.any():
        raise ValidationError("region is empty")
    picked = values[selected]
    flat_arg = np.flatnonzero(selected)[np.argmax(picked)]
    argmax_cell = np.unravel_index(flat_arg, values.shape)
    return {
        "mean": float(picked.mean()),
        "max": float(picked.max()),
        "argmax": (int(argmax_cell[0]), int(argmax_cell[1])),
        "count": int(picked.size),
    }


# ---------------------------------------------------------------------------
# featurization


def _subsample(obj, stride):
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    if isinstance(obj, EulerCurve):
        data = obj.values
        if stride > data.size:
            raise ValidationError("stride exceeds the curve length")
        return data[::stride].astype(np.float64)
    if isinstance(obj, EulerSurface):
        data = obj.values
        if stride > min(data.shape):
            raise ValidationError("stride exceeds the surface extent")
        return data[::stride, ::stride].reshape(-1).astype(np.float64)
    data = np.asarray(obj)
    if data.ndim == 1:
        return data[::stride].astype(np.float64)
    if data.ndim == 2:
        return data[::stride, ::stride].reshape(-1).astype(np.float64)
    raise ValidationError("featurize expects a curve or a surface")


def fit_feature_stats(objects, stride):
    """Per-component mean and population sd of the subsampled features."""
    feats = np.stack([_subsample(o, stride) for o in objects])
    return feats.mean(axis=0), feats.std(axis=0)


def featurize(obj, stride, mean=None, sd=None):
    """Subsample a curve (every stride-th entry) or surface (every stride-th
    row and column, rows concatenated) into a feature vector.

    When ``mean``/``sd`` from `fit_feature_stats` are given, components are
    z-scored; zero-sd components map to 0.
    """
    vec = _subsample(obj, stride)
    if mean is None and sd is None:
        return vec
    mean = np.asarray(mean, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    if mean.shape != vec.shape or sd.shape != vec.shape:
        raise ValidationError("normalization stats do not match the feature shape")
    out = np.zeros_like(vec)
    np.divide(vec - mean, sd, out=out, where=sd != 0)
    return out
