"""Scikit-learn compatible transformers wrapping the curve/surface engines.

These make the characteristics drop into ordinary pipelines: transform a
batch of images or point clouds into flattened curves or surfaces, then feed
a downstream classifier.  `EulerFeaturizer` is the subsample-and-standardize
step used to turn curves/surfaces into compact feature vectors.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_image, check_levels, check_points
from .cubical import DERIVED_KINDS, derived_image, ecc_image, ecs_image_pair
from .errors import ValidationError
from .simplicial import (
    alpha_knn_bifiltration,
    ecs_points,
    uniform_grid,
)


class ImageEulerCurve(BaseEstimator, TransformerMixin):
    """Transform grayscale images into their intensity-threshold curves.

    Parameters
    ----------
    levels : int
        Number of intensity thresholds (curve length).
    """

    def __init__(self, levels=256):
        self.levels = levels

    def fit(self, X, y=None):
        check_levels(self.levels)
        self.n_features_out_ = self.levels
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        return np.stack(
            [ecc_image(check_image(img, self.levels), self.levels).values for img in X]
        )


class ImagePairEulerSurface(BaseEstimator, TransformerMixin):
    """Transform image pairs into flattened Euler characteristic surfaces.

    With ``second_image`` set, X holds single images and the partner is
    derived per sample (laplacian, top_down_gradient, complement,
    radial_gradient); otherwise X holds (image1, image2) pairs.
    """

    def __init__(self, levels=256, second_image=None, workers=1):
        self.levels = levels
        self.second_image = second_image
        self.workers = workers

    def fit(self, X, y=None):
        check_levels(self.levels)
        if self.second_image is not None and self.second_image not in DERIVED_KINDS:
            raise ValidationError(
                f"second_image must be one of {DERIVED_KINDS} or None"
            )
        self.n_features_out_ = self.levels * self.levels
        return self

    def _pair(self, sample):
        if self.second_image is not None:
            img = check_image(sample, self.levels)
            return img, derived_image(img, self.second_image, self.levels)
        img1, img2 = sample
        return img1, img2

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        rows = []
        for sample in X:
            img1, img2 = self._pair(sample)
            surface = ecs_image_pair(img1, img2, self.levels, workers=self.workers)
            rows.append(surface.values.reshape(-1))
        return np.stack(rows)


class PointCloudEulerSurface(BaseEstimator, TransformerMixin):
    """Transform planar point clouds into flattened alpha x density surfaces.

    ``fit`` pools the filtration values of the training clouds to build
    shared uniform grids, so every transformed sample lives on the same
    thresholds and ensembles can be averaged or differenced.
    """

    def __init__(self, k=3, grid_shape=(32, 32), jitter=False):
        self.k = k
        self.grid_shape = grid_shape
        self.jitter = jitter

    def _bifiltration(self, points):
        return alpha_knn_bifiltration(
            check_points(points, dim=2), k=self.k, jitter=self.jitter
        )

    def fit(self, X, y=None):
        h1_max = 0.0
        h2_max = 0.0
        for points in X:
            bifilt = self._bifiltration(points)
            h1_max = max(h1_max, float(bifilt.h1.max()))
            h2_max = max(h2_max, float(bifilt.h2.max()))
        m1, m2 = self.grid_shape
        self.grid1_ = uniform_grid(0.0, h1_max, m1)
        self.grid2_ = uniform_grid(0.0, h2_max, m2)
        return self

    def transform(self, X):
        check_is_fitted(self, "grid1_")
        rows = []
        for points in X:
            surface = ecs_points(self._bifiltration(points), self.grid1_, self.grid2_)
            rows.append(surface.values.reshape(-1))
        return np.stack(rows)


class EulerFeaturizer(BaseEstimator, TransformerMixin):
    """Subsample curves/surfaces with a stride and z-score the components.

    X rows are flat curves (2D input array) or flattened square surfaces;
    pass ``surface_shape`` to interpret rows as matrices and keep every
    stride-th row and column.  Components with zero deviation map to 0.
    """

    def __init__(self, stride=6, surface_shape=None, with_scaling=True):
        self.stride = stride
        self.surface_shape = surface_shape
        self.with_scaling = with_scaling

    def _subsample(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError("expected one flat curve/surface per row")
        if self.stride < 1:
            raise ValidationError("stride must be >= 1")
        if self.surface_shape is None:
            if self.stride > X.shape[1]:
                raise ValidationError("stride exceeds the curve length")
            return X[:, :: self.stride]
        m1, m2 = self.surface_shape
        if m1 * m2 != X.shape[1]:
            raise ValidationError(
                f"rows of length {X.shape[1]} do not match surface shape {m1}x{m2}"
            )
        if self.stride > min(m1, m2):
            raise ValidationError("stride exceeds the surface extent")
        sub = X.reshape(-1, m1, m2)[:, :: self.stride, :: self.stride]
        return sub.reshape(X.shape[0], -1)

    def fit(self, X, y=None):
        sub = self._subsample(X)
        self.mean_ = sub.mean(axis=0)
        self.scale_ = sub.std(axis=0)
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        sub = self._subsample(X)
        if not self.with_scaling:
            return sub
        out = np.zeros_like(sub)
        np.divide(
            sub - self.mean_, self.scale_, out=out, where=self.scale_ != 0
        )
        return out
