import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import Pipeline
from sklearn.utils.estimator_checks import check_get_params_invariance

from eulersurf.cubical import derived_image, ecc_image, ecs_image_pair
from eulersurf.errors import ValidationError
from eulersurf.estimators import (
    EulerFeaturizer,
    ImageEulerCurve,
    ImagePairEulerSurface,
    PointCloudEulerSurface,
)
from eulersurf.generators import gen_correlated_pair, gen_hawkes_cluster, gen_poisson


def test_get_params_roundtrip():
    for est in (
        ImageEulerCurve(levels=32),
        ImagePairEulerSurface(levels=16, second_image="complement"),
        PointCloudEulerSurface(k=4, grid_shape=(8, 8)),
        EulerFeaturizer(stride=3),
    ):
        params = est.get_params()
        rebuilt = clone(est)
        assert rebuilt.get_params() == params
        check_get_params_invariance(type(est).__name__, est)


def test_transform_requires_fit():
    with pytest.raises(NotFittedError):
        ImageEulerCurve().transform([np.zeros((2, 2), dtype=int)])
    with pytest.raises(NotFittedError):
        EulerFeaturizer().transform(np.zeros((2, 8)))


def test_image_curve_transform_matches_function(rng):
    images = [rng.integers(0, 16, (6, 6)) for _ in range(3)]
    out = ImageEulerCurve(levels=16).fit(images).transform(images)
    assert out.shape == (3, 16)
    for row, img in zip(out, images):
        assert np.array_equal(row, ecc_image(img, 16).values)


def test_image_pair_surface_with_pairs(rng):
    pairs = [
        (rng.integers(0, 8, (5, 5)), rng.integers(0, 8, (5, 5))) for _ in range(2)
    ]
    out = ImagePairEulerSurface(levels=8).fit(pairs).transform(pairs)
    assert out.shape == (2, 64)
    expected = ecs_image_pair(pairs[0][0], pairs[0][1], 8).values.reshape(-1)
    assert np.array_equal(out[0], expected)


def test_image_pair_surface_derived(rng):
    images = [rng.integers(0, 16, (6, 6)) for _ in range(2)]
    est = ImagePairEulerSurface(levels=16, second_image="complement").fit(images)
    out = est.transform(images)
    expected = ecs_image_pair(
        images[0], derived_image(images[0], "complement", 16), 16
    ).values.reshape(-1)
    assert np.array_equal(out[0], expected)


def test_image_pair_surface_bad_kind():
    with pytest.raises(ValidationError):
        ImagePairEulerSurface(second_image="sobel").fit([])


def test_point_cloud_surface_shared_grids(rng):
    clouds = [rng.random((25, 2)) for _ in range(3)]
    est = PointCloudEulerSurface(k=3, grid_shape=(10, 12)).fit(clouds)
    out = est.transform(clouds)
    assert out.shape == (3, 120)
    assert est.grid1_.size == 10 and est.grid2_.size == 12
    # full complexes are contractible, so the last threshold cell is 1
    assert np.all(out[:, -1] == 1)


def test_featurizer_matches_stats_functions(rng):
    X = rng.integers(-4, 4, (5, 12)).astype(float)
    feat = EulerFeaturizer(stride=6).fit(X)
    out = feat.transform(X)
    assert out.shape == (5, 2)
    assert np.allclose(out.mean(axis=0), 0.0, atol=1e-12)


def test_featurizer_surface_shape(rng):
    X = rng.integers(0, 5, (4, 36)).astype(float)
    feat = EulerFeaturizer(stride=3, surface_shape=(6, 6), with_scaling=False)
    out = feat.fit(X).transform(X)
    assert out.shape == (4, 4)
    assert np.array_equal(out[0], X[0].reshape(6, 6)[::3, ::3].reshape(-1))


def test_featurizer_constant_component_zero(rng):
    X = np.column_stack([np.full(6, 7.0), rng.normal(0, 1, 6)])
    out = EulerFeaturizer(stride=1).fit(X).transform(X)
    assert np.all(out[:, 0] == 0.0)


def test_pipeline_classifies_correlation_strength():
    # the workflow the surfaces exist for: surfaces -> featurize -> classifier
    levels, n = 8, 12
    X, y = [], []
    for i in range(40):
        p = 0.05 if i % 2 == 0 else 0.95
        X.append(gen_correlated_pair(n, n, p, levels, seed=i))
        y.append(i % 2)
    pipe = Pipeline(
        [
            ("surface", ImagePairEulerSurface(levels=levels)),
            ("features", EulerFeaturizer(stride=2, surface_shape=(levels, levels))),
            ("clf", LogisticRegression(max_iter=1000)),
        ]
    )
    pipe.fit(X[:30], y[:30])
    assert pipe.score(X[30:], y[30:]) >= 0.8


def test_pipeline_classifies_point_processes():
    clouds, labels = [], []
    for i in range(24):
        if i % 2 == 0:
            clouds.append(gen_poisson(120, seed=40 + i))
            labels.append(0)
        else:
            clouds.append(gen_hawkes_cluster(84, 0.3, 0.02, seed=40 + i))
            labels.append(1)
    pipe = Pipeline(
        [
            ("surface", PointCloudEulerSurface(k=3, grid_shape=(12, 12))),
            ("scale", EulerFeaturizer(stride=1)),
            ("clf", LogisticRegression(max_iter=2000)),
        ]
    )
    pipe.fit(clouds[:16], labels[:16])
    assert pipe.score(clouds[16:], labels[16:]) >= 0.75
