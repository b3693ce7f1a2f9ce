"""Euler characteristic curves, surfaces and terrains for images and point
clouds, with brute-force oracles, synthetic data generators, and
scikit-learn compatible transformers."""

from .complexes import (
    BifilteredComplex,
    Cell,
    EulerCurve,
    EulerSurface,
    brute_force_curve,
    brute_force_surface,
    euler_characteristic,
    sublevel_complex,
)
from .cubical import (
    build_cubical_complex,
    cell_value,
    change_table,
    derived_image,
    ecc_image,
    ecs_image_pair,
    naive_curve,
    naive_surface,
    neighborhood_index,
)
from .errors import (
    DataError,
    DegenerateInputError,
    EulersurfError,
    FormatError,
    InvariantError,
    UsageError,
    ValidationError,
)
from .estimators import (
    EulerFeaturizer,
    ImageEulerCurve,
    ImagePairEulerSurface,
    PointCloudEulerSurface,
)
from .generators import (
    gen_clayton_points,
    gen_copula_images_3d,
    gen_correlated_pair,
    gen_hawkes_cluster,
    gen_poisson,
)
from .simplicial import (
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
    uniform_grid,
    vietoris_rips,
)
from .stats import (
    Terrain,
    expected_random_pair_surface,
    featurize,
    fit_feature_stats,
    mean_surface,
    normalized_terrain,
    region_aggregate,
    resample_surface,
    std_surface,
    terrain,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
