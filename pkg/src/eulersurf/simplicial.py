"""Point-cloud complexes, filtering functions, and the simplex-list scan.

Complexes are plain lists of simplices (sorted vertex-index tuples) with one
filtration value per simplex and per parameter.  The scan locates each
simplex's entry thresholds by binary search, drops its signed contribution at
that grid position, and recovers the surface with cumulative sums, so a
complex of n simplices costs O(n log m + m1 m2) instead of a recount per
threshold pair.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay as _SciPyDelaunay
from scipy.spatial import QhullError

from ._validation import check_grid, check_points
from .complexes import BifilteredComplex, Cell, EulerCurve, EulerSurface
from .errors import DegenerateInputError, ValidationError

JITTER_SCALE = 1e-9
_COCIRCULAR_RTOL = 1e-10
_FLAT_RTOL = 1e-12


@dataclass
class SimplicialBifiltration:
    """Simplices with two filtration values each, closed under faces."""

    simplices: list
    h1: np.ndarray
    h2: np.ndarray = None

    def __post_init__(self):
        self.simplices = [tuple(sorted(s)) for s in self.simplices]
        self.h1 = np.asarray(self.h1, dtype=np.float64)
        n = len(self.simplices)
        self.h2 = (
            np.zeros(n) if self.h2 is None else np.asarray(self.h2, dtype=np.float64)
        )
        if self.h1.shape != (n,) or self.h2.shape != (n,):
            raise ValidationError("need one value per simplex and per parameter")
        self.dims = np.array([len(s) - 1 for s in self.simplices], dtype=np.int64)
        self.validate()

    def __len__(self):
        return len(self.simplices)

    def validate(self):
        index = {s: i for i, s in enumerate(self.simplices)}
        if len(index) != len(self.simplices):
            raise ValidationError("duplicate simplices")
        for i, s in enumerate(self.simplices):
            if len(s) < 2:
                continue
            for face in itertools.combinations(s, len(s) - 1):
                j = index.get(face)
                if j is None:
                    raise ValidationError(f"missing face {face} of simplex {s}")
                if self.h1[j] > self.h1[i] or self.h2[j] > self.h2[i]:
                    raise ValidationError(f"values not monotone on face {face} of {s}")

    def to_complex(self):
        """Equivalent generic cell complex, for the brute-force oracles."""
        index = {s: i for i, s in enumerate(self.simplices)}
        cells = []
        for i, s in enumerate(self.simplices):
            faces = ()
            if len(s) > 1:
                faces = tuple(
                    index[f] for f in itertools.combinations(s, len(s) - 1)
                )
            cells.append(Cell(i, len(s) - 1, faces))
        return BifilteredComplex(cells, self.h1.copy(), self.h2.copy())


# ---------------------------------------------------------------------------
# complex constructions


def _circumcircle(a, b, c):
    """Center and radius of the circle through three points."""
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if d == 0:
        raise DegenerateInputError("collinear triangle has no circumcircle")
    a2, b2, c2 = np.dot(a, a), np.dot(b, b), np.dot(c, c)
    ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d
    uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d
    center = np.array([ux, uy])
    return center, float(np.linalg.norm(a - center))


def _incircle_det(a, b, c, d):
    m = np.array(
        [
            [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
            [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
            [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
        ]
    )
    return float(np.linalg.det(m))


def jitter_points(points, seed=0, scale=JITTER_SCALE):
    """Deterministic perturbation used to escape degenerate configurations."""
    points = check_points(points)
    span = np.linalg.norm(points.max(axis=0) - points.min(axis=0))
    rng = np.random.Generator(np.random.Philox(seed))
    return points + rng.uniform(-1.0, 1.0, points.shape) * scale * max(span, 1.0)


def delaunay_2d(points, jitter=False, jitter_seed=0):
    """Delaunay triangulation of planar points as a face-closed simplex list.

    Degenerate configurations (collinear hull chains, cocircular quadruples)
    raise DegenerateInputError rather than being silently perturbed; pass
    ``jitter=True`` to resolve ties with a recorded-seed perturbation of
    magnitude ~1e-9 of the bounding box (the perturbation only picks the
    triangulation; returned simplices index the original points).
    """
    points = check_points(points, dim=2)
    if points.shape[0] < 3:
        raise DegenerateInputError("need at least 3 points")
    coords = jitter_points(points, jitter_seed) if jitter else points
    try:
        tri = _SciPyDelaunay(coords)
    except QhullError as exc:
        raise DegenerateInputError(f"degenerate point configuration: {exc}") from exc
    if len(tri.coplanar):
        raise DegenerateInputError("input points dropped as coplanar/duplicate")
    used = np.unique(tri.simplices)
    if used.size != points.shape[0]:
        raise DegenerateInputError("triangulation does not use every input point")

    # Degeneracy thresholds scale with each local configuration (areas like
    # length^2, incircle determinants like length^4), so tight clusters of
    # points are not misflagged.
    triangles = [tuple(sorted(int(v) for v in s)) for s in tri.simplices]
    for t in triangles:
        a, b, c = coords[list(t)]
        edge = max(np.linalg.norm(b - a), np.linalg.norm(c - a), np.linalg.norm(c - b))
        u, v = b - a, c - a
        area = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        if area <= _FLAT_RTOL * edge**2:
            raise DegenerateInputError(f"triangle {t} is (nearly) collinear")
    for i, nbrs in enumerate(tri.neighbors):
        for nb in nbrs:
            if nb <= i:
                continue
            quad = coords[list(set(tri.simplices[i]) | set(tri.simplices[nb]))]
            scale = max(
                np.linalg.norm(p - q) for p, q in itertools.combinations(quad, 2)
            )
            a, b, c = (coords[v] for v in tri.simplices[i])
            opp = tri.simplices[nb][list(tri.neighbors[nb]).index(i)]
            if abs(_incircle_det(a, b, c, coords[opp])) <= _COCIRCULAR_RTOL * scale**4:
                raise DegenerateInputError(
                    "cocircular points detected; pass jitter=True to resolve"
                )

    simplices = [(int(v),) for v in range(points.shape[0])]
    edges = set()
    for t in triangles:
        edges.update(itertools.combinations(t, 2))
    simplices.extend(sorted(edges))
    simplices.extend(sorted(set(triangles)))
    return simplices


def alpha_filtration(points, simplices):
    """Radius at which each Delaunay simplex joins the union of balls.

    Vertices enter at 0 and triangles at their circumradius.  An edge enters
    at half its length when its diametral disk is empty (checked against the
    opposite vertices of the attached triangles, which suffices on a Delaunay
    complex), and otherwise with its earliest attached triangle.
    """
    points = check_points(points, dim=2)
    tri_radius = {}
    edge_tris = {}
    for s in simplices:
        if len(s) == 3:
            _, r = _circumcircle(*(points[v] for v in s))
            tri_radius[tuple(s)] = r
            for e in itertools.combinations(s, 2):
                edge_tris.setdefault(e, []).append(tuple(s))
    values = np.zeros(len(simplices))
    for i, s in enumerate(simplices):
        s = tuple(s)
        if len(s) == 1:
            continue
        if len(s) == 3:
            values[i] = tri_radius[s]
            continue
        a, b = points[s[0]], points[s[1]]
        mid = 0.5 * (a + b)
        r = 0.5 * float(np.linalg.norm(b - a))
        attached = edge_tris.get(s, [])
        opposite = [v for t in attached for v in t if v not in s]
        if all(np.linalg.norm(points[v] - mid) >= r for v in opposite):
            values[i] = r
        else:
            values[i] = min(tri_radius[t] for t in attached)
    return values


def knn_density_filter(points, k):
    """Root-mean-square distance to the k nearest neighbors, per vertex.

    Estimates inverse density; small where points crowd together.  Uses exact
    all-pairs distances.
    """
    points = check_points(points)
    n = points.shape[0]
    k = int(k)
    if not 0 < k < n:
        raise ValidationError(f"k must be in [1, {n - 1}], got {k}")
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    d2.sort(axis=1)
    return np.sqrt(d2[:, 1 : k + 1].mean(axis=1))


def height_filter(points, direction):
    """Inner product with a unit direction, per vertex."""
    points = check_points(points)
    direction = np.asarray(direction, dtype=np.float64)
    if direction.shape != (points.shape[1],):
        raise ValidationError("direction arity must match the points")
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise ValidationError("direction must be a unit vector")
    return points @ direction


def extend_by_max(simplices, vertex_values):
    """Extend a vertex function to all simplices by the max over vertices."""
    vertex_values = np.asarray(vertex_values, dtype=np.float64)
    return np.array([max(vertex_values[v] for v in s) for s in simplices])


def vietoris_rips(points, max_dim=2, max_radius=np.inf):
    """Vietoris-Rips simplices up to max_dim with their max-edge values."""
    points = check_points(points)
    if not 0 <= max_dim <= 3:
        raise ValidationError("max_dim must be in [0, 3]")
    n = points.shape[0]
    dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    simplices = [(i,) for i in range(n)]
    values = [0.0] * n
    if max_dim >= 1:
        for i, j in itertools.combinations(range(n), 2):
            if dist[i, j] <= max_radius:
                simplices.append((i, j))
                values.append(float(dist[i, j]))
    neighbors = [set(np.flatnonzero(dist[i] <= max_radius)) - {i} for i in range(n)]
    frontier = [s for s in simplices if len(s) == 2]
    for _ in range(2, max_dim + 1):
        new = []
        for s in frontier:
            common = set.intersection(*(neighbors[v] for v in s))
            for w in sorted(common):
                if w > s[-1]:
                    cand = s + (w,)
                    val = float(max(dist[a, b] for a, b in itertools.combinations(cand, 2)))
                    if val <= max_radius:
                        new.append((cand, val))
        for cand, val in new:
            simplices.append(cand)
            values.append(val)
        frontier = [c for c, _ in new]
    return simplices, np.array(values)


# ---------------------------------------------------------------------------
# grids and the scan


def unique_grid(values):
    """Default threshold grid: the sorted distinct filtration values."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise ValidationError("cannot build a grid from no values")
    return np.unique(values)


def uniform_grid(lo, hi, m):
    """Fixed uniform grid, for ensembles that must share thresholds."""
    if not hi > lo:
        raise ValidationError("grid upper bound must exceed lower bound")
    return np.linspace(float(lo), float(hi), int(m))


def ecs_points(filtration, grid1, grid2):
    """Euler characteristic surface of a simplicial bifiltration.

    Each simplex lands at the first grid entry at least its value (binary
    search; values beyond the grid maximum contribute nowhere), adds
    (-1)**dim over the rest of its row, and cumulative sums over columns
    assemble the characteristics.  Equals the brute-force recount.
    """
    grid1 = check_grid(grid1, "grid1")
    grid2 = check_grid(grid2, "grid2")
    s = np.searchsorted(grid1, filtration.h1, side="left")
    t = np.searchsorted(grid2, filtration.h2, side="left")
    keep = (s < grid1.size) & (t < grid2.size)
    signs = 1 - 2 * (filtration.dims % 2)
    deltas = np.zeros((grid1.size, grid2.size), dtype=np.int64)
    np.add.at(deltas, (s[keep], t[keep]), signs[keep])
    values = np.cumsum(np.cumsum(deltas, axis=1), axis=0)
    return EulerSurface(grid1, grid2, values)


def ecc_points(filtration, grid, which="h1"):
    """Euler characteristic curve of one parameter of a bifiltration."""
    grid = check_grid(grid)
    if which not in ("h1", "h2"):
        raise ValidationError("which must be 'h1' or 'h2'")
    h = filtration.h1 if which == "h1" else filtration.h2
    idx = np.searchsorted(grid, h, side="left")
    keep = idx < grid.size
    signs = 1 - 2 * (filtration.dims % 2)
    deltas = np.zeros(grid.size, dtype=np.int64)
    np.add.at(deltas, idx[keep], signs[keep])
    return EulerCurve(grid, np.cumsum(deltas))


def alpha_knn_bifiltration(points, k=3, jitter=False, jitter_seed=0):
    """Delaunay complex bifiltered by ball radius and kNN inverse density."""
    points = check_points(points, dim=2)
    simplices = delaunay_2d(points, jitter=jitter, jitter_seed=jitter_seed)
    h1 = alpha_filtration(points, simplices)
    h2 = extend_by_max(simplices, knn_density_filter(points, k))
    return SimplicialBifiltration(simplices, h1, h2)
