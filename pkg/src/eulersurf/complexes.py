"""Cell complexes, Euler characteristics, and brute-force filtration oracles.

This module is the reference layer: everything here favors clarity over
speed, because the fast scan algorithms are tested against it.  A complex is
a flat list of cells, each carrying a dimension, the ids of its faces, and a
pair of filtration values.  Sublevel sets are taken with closed thresholds
(``<=``), so a cell whose value equals the threshold is included.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_grid
from .errors import ValidationError


@dataclass(frozen=True)
class Cell:
    """A single cell: unique id, dimension, and face ids (one dim lower or less)."""

    id: int
    dim: int
    faces: tuple = ()


@dataclass
class EulerCurve:
    """Euler characteristics of the sublevel sets at each grid threshold."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = check_grid(self.grid)
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                f"curve has {self.values.shape} values for {self.grid.shape} thresholds"
            )


@dataclass
class EulerSurface:
    """Euler characteristics over a two-parameter threshold grid.

    ``values[s, t]`` is the Euler characteristic of the sublevel set at
    ``(grid1[s], grid2[t])``.
    """

    grid1: np.ndarray
    grid2: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid1 = check_grid(self.grid1, "grid1")
        self.grid2 = check_grid(self.grid2, "grid2")
        self.values = np.asarray(self.values)
        expected = (self.grid1.size, self.grid2.size)
        if self.values.shape != expected:
            raise ValidationError(
                f"surface shape {self.values.shape} does not match grids {expected}"
            )

    @property
    def shape(self):
        return self.values.shape

    def transpose(self):
        return EulerSurface(self.grid2.copy(), self.grid1.copy(), self.values.T.copy())

    def last_row_curve(self):
        """Curve of the second parameter: the last row of the surface."""
        return EulerCurve(self.grid2.copy(), self.values[-1, :].copy())

    def last_column_curve(self):
        """Curve of the first parameter: the last column of the surface."""
        return EulerCurve(self.grid1.copy(), self.values[:, -1].copy())


@dataclass
class BifilteredComplex:
    """A cell complex with a pair of filtration values per cell.

    Invariants checked at construction: cell ids are unique, faces reference
    existing cells of strictly lower dimension, and both value functions are
    monotone (a face never has a larger value than any cell it bounds).
    """

    cells: list = field(default_factory=list)
    h1: np.ndarray = None
    h2: np.ndarray = None

    def __post_init__(self):
        n = len(self.cells)
        self.h1 = np.zeros(n) if self.h1 is None else np.asarray(self.h1, dtype=np.float64)
        self.h2 = np.zeros(n) if self.h2 is None else np.asarray(self.h2, dtype=np.float64)
        if self.h1.shape != (n,) or self.h2.shape != (n,):
            raise ValidationError("value arrays must have one entry per cell")
        self._index = {c.id: i for i, c in enumerate(self.cells)}
        if len(self._index) != n:
            raise ValidationError("cell ids are not unique")
        self.dims = np.array([c.dim for c in self.cells], dtype=np.int64)
        self.validate()

    def __len__(self):
        return len(self.cells)

    def validate(self):
        """Re-check face references and monotonicity; raises ValidationError."""
        for c in self.cells:
            i = self._index[c.id]
            for f in c.faces:
                j = self._index.get(f)
                if j is None:
                    raise ValidationError(f"cell {c.id} references missing face {f}")
                if self.cells[j].dim >= c.dim:
                    raise ValidationError(
                        f"face {f} of cell {c.id} does not have lower dimension"
                    )
                if self.h1[j] > self.h1[i] or self.h2[j] > self.h2[i]:
                    raise ValidationError(
                        f"values are not monotone on face {f} of cell {c.id}"
                    )

    def sublevel_mask(self, s, t=np.inf):
        return (self.h1 <= s) & (self.h2 <= t)


def euler_characteristic(cells):
    """Alternating sum of cell counts by dimension; 0 for an empty complex.

    Accepts a BifilteredComplex, an iterable of Cell, or an array of cell
    dimensions.
    """
    if isinstance(cells, BifilteredComplex):
        dims = cells.dims
    else:
        cells = list(cells)
        if cells and isinstance(cells[0], Cell):
            dims = np.array([c.dim for c in cells], dtype=np.int64)
        else:
            dims = np.asarray(cells, dtype=np.int64)
    if dims.size == 0:
        return 0
    return int(np.sum(1 - 2 * (dims % 2)))


def sublevel_complex(complex_, s, t=np.inf):
    """Cells with h1 <= s and h2 <= t.  Face-closed because the complex is monotone."""
    mask = complex_.sublevel_mask(s, t)
    return [c for c, m in zip(complex_.cells, mask) if m]


def brute_force_curve(complex_, grid):
    """Oracle curve: recount the Euler characteristic at every threshold.

    Only the first filtration value is used.  Intentionally naive.
    """
    grid = check_grid(grid)
    values = np.zeros(grid.size, dtype=np.int64)
    signs = 1 - 2 * (complex_.dims % 2)
    for i, a in enumerate(grid):
        values[i] = int(np.sum(signs[complex_.h1 <= a]))
    return EulerCurve(grid, values)


def brute_force_surface(complex_, grid1, grid2):
    """Oracle surface: independent recount at every threshold pair."""
    grid1 = check_grid(grid1, "grid1")
    grid2 = check_grid(grid2, "grid2")
    values = np.zeros((grid1.size, grid2.size), dtype=np.int64)
    signs = 1 - 2 * (complex_.dims % 2)
    for i, a in enumerate(grid1):
        under_a = complex_.h1 <= a
        for j, b in enumerate(grid2):
            values[i, j] = int(np.sum(signs[under_a & (complex_.h2 <= b)]))
    return EulerSurface(grid1, grid2, values)


def disjoint_union(a, b):
    """New complex containing a and b side by side with re-numbered ids."""
    offset = (max((c.id for c in a.cells), default=-1)) + 1
    cells = list(a.cells) + [
        Cell(c.id + offset, c.dim, tuple(f + offset for f in c.faces)) for c in b.cells
    ]
    return BifilteredComplex(
        cells,
        np.concatenate([a.h1, b.h1]),
        np.concatenate([a.h2, b.h2]),
    )
