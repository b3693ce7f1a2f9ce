"""Cubical filtrations of grayscale images and the fast surface scan.

Images are dense integer arrays (2D or 3D) with intensities in ``[0, levels)``.
Every pixel/voxel spans one top-dimensional cube; a top cube enters the
sublevel set at its own intensity, and lower cells enter with the first top
cube that covers them.  The fast scan visits each top cube once, looks up the
local Euler characteristic change for its neighborhood configuration in a
precomputed table, spreads that change over runs of second-parameter
thresholds where the configuration is constant, and finishes with cumulative
sums down the columns.

The naive counterparts (`naive_curve`, `naive_surface`) recount cells from
scratch at every threshold and exist as oracles and benchmark baselines.
"""

import hashlib
import itertools
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import _parallel
from ._validation import check_image, check_image_pair, check_levels
from .complexes import BifilteredComplex, Cell, EulerCurve, EulerSurface
from .errors import InvariantError, ValidationError

TABLE_FORMAT_VERSION = 1

LAPLACIAN_KERNEL = np.array([[0, -1, 0], [-1, 4, -1], [0, -1, 0]], dtype=np.int64)

DERIVED_KINDS = ("laplacian", "top_down_gradient", "complement", "radial_gradient")


def _offsets(dim):
    """Neighbor offsets of the center cube in (slice-)row-major scan order."""
    return [d for d in itertools.product((-1, 0, 1), repeat=dim) if any(d)]


def _bit_weights(dim):
    k = 3**dim - 1
    return (1 << np.arange(k - 1, -1, -1, dtype=np.int64)).astype(np.int64)


def _proper_faces(dim):
    """Faces of the center cube with their sign and covering neighbors.

    Yields ``(sign, positions)`` where ``sign`` is (-1)**dim(face) and
    ``positions`` indexes the neighbor offsets whose closed cube contains the
    face.  Per axis a face either sits at the low corner (0), the high corner
    (1), or spans the whole edge (2); the all-spanning choice is the cube
    itself and is excluded.
    """
    offsets = _offsets(dim)
    faces = []
    for choice in itertools.product((0, 1, 2), repeat=dim):
        if all(c == 2 for c in choice):
            continue
        covers = []
        for pos, delta in enumerate(offsets):
            ok = True
            for c, d in zip(choice, delta):
                allowed = {0: (-1, 0), 1: (0, 1), 2: (0,)}[c]
                if d not in allowed:
                    ok = False
                    break
            if ok:
                covers.append(pos)
        fdim = sum(1 for c in choice if c == 2)
        faces.append((1 - 2 * (fdim % 2), np.array(covers, dtype=np.int64)))
    return faces


def neighborhood_index(mask):
    """Pack an ordered neighbor-presence mask into its table index.

    The mask lists the ``3**dim - 1`` neighbor top cubes in (slice-)row-major
    scan order with the center omitted; the first entry is the most
    significant bit.
    """
    bits = np.asarray(mask).reshape(-1).astype(bool)
    if bits.size == 8:
        dim = 2
    elif bits.size == 26:
        dim = 3
    else:
        raise ValidationError(
            f"mask must have 8 (2D) or 26 (3D) bits, got {bits.size}"
        )
    return int(bits @ _bit_weights(dim))


def _table_digest(dim):
    h = hashlib.sha256()
    h.update(f"eulersurf-change-table v{TABLE_FORMAT_VERSION} dim={dim}".encode())
    for sign, covers in _proper_faces(dim):
        h.update(np.int64(sign).tobytes())
        h.update(covers.tobytes())
    return h.hexdigest()[:16]


def _build_table(dim, chunk=1 << 22):
    """All local Euler characteristic changes, indexed by neighbor mask.

    Entry ``m`` is the change caused by inserting the center cube (and its
    not-yet-covered faces) when exactly the neighbors flagged in ``m`` are
    present: the cube itself plus every proper face no present neighbor
    already covers.
    """
    size = 1 << (3**dim - 1)
    weights = _bit_weights(dim)
    face_masks = [
        (sign, np.uint32(np.sum(weights[covers])))
        for sign, covers in _proper_faces(dim)
    ]
    base = 1 - 2 * (dim % 2)
    table = np.empty(size, dtype=np.int8)
    one = np.int8(1)
    for start in range(0, size, chunk):
        stop = min(start + chunk, size)
        masks = np.arange(start, stop, dtype=np.uint32)
        acc = np.full(stop - start, base, dtype=np.int8)
        uncovered = np.empty(stop - start, dtype=bool)
        scratch = np.empty(stop - start, dtype=np.uint32)
        for sign, cover in face_masks:
            np.bitwise_and(masks, cover, out=scratch)
            np.equal(scratch, 0, out=uncovered)
            if sign > 0:
                np.add(acc, one, out=acc, where=uncovered)
            else:
                np.subtract(acc, one, out=acc, where=uncovered)
        table[start:stop] = acc
    # With no neighbors the whole closed cube is new (change +1); with every
    # neighbor present only the top cell itself is, so the change is its sign.
    if table[0] != 1 or table[-1] != base:
        raise InvariantError("change table failed its boundary sanity checks")
    return table


_TABLE_CACHE = {}


def change_table(dim, cache_dir=None):
    """Return the change table for ``dim`` in {2, 3}, building it on demand.

    The 3D table has 2**26 one-byte entries (~64 MiB).  Pass ``cache_dir`` to
    persist it to disk; the file name carries a checksum of the table format
    so stale caches are never picked up.
    """
    if dim not in (2, 3):
        raise ValidationError(f"change tables exist only for dim 2 and 3, got {dim}")
    if dim in _TABLE_CACHE:
        return _TABLE_CACHE[dim]
    path = None
    if cache_dir is not None and dim == 3:
        path = Path(cache_dir) / f"change-table-3d-{_table_digest(3)}.npy"
        if path.exists():
            table = np.load(path)
            _TABLE_CACHE[dim] = table
            return table
    table = _build_table(dim)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.save(path, table)
    _TABLE_CACHE[dim] = table
    return table


def _direct_changes(bits, dim):
    """Evaluate Euler characteristic changes straight from presence bits."""
    delta = np.full(bits.shape[0], 1 - 2 * (dim % 2), dtype=np.int64)
    for sign, covers in _proper_faces(dim):
        covered = bits[:, covers].any(axis=1)
        delta += sign * ~covered
    return delta


# ---------------------------------------------------------------------------
# filtering function values (single image)


def cell_value(image, anchor, extent):
    """Value of one cubical cell: min intensity over the top cubes covering it.

    ``anchor`` fixes the low corner; ``extent`` holds a 0/1 per axis (1 where
    the cell spans the unit interval).  A top cube has all-ones extent and its
    own intensity.
    """
    image = check_image(image)
    anchor = tuple(int(x) for x in anchor)
    extent = tuple(int(e) for e in extent)
    if len(anchor) != image.ndim or len(extent) != image.ndim:
        raise ValidationError("anchor/extent arity must match the image dimension")
    if any(e not in (0, 1) for e in extent):
        raise ValidationError("extent entries must be 0 or 1")
    ranges = []
    for x, e, n in zip(anchor, extent, image.shape):
        if e:
            if not 0 <= x < n:
                raise ValidationError(f"cell anchor {anchor} outside image")
            ranges.append((x,))
        else:
            if not 0 <= x <= n:
                raise ValidationError(f"cell anchor {anchor} outside image")
            tops = tuple(r for r in (x - 1, x) if 0 <= r < n)
            if not tops:
                raise ValidationError(f"cell anchor {anchor} outside image")
            ranges.append(tops)
    return int(min(image[p] for p in itertools.product(*ranges)))


def build_cubical_complex(image1, image2=None):
    """Explicit cell complex of an image (pair) with min-rule cell values.

    Intended for oracle work at desk scale; the scan algorithms never
    materialize this.
    """
    image1 = check_image(image1)
    if image2 is None:
        image2 = np.zeros_like(image1)
    image1, image2 = check_image_pair(image1, image2)
    dim = image1.ndim
    ids = {}
    cells = []
    h1 = []
    h2 = []
    for extent in itertools.product((0, 1), repeat=dim):
        axis_ranges = [
            range(n) if e else range(n + 1) for e, n in zip(extent, image1.shape)
        ]
        for anchor in itertools.product(*axis_ranges):
            faces = []
            for ax in range(dim):
                if extent[ax]:
                    lo = tuple(e if a != ax else 0 for a, e in enumerate(extent))
                    hi_anchor = tuple(
                        x if a != ax else x + 1 for a, x in enumerate(anchor)
                    )
                    faces.append(ids[(anchor, lo)])
                    faces.append(ids[(hi_anchor, lo)])
            cid = len(cells)
            ids[(anchor, extent)] = cid
            cells.append(Cell(cid, sum(extent), tuple(faces)))
            h1.append(cell_value(image1, anchor, extent))
            h2.append(cell_value(image2, anchor, extent))
    return BifilteredComplex(cells, np.array(h1, float), np.array(h2, float))


# ---------------------------------------------------------------------------
# naive per-threshold recounts (oracles / benchmark baselines)


def _expand_axis(mask, ax):
    shape = list(mask.shape)
    shape[ax] += 1
    out = np.zeros(shape, dtype=bool)
    lo = [slice(None)] * mask.ndim
    hi = [slice(None)] * mask.ndim
    lo[ax] = slice(0, mask.shape[ax])
    hi[ax] = slice(1, mask.shape[ax] + 1)
    out[tuple(lo)] |= mask
    out[tuple(hi)] |= mask
    return out


def chi_of_top_mask(present):
    """Euler characteristic of the union of the flagged closed top cubes.

    Counts occupied cells of every dimension directly: a lower cell is
    occupied exactly when one of its covering top cubes is flagged.
    """
    present = np.asarray(present, dtype=bool)
    chi = 0
    for spans in itertools.product((0, 1), repeat=present.ndim):
        cur = present
        for ax in range(present.ndim):
            if not spans[ax]:
                cur = _expand_axis(cur, ax)
        chi += (1 - 2 * (sum(spans) % 2)) * int(cur.sum())
    return chi


def naive_curve(image, levels=256):
    """Oracle curve: recount the complex at every threshold."""
    levels = check_levels(levels)
    image = check_image(image, levels)
    values = np.array(
        [chi_of_top_mask(image <= s) for s in range(levels)], dtype=np.int64
    )
    return EulerCurve(np.arange(levels), values)


def naive_surface(image1, image2, levels=256):
    """Oracle surface: independent recount at every threshold pair."""
    levels = check_levels(levels)
    image1, image2 = check_image_pair(image1, image2, levels)
    values = np.zeros((levels, levels), dtype=np.int64)
    for s in range(levels):
        under_s = image1 <= s
        for t in range(levels):
            values[s, t] = chi_of_top_mask(under_s & (image2 <= t))
    return EulerSurface(np.arange(levels), np.arange(levels), values)


# ---------------------------------------------------------------------------
# fast scan


def _pad(image, levels):
    return np.pad(image, 1, mode="constant", constant_values=levels)


def _neighbor_stack(padded, r0, r1, offsets):
    dim = padded.ndim
    inner = tuple(n - 2 for n in padded.shape)
    cols = []
    for delta in offsets:
        index = [slice(1 + delta[0] + r0, 1 + delta[0] + r1)]
        for ax in range(1, dim):
            index.append(slice(1 + delta[ax], 1 + delta[ax] + inner[ax]))
        cols.append(padded[tuple(index)].reshape(-1))
    return np.stack(cols, axis=1)


def _chunk_deltas(padded1, padded2, r0, r1, levels, mode):
    """Delta matrix contributed by top cubes in first-axis rows [r0, r1).

    ``D[s, c]`` accumulates +delta at the start column of each constant-
    configuration run and -delta one past its end; prefix sums later turn
    these into row increments of the surface.
    """
    dim = padded1.ndim
    offsets = _offsets(dim)
    k = len(offsets)
    inner = tuple(n - 2 for n in padded1.shape)
    center = tuple([slice(1 + r0, 1 + r1)] + [slice(1, 1 + n) for n in inner[1:]])
    a = padded1[center].reshape(-1)
    b = padded2[center].reshape(-1)
    neigh1 = _neighbor_stack(padded1, r0, r1, offsets)
    neigh2 = _neighbor_stack(padded2, r0, r1, offsets)

    # Scan-order tie rule: an equal-valued neighbor counts as present only if
    # it precedes the center, i.e. lies in the first half of the offsets.
    half = k // 2
    present1 = np.empty(neigh1.shape, dtype=bool)
    present1[:, :half] = neigh1[:, :half] <= a[:, None]
    present1[:, half:] = neigh1[:, half:] < a[:, None]

    if mode == "table":
        table = change_table(dim)
        weights = _bit_weights(dim)

        def evaluate(bits):
            return table[bits @ weights].astype(np.int64)

    else:

        def evaluate(bits):
            return _direct_changes(bits, dim)

    bounds = np.empty((a.size, k + 2), dtype=np.int64)
    bounds[:, 0] = b
    np.clip(np.sort(neigh2, axis=1), None, levels, out=bounds[:, 1:-1])
    np.maximum(bounds[:, 1:-1], b[:, None], out=bounds[:, 1:-1])
    bounds[:, -1] = levels

    deltas = np.zeros((levels, levels + 1), dtype=np.int64)
    for j in range(k + 1):
        lo = bounds[:, j]
        hi = bounds[:, j + 1]
        live = lo < hi
        if not np.any(live):
            continue
        bits = present1[live] & (neigh2[live] <= lo[live, None])
        change = evaluate(bits)
        np.add.at(deltas, (a[live], lo[live]), change)
        np.add.at(deltas, (a[live], hi[live]), -change)
    return deltas


def _surface_chunk_worker(args):
    padded1, padded2, r0, r1, levels, mode = args
    return _chunk_deltas(padded1, padded2, r0, r1, levels, mode)


def ecs_image_pair(image1, image2, levels=256, workers=1, mode="auto"):
    """Euler characteristic surface of an image pair over all intensity pairs.

    ``values[s, t]`` is the Euler characteristic of the complex spanned by
    the top cubes with ``image1 <= s`` and ``image2 <= t``.  Equals
    `naive_surface` entrywise.

    ``mode`` selects how 3D neighborhood changes are obtained: ``"table"``
    uses the eagerly built lookup table (64 MiB for 3D), ``"direct"``
    evaluates each configuration on the fly; results are identical.  2D
    always uses its 256-entry table under ``"auto"``.
    """
    levels = check_levels(levels)
    image1, image2 = check_image_pair(image1, image2, levels)
    if mode not in ("auto", "table", "direct"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "table" if image1.ndim == 2 else "direct"
    if mode == "table":
        change_table(image1.ndim)  # build in the parent so workers inherit it
    padded1 = _pad(image1, levels)
    padded2 = _pad(image2, levels)
    n_rows = image1.shape[0]
    workers = max(1, int(workers))
    n_chunks = min(workers, n_rows)
    cuts = np.linspace(0, n_rows, n_chunks + 1, dtype=int)
    # Each worker gets only its row slab (plus the one-row halo) to keep the
    # inter-process payload proportional to its share of the work.
    tasks = [
        (
            padded1[cuts[i] : cuts[i + 1] + 2],
            padded2[cuts[i] : cuts[i + 1] + 2],
            0,
            int(cuts[i + 1] - cuts[i]),
            levels,
            mode,
        )
        for i in range(n_chunks)
        if cuts[i] < cuts[i + 1]
    ]
    parts = _parallel.map_in_order(_surface_chunk_worker, tasks, workers)
    deltas = parts[0]
    for part in parts[1:]:
        deltas += part
    rows = np.cumsum(deltas, axis=1)[:, :levels]
    values = np.cumsum(rows, axis=0)
    return EulerSurface(np.arange(levels), np.arange(levels), values)


def ecc_image(image, levels=256, mode="auto"):
    """Euler characteristic curve of one image over all intensity thresholds.

    One-parameter specialization of the surface scan: each top cube
    contributes a single table entry at its own intensity.
    """
    levels = check_levels(levels)
    image = check_image(image, levels)
    if mode not in ("auto", "table", "direct"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "table" if image.ndim == 2 else "direct"
    dim = image.ndim
    offsets = _offsets(dim)
    k = len(offsets)
    padded = _pad(image, levels)
    a = image.reshape(-1)
    neigh = _neighbor_stack(padded, 0, image.shape[0], offsets)
    half = k // 2
    bits = np.empty(neigh.shape, dtype=bool)
    bits[:, :half] = neigh[:, :half] <= a[:, None]
    bits[:, half:] = neigh[:, half:] < a[:, None]
    if mode == "table":
        change = change_table(dim)[bits @ _bit_weights(dim)].astype(np.int64)
    else:
        change = _direct_changes(bits, dim)
    steps = np.bincount(a, weights=change, minlength=levels)
    values = np.cumsum(steps.astype(np.int64))
    return EulerCurve(np.arange(levels), values)


# ---------------------------------------------------------------------------
# derived second images


def derived_image(image, kind, levels=256):
    """Second images computed from a 2D input: laplacian | top_down_gradient |
    complement | radial_gradient."""
    levels = check_levels(levels)
    image = check_image(image, levels, ndim=2)
    n1, n2 = image.shape
    if kind == "laplacian":
        conv = ndimage.convolve(image, LAPLACIAN_KERNEL, mode="constant", cval=0)
        return np.clip(conv, 0, levels - 1)
    if kind == "top_down_gradient":
        rows = (levels - 1) * np.arange(n1, dtype=np.int64) // n1
        return np.repeat(rows[:, None], n2, axis=1)
    if kind == "complement":
        return (levels - 1) - image
    if kind == "radial_gradient":
        ci, cj = (n1 - 1) / 2.0, (n2 - 1) / 2.0
        ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
        dist = np.hypot(ii - ci, jj - cj)
        corner = np.hypot(ci, cj)
        if corner == 0:
            return np.zeros_like(image)
        return np.floor((levels - 1) * dist / corner).astype(np.int64)
    raise ValidationError(f"unknown derived image kind {kind!r}")
