"""File formats: PGM images, text volumes, CSV curves/surfaces/terrains,
point tables, the bifiltered-complex text format, heatmap rendering, and run
manifests.

CSV files use comma separators, ``#``-prefixed metadata lines and LF line
endings.  Grids are written with ``repr`` so floats round-trip exactly.
"""

import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .complexes import BifilteredComplex, Cell, EulerCurve, EulerSurface
from .errors import DataError, FormatError
from .stats import Terrain

MANIFEST_FORMAT = "eulersurf-manifest v1"
SENTINEL_GRAY = 255


# ---------------------------------------------------------------------------
# PGM


def _pgm_tokens(data):
    """Header tokens of a PGM, skipping ``#`` comments; yields (token, offset)."""
    i = 0
    while i < len(data):
        if data[i : i + 1].isspace():
            i += 1
        elif data[i : i + 1] == b"#":
            j = data.find(b"\n", i)
            i = len(data) if j < 0 else j + 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace():
                j += 1
            yield data[i:j], j
            i = j


def load_pgm(path, levels=256):
    """Read a P2 or P5 grayscale image, rescaled to ``levels`` intensities.

    Values map through ``floor(v * levels / (maxval + 1))``; a file saved by
    `save_pgm` with the same ``levels`` loads back unchanged.
    """
    data = Path(path).read_bytes()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise FormatError(f"{path}: empty file") from None
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width = int(next(tokens)[0])
        height = int(next(tokens)[0])
        maxval, offset = next(tokens)
        maxval = int(maxval)
    except (StopIteration, ValueError):
        raise FormatError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1:
        raise FormatError(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval <= 65535:
        raise FormatError(f"{path}: maxval {maxval} out of range (1..65535)")
    count = width * height
    if magic == b"P2":
        try:
            flat = np.array(data[offset:].split(), dtype=np.int64)
        except ValueError:
            raise FormatError(f"{path}: non-numeric P2 payload") from None
        if flat.size != count:
            raise FormatError(
                f"{path}: expected {count} samples, found {flat.size}"
            )
    else:
        payload = data[offset + 1 :]
        width_bytes = 2 if maxval > 255 else 1
        if len(payload) != count * width_bytes:
            raise FormatError(
                f"{path}: P5 payload is {len(payload)} bytes, "
                f"expected {count * width_bytes}"
            )
        dtype = ">u2" if width_bytes == 2 else np.uint8
        flat = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    if flat.max(initial=0) > maxval:
        raise FormatError(f"{path}: sample exceeds declared maxval {maxval}")
    image = flat.reshape(height, width)
    return (image * levels) // (maxval + 1)


def save_pgm(path, image, levels=256, binary=True):
    """Write an image with maxval ``levels - 1`` as P5 (default) or P2."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise DataError("PGM output requires a 2D image")
    maxval = levels - 1
    if not 0 < maxval <= 65535:
        raise DataError(f"levels {levels} out of PGM range")
    if image.min() < 0 or image.max() > maxval:
        raise DataError("image intensities exceed the PGM maxval")
    height, width = image.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode())
        if binary:
            dtype = ">u2" if maxval > 255 else np.uint8
            fh.write(image.astype(dtype).tobytes())
        else:
            for row in image:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


# ---------------------------------------------------------------------------
# 3D volumes


def load_volume(path):
    """Read a text volume: header ``EUVOL n1 n2 n3 L`` + slice-row-major ints."""
    text = Path(path).read_text().split()
    if len(text) < 5 or text[0] != "EUVOL":
        raise FormatError(f"{path}: missing EUVOL header")
    try:
        n1, n2, n3, levels = (int(t) for t in text[1:5])
        flat = np.array(text[5:], dtype=np.int64)
    except ValueError:
        raise FormatError(f"{path}: non-numeric EUVOL content") from None
    if flat.size != n1 * n2 * n3:
        raise FormatError(
            f"{path}: expected {n1 * n2 * n3} voxels, found {flat.size}"
        )
    if flat.size and (flat.min() < 0 or flat.max() >= levels):
        raise FormatError(f"{path}: voxel out of range [0, {levels})")
    return flat.reshape(n1, n2, n3), levels


def save_volume(path, volume, levels=256):
    volume = np.asarray(volume)
    if volume.ndim != 3:
        raise DataError("EUVOL output requires a 3D image")
    n1, n2, n3 = volume.shape
    with open(path, "w") as fh:
        fh.write(f"EUVOL {n1} {n2} {n3} {levels}\n")
        for sl in volume:
            for row in sl:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# CSV curves / surfaces / terrains


def _fmt(x):
    if float(x) == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def save_curve_csv(path, curve, meta=None):
    with open(path, "w", newline="\n") as fh:
        fh.write("# eulersurf-curve v1\n")
        for key, val in (meta or {}).items():
            fh.write(f"# {key}: {val}\n")
        fh.write("grid," + ",".join(_fmt(g) for g in curve.grid) + "\n")
        fh.write("chi," + ",".join(str(int(v)) for v in curve.values) + "\n")


def load_curve_csv(path):
    rows, _ = _read_csv_rows(path, "# eulersurf-curve v1")
    if len(rows) != 2 or rows[0][0] != "grid" or rows[1][0] != "chi":
        raise FormatError(f"{path}: malformed curve file")
    grid = np.array([float(t) for t in rows[0][1:]])
    values = np.array([int(t) for t in rows[1][1:]], dtype=np.int64)
    if grid.size != values.size:
        raise FormatError(f"{path}: grid and chi lengths differ")
    return EulerCurve(grid, values)


def _read_csv_rows(path, magic):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != magic:
        raise FormatError(f"{path}: missing '{magic}' header")
    meta = {}
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("#"):
            if ":" in line:
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            continue
        rows.append(line.split(","))
    return rows, meta


def _write_matrix_csv(path, magic, grid1, grid2, matrix, fmt_cell, meta=None):
    with open(path, "w", newline="\n") as fh:
        fh.write(magic + "\n")
        for key, val in (meta or {}).items():
            fh.write(f"# {key}: {val}\n")
        fh.write("grid2," + ",".join(_fmt(g) for g in grid2) + "\n")
        for g, row in zip(grid1, matrix):
            fh.write(_fmt(g) + "," + ",".join(fmt_cell(v) for v in row) + "\n")


def _read_matrix_csv(path, magic, parse_cell):
    rows, meta = _read_csv_rows(path, magic)
    if not rows or rows[0][0] != "grid2":
        raise FormatError(f"{path}: missing grid2 header row")
    grid2 = np.array([float(t) for t in rows[0][1:]])
    grid1 = []
    matrix = []
    for row in rows[1:]:
        if len(row) != grid2.size + 1:
            raise FormatError(
                f"{path}: row has {len(row) - 1} entries for {grid2.size} thresholds"
            )
        grid1.append(float(row[0]))
        matrix.append([parse_cell(t) for t in row[1:]])
    if not grid1:
        raise FormatError(f"{path}: no data rows")
    return np.array(grid1), grid2, matrix, meta


def save_surface_csv(path, surface, meta=None):
    _write_matrix_csv(
        path,
        "# eulersurf-surface v1",
        surface.grid1,
        surface.grid2,
        surface.values,
        lambda v: str(int(v)),
        meta,
    )


def load_surface_csv(path):
    grid1, grid2, matrix, _ = _read_matrix_csv(
        path, "# eulersurf-surface v1", int
    )
    return EulerSurface(grid1, grid2, np.array(matrix, dtype=np.int64))


def save_terrain_csv(path, terrain_):
    meta = dict(terrain_.meta)
    _write_matrix_csv(
        path,
        "# eulersurf-terrain v1",
        terrain_.grid1,
        terrain_.grid2,
        terrain_.values,
        lambda v: repr(float(v)),
        meta,
    )


def load_terrain_csv(path):
    grid1, grid2, matrix, meta = _read_matrix_csv(
        path, "# eulersurf-terrain v1", float
    )
    values = np.array(matrix, dtype=np.float64)
    return Terrain(
        grid1,
        grid2,
        values,
        kind=meta.get("kind", "raw"),
        sentinel_mask=np.isnan(values),
        meta=meta,
    )


# ---------------------------------------------------------------------------
# point tables


def load_points_csv(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty points file")
    start = 0
    try:
        [float(t) for t in lines[0].split(",")]
    except ValueError:
        start = 1
    rows = []
    for ln in lines[start:]:
        try:
            row = [float(t) for t in ln.split(",")]
        except ValueError:
            raise FormatError(f"{path}: non-numeric row {ln!r}") from None
        if len(row) not in (2, 3):
            raise FormatError(f"{path}: rows must have 2 or 3 coordinates")
        rows.append(row)
    pts = np.array(rows)
    if pts.ndim != 2 or len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: inconsistent coordinate counts")
    return pts


def save_points_csv(path, points):
    points = np.asarray(points, dtype=np.float64)
    names = "x,y,z"[: 2 * points.shape[1] - 1]
    with open(path, "w", newline="\n") as fh:
        fh.write(names + "\n")
        for row in points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# bifiltered-complex text format


def save_complex(path, complex_):
    """One cell per line, ids implicit in line order: ``dim d faces i.. h1 v h2 v``."""
    order = {c.id: i for i, c in enumerate(complex_.cells)}
    with open(path, "w", newline="\n") as fh:
        fh.write("EULERCPLX 1\n")
        for i, cell in enumerate(complex_.cells):
            faces = " ".join(str(order[f]) for f in cell.faces)
            faces = f"{faces} " if faces else ""
            fh.write(
                f"dim {cell.dim} faces {faces}h1 {_fmt(complex_.h1[i])} "
                f"h2 {_fmt(complex_.h2[i])}\n"
            )


def load_complex(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "EULERCPLX 1":
        raise FormatError(f"{path}: missing EULERCPLX 1 header")
    cells = []
    h1 = []
    h2 = []
    for i, line in enumerate(lines[1:]):
        if not line.strip():
            continue
        tokens = line.split()
        try:
            if tokens[0] != "dim" or tokens[2] != "faces":
                raise ValueError
            dim = int(tokens[1])
            at = tokens.index("h1")
            faces = tuple(int(t) for t in tokens[3:at])
            if tokens[at + 2] != "h2":
                raise ValueError
            h1.append(float(tokens[at + 1]))
            h2.append(float(tokens[at + 3]))
        except (ValueError, IndexError):
            raise FormatError(f"{path}: malformed cell line {i + 2}") from None
        cells.append(Cell(len(cells), dim, faces))
    return BifilteredComplex(cells, np.array(h1), np.array(h2))


# ---------------------------------------------------------------------------
# heatmaps


def render_heatmap(matrix, path, sentinel_mask=None):
    """Render a matrix to an 8-bit PGM by linear min-max scaling.

    A constant matrix renders as mid-gray 128; sentinel cells render as the
    reserved value 255.  Returns the scaling bounds for the manifest.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if sentinel_mask is None:
        sentinel_mask = np.isnan(matrix)
    live = ~sentinel_mask
    if not live.any():
        raise DataError("cannot render an all-sentinel matrix")
    lo = float(matrix[live].min())
    hi = float(matrix[live].max())
    if hi == lo:
        gray = np.full(matrix.shape, 128, dtype=np.int64)
    else:
        gray = np.floor((matrix - lo) / (hi - lo) * 255.0 + 0.5)
        gray = np.clip(np.nan_to_num(gray), 0, 255).astype(np.int64)
    gray[sentinel_mask] = SENTINEL_GRAY
    save_pgm(path, gray, levels=256)
    return {"scale_min": lo, "scale_max": hi, "sentinels": int(sentinel_mask.sum())}


# ---------------------------------------------------------------------------
# manifests


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(argv, outputs, inputs=(), params=None, seed=None, extra=None):
    """Record how an artifact was produced, next to its first output.

    Replaying the recorded argv reproduces the outputs byte-identically.
    """
    outputs = [str(o) for o in outputs]
    manifest = {
        "format": MANIFEST_FORMAT,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "argv": list(argv),
        "seed": seed,
        "params": params or {},
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": outputs,
        "extra": extra or {},
    }
    path = Path(outputs[0] + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def load_manifest(path):
    manifest = json.loads(Path(path).read_text())
    if manifest.get("format") != MANIFEST_FORMAT:
        raise FormatError(f"{path}: not a {MANIFEST_FORMAT} file")
    return manifest


def replay_manifest(path, stderr=sys.stderr):
    """Re-run the command recorded in a manifest; returns its exit code."""
    from .cli import cli_dispatch

    manifest = load_manifest(path)
    return cli_dispatch(manifest["argv"], stderr=stderr)
