"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.  Every artifact-producing command writes a JSON manifest next to
its first output; replaying the recorded argv reproduces the artifact
byte-identically.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import generators, io, simplicial, stats
from .cubical import derived_image, ecc_image, ecs_image_pair, naive_surface
from .errors import DataError, EulersurfError, InvariantError, UsageError
from .simplicial import (
    SimplicialBifiltration,
    alpha_filtration,
    delaunay_2d,
    extend_by_max,
    height_filter,
    knn_density_filter,
    unique_grid,
    uniform_grid,
)

_DERIVED_ALIASES = {
    "laplacian": "laplacian",
    "complement": "complement",
    "gradient": "top_down_gradient",
    "radial": "radial_gradient",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_threads():
    return int(os.environ.get("EULERSURF_THREADS", "1"))


def _load_image(path, levels):
    path = str(path)
    if path.endswith(".euvol"):
        volume, file_levels = io.load_volume(path)
        if levels is not None and levels != file_levels:
            raise DataError(
                f"{path}: volume has {file_levels} levels, --levels says {levels}"
            )
        return volume, file_levels
    return io.load_pgm(path, levels or 256), levels or 256


def _write_surface(args, surface, argv, inputs, params, seed=None):
    out_path = args.output
    if args.out == "pgm-heatmap":
        out_path = out_path or "surface.pgm"
        extra = io.render_heatmap(surface.values, out_path)
    else:
        out_path = out_path or "surface.csv"
        io.save_surface_csv(out_path, surface)
        extra = {}
    io.write_manifest(argv, [out_path], inputs, params, seed, extra)
    return out_path


def _write_curve(args, curve, argv, inputs, params, seed=None):
    out_path = args.output
    if args.out == "pgm-heatmap":
        out_path = out_path or "curve.pgm"
        extra = io.render_heatmap(curve.values[None, :], out_path)
    else:
        out_path = out_path or "curve.csv"
        io.save_curve_csv(out_path, curve)
        extra = {}
    io.write_manifest(argv, [out_path], inputs, params, seed, extra)
    return out_path


def _parse_point_filter(spec, points, simplices):
    """Vertex/simplex filter from a spec string: alpha | knn:k=3 | height:dx,dy."""
    name, _, rest = spec.partition(":")
    if name == "alpha":
        return alpha_filtration(points, simplices)
    if name == "knn":
        k = 3
        if rest:
            key, _, val = rest.partition("=")
            if key != "k" or not val.isdigit():
                raise UsageError(f"bad knn spec {spec!r}; expected knn:k=<int>")
            k = int(val)
        return extend_by_max(simplices, knn_density_filter(points, k))
    if name == "height":
        try:
            direction = np.array([float(t) for t in rest.split(",")])
        except ValueError:
            raise UsageError(f"bad height spec {spec!r}; expected height:dx,dy") from None
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise UsageError("height direction must be nonzero")
        return extend_by_max(simplices, height_filter(points, direction / norm))
    raise UsageError(f"unknown filter {spec!r}; use alpha, knn:k=N or height:dx,dy")


def _parse_grid(spec, values):
    if spec == "unique":
        return unique_grid(values)
    if spec.startswith("uniform:"):
        try:
            m = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad grid spec {spec!r}") from None
        lo, hi = float(np.min(values)), float(np.max(values))
        if hi == lo:
            return np.array([lo])
        return uniform_grid(lo, hi, m)
    raise UsageError(f"unknown grid spec {spec!r}; use unique or uniform:<m>")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ecc(args, argv, out):
    image, levels = _load_image(args.image, args.levels)
    curve = ecc_image(image, levels)
    path = _write_curve(args, curve, argv, [args.image], {"levels": levels})
    print(f"wrote {path}", file=out)
    return 0


def _cmd_ecs(args, argv, out):
    if (args.image2 is None) == (args.derived is None):
        raise UsageError("provide exactly one of --image2 or --derived")
    image1, levels = _load_image(args.image1, args.levels)
    inputs = [args.image1]
    if args.derived is not None:
        image2 = derived_image(image1, _DERIVED_ALIASES[args.derived], levels)
    else:
        image2, _ = _load_image(args.image2, levels)
        inputs.append(args.image2)
    surface = ecs_image_pair(image1, image2, levels, workers=args.threads)
    if args.oracle:
        reference = naive_surface(image1, image2, levels)
        mismatches = int(np.sum(surface.values != reference.values))
        print(f"oracle diff: {mismatches} mismatches", file=out)
        if mismatches:
            raise InvariantError("fast surface disagrees with the brute-force oracle")
    params = {"levels": levels, "derived": args.derived, "threads": args.threads}
    path = _write_surface(args, surface, argv, inputs, params)
    print(f"wrote {path}", file=out)
    return 0


def _points_setup(args):
    points = io.load_points_csv(args.points)
    simplices = delaunay_2d(points, jitter=args.jitter)
    return points, simplices


def _cmd_ecc_points(args, argv, out):
    points, simplices = _points_setup(args)
    values = _parse_point_filter(args.h, points, simplices)
    grid = _parse_grid(args.grid, values)
    filtration = SimplicialBifiltration(simplices, values)
    curve = simplicial.ecc_points(filtration, grid)
    path = _write_curve(
        args, curve, argv, [args.points], {"h": args.h, "grid": args.grid}
    )
    print(f"wrote {path}", file=out)
    return 0


def _cmd_ecs_points(args, argv, out):
    points, simplices = _points_setup(args)
    h1 = _parse_point_filter(args.h1, points, simplices)
    h2 = _parse_point_filter(args.h2, points, simplices)
    grid1 = _parse_grid(args.grid, h1)
    grid2 = _parse_grid(args.grid, h2)
    filtration = SimplicialBifiltration(simplices, h1, h2)
    surface = simplicial.ecs_points(filtration, grid1, grid2)
    params = {"h1": args.h1, "h2": args.h2, "grid": args.grid}
    path = _write_surface(args, surface, argv, [args.points], params)
    print(f"wrote {path}", file=out)
    return 0


def _load_surface_dir(directory):
    paths = sorted(Path(directory).glob("*.csv"))
    paths = [p for p in paths if not p.name.endswith(".manifest.json")]
    if not paths:
        raise DataError(f"no surface CSV files in {directory}")
    return [io.load_surface_csv(p) for p in paths], paths


def _cmd_terrain(args, argv, out):
    ens_a, paths_a = _load_surface_dir(args.a)
    ens_b, paths_b = _load_surface_dir(args.b)
    if args.normalized:
        terr = stats.normalized_terrain(ens_a, ens_b)
    else:
        terr = stats.terrain(ens_a, ens_b)
    if args.abs:
        terr.values = np.abs(terr.values)
        terr.meta["view"] = "absolute"
    out_path = args.output or "terrain.csv"
    extra = {}
    if args.out == "pgm-heatmap":
        out_path = args.output or "terrain.pgm"
        extra = io.render_heatmap(terr.values, out_path, terr.sentinel_mask)
    else:
        io.save_terrain_csv(out_path, terr)
    params = {"normalized": args.normalized, "abs": args.abs}
    io.write_manifest(argv, [out_path], paths_a + paths_b, params, None, extra)
    print(f"wrote {out_path} ({terr.meta['sentinels']} sentinels)", file=out)
    return 0


def _cmd_expected(args, argv, out):
    if not 0.0 <= args.p <= 1.0:
        raise UsageError(f"--p must be in [0, 1], got {args.p}")
    surface = stats.expected_random_pair_surface(args.n1, args.n2, args.p, args.levels)
    grid = np.arange(args.levels)
    terr = stats.Terrain(grid, grid, surface, kind="expected")
    out_path = args.output or "expected.csv"
    io.save_terrain_csv(out_path, terr)
    params = {"n1": args.n1, "n2": args.n2, "p": args.p, "levels": args.levels}
    io.write_manifest(argv, [out_path], [], params)
    print(f"wrote {out_path}", file=out)
    return 0


def _load_curve_or_surface(path):
    head = Path(path).read_text().splitlines()[0].strip()
    if head == "# eulersurf-curve v1":
        return io.load_curve_csv(path)
    if head == "# eulersurf-surface v1":
        return io.load_surface_csv(path)
    raise DataError(f"{path}: neither a curve nor a surface CSV")


def _cmd_featurize(args, argv, out):
    objects = [_load_curve_or_surface(p) for p in args.inputs]
    stats_path = Path(args.fit)
    if stats_path.exists():
        blob = json.loads(stats_path.read_text())
        mean = np.array(blob["mean"])
        sd = np.array(blob["sd"])
        if blob["stride"] != args.stride:
            raise DataError(
                f"{stats_path}: fitted with stride {blob['stride']}, not {args.stride}"
            )
    else:
        mean, sd = stats.fit_feature_stats(objects, args.stride)
        stats_path.write_text(
            json.dumps(
                {"stride": args.stride, "mean": mean.tolist(), "sd": sd.tolist()}
            )
            + "\n"
        )
        print(f"fitted {stats_path}", file=out)
    out_path = args.output or "features.csv"
    with open(out_path, "w", newline="\n") as fh:
        fh.write("# eulersurf-features v1\n")
        for path, obj in zip(args.inputs, objects):
            vec = stats.featurize(obj, args.stride, mean, sd)
            fh.write(str(path) + "," + ",".join(repr(float(v)) for v in vec) + "\n")
    io.write_manifest(
        argv, [out_path], list(args.inputs), {"stride": args.stride, "fit": args.fit}
    )
    print(f"wrote {out_path}", file=out)
    return 0


def _cmd_gen(args, argv, out):
    seed = args.seed
    if args.model == "pair":
        if not 0.0 <= args.p <= 1.0:
            raise UsageError(f"--p must be in [0, 1], got {args.p}")
        n2 = args.n2 or args.n
        m1, m2 = generators.gen_correlated_pair(args.n, n2, args.p, args.levels, seed)
        paths = args.paths or ["pair1.pgm", "pair2.pgm"]
        if len(paths) != 2:
            raise UsageError("gen pair needs two output paths")
        io.save_pgm(paths[0], m1, args.levels)
        io.save_pgm(paths[1], m2, args.levels)
        params = {"p": args.p, "n": args.n, "n2": n2, "levels": args.levels}
    elif args.model == "copula3d":
        if args.theta <= 0:
            raise UsageError("--theta must be > 0")
        m1, m2 = generators.gen_copula_images_3d(args.n, args.theta, args.levels, seed)
        paths = args.paths or ["copula1.euvol", "copula2.euvol"]
        if len(paths) != 2:
            raise UsageError("gen copula3d needs two output paths")
        io.save_volume(paths[0], m1, args.levels)
        io.save_volume(paths[1], m2, args.levels)
        params = {"theta": args.theta, "n": args.n, "levels": args.levels}
    elif args.model == "poisson":
        if args.lambda_ <= 0:
            raise UsageError("--lambda must be > 0")
        points = generators.gen_poisson(args.lambda_, seed)
        paths = args.paths or ["poisson.csv"]
        io.save_points_csv(paths[0], points)
        params = {"lambda": args.lambda_}
    else:
        if not 0.0 <= args.alpha < 1.0:
            raise UsageError("--alpha must be in [0, 1)")
        points = generators.gen_hawkes_cluster(
            args.lambda_, args.alpha, args.sigma, seed, clip=args.clip
        )
        paths = args.paths or ["hawkes.csv"]
        io.save_points_csv(paths[0], points)
        params = {
            "lambda": args.lambda_,
            "alpha": args.alpha,
            "sigma": args.sigma,
            "clip": args.clip,
        }
    io.write_manifest(argv, [str(p) for p in paths], [], params, seed)
    print("wrote " + " ".join(str(p) for p in paths), file=out)
    return 0


def _cmd_oracle_check(args, argv, out):
    rng = np.random.default_rng(args.seed)
    shape = (args.size,) * args.dim
    failures = 0
    for i in range(args.count):
        img1 = rng.integers(0, args.levels, shape)
        img2 = rng.integers(0, args.levels, shape)
        fast = ecs_image_pair(img1, img2, args.levels, workers=args.threads)
        slow = naive_surface(img1, img2, args.levels)
        mismatches = int(np.sum(fast.values != slow.values))
        print(f"pair {i}: {mismatches} mismatches", file=out)
        failures += mismatches
    if failures:
        raise InvariantError(f"{failures} oracle mismatches")
    print(f"all {args.count} pairs match the oracle", file=out)
    return 0


def _cmd_bench(args, argv, out):
    rng = np.random.default_rng(args.seed)
    shape = (args.size, args.size)
    img1 = rng.integers(0, args.levels, shape)
    img2 = rng.integers(0, args.levels, shape)
    start = time.perf_counter()
    fast = ecs_image_pair(img1, img2, args.levels, workers=args.threads)
    fast_time = time.perf_counter() - start
    start = time.perf_counter()
    slow = naive_surface(img1, img2, args.levels)
    slow_time = time.perf_counter() - start
    if not np.array_equal(fast.values, slow.values):
        raise InvariantError("fast and naive surfaces disagree")
    print(
        f"size={args.size} levels={args.levels}: "
        f"fast {fast_time:.4f}s, naive {slow_time:.4f}s, "
        f"speedup {slow_time / fast_time:.1f}x",
        file=out,
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = _Parser(prog="eulersurf", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_output(p, default_fmt="csv"):
        p.add_argument("--out", choices=["csv", "pgm-heatmap"], default=default_fmt)
        p.add_argument("--output", help="output path (default derived)")

    p = sub.add_parser("ecc", help="curve of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--threads", type=int, default=_default_threads())
    add_output(p)
    p.set_defaults(run=_cmd_ecc)

    p = sub.add_parser("ecs", help="surface of an image pair")
    p.add_argument("--image1", required=True)
    p.add_argument("--image2")
    p.add_argument("--derived", choices=sorted(_DERIVED_ALIASES))
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--oracle", action="store_true", help="diff against brute force")
    add_output(p)
    p.set_defaults(run=_cmd_ecs)

    p = sub.add_parser("ecc-points", help="curve of a point cloud")
    p.add_argument("--points", required=True)
    p.add_argument("--h", required=True, help="alpha | knn:k=N | height:dx,dy")
    p.add_argument("--grid", default="unique")
    p.add_argument("--jitter", action="store_true")
    add_output(p)
    p.set_defaults(run=_cmd_ecc_points)

    p = sub.add_parser("ecs-points", help="surface of a point cloud")
    p.add_argument("--points", required=True)
    p.add_argument("--h1", required=True)
    p.add_argument("--h2", required=True)
    p.add_argument("--grid", default="unique")
    p.add_argument("--jitter", action="store_true")
    add_output(p)
    p.set_defaults(run=_cmd_ecs_points)

    p = sub.add_parser("terrain", help="difference of two surface ensembles")
    p.add_argument("--a", required=True, help="directory of surface CSVs")
    p.add_argument("--b", required=True, help="directory of surface CSVs")
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--abs", action="store_true")
    add_output(p)
    p.set_defaults(run=_cmd_terrain)

    p = sub.add_parser("expected", help="analytic expected surface")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--levels", type=int, default=256)
    add_output(p)
    p.set_defaults(run=_cmd_expected)

    p = sub.add_parser("featurize", help="subsample + z-score curves/surfaces")
    p.add_argument("inputs", nargs="+", metavar="CSV")
    p.add_argument("--stride", type=int, default=6)
    p.add_argument("--fit", required=True, help="stats JSON (created if missing)")
    p.add_argument("--output")
    p.set_defaults(run=_cmd_featurize)

    p = sub.add_parser("gen", help="synthetic data generators")
    gen_sub = p.add_subparsers(dest="model", metavar="MODEL")
    g = gen_sub.add_parser("pair")
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--n2", type=int)
    g.add_argument("--levels", type=int, default=256)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", dest="paths", nargs=2)
    g.set_defaults(run=_cmd_gen, model="pair")
    g = gen_sub.add_parser("copula3d")
    g.add_argument("--theta", type=float, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--levels", type=int, default=256)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", dest="paths", nargs=2)
    g.set_defaults(run=_cmd_gen, model="copula3d")
    g = gen_sub.add_parser("poisson")
    g.add_argument("--lambda", dest="lambda_", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", dest="paths", nargs=1)
    g.set_defaults(run=_cmd_gen, model="poisson")
    g = gen_sub.add_parser("hawkes")
    g.add_argument("--lambda", dest="lambda_", type=float, required=True)
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--sigma", type=float, required=True)
    g.add_argument("--clip", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", dest="paths", nargs=1)
    g.set_defaults(run=_cmd_gen, model="hawkes")

    p = sub.add_parser("oracle-check", help="diff the fast scan against brute force")
    p.add_argument("--dim", type=int, choices=[2, 3], default=2)
    p.add_argument("--size", type=int, default=12)
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(run=_cmd_oracle_check)

    p = sub.add_parser("bench", help="time the fast scan against the naive recount")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--levels", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(run=_cmd_bench)

    return parser


def cli_dispatch(argv, stdout=None, stderr=None):
    """Parse and run a command line; returns the process exit code."""
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            raise UsageError("missing subcommand")
        if getattr(args, "run", None) is None or (
            args.command == "gen" and getattr(args, "model", None) is None
        ):
            raise UsageError("missing gen model (pair|copula3d|poisson|hawkes)")
        return args.run(args, list(argv), out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return 1
    except InvariantError as exc:
        print(f"internal error: {exc}", file=err)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=err)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=err)
        return 2
    except EulersurfError as exc:
        print(f"error: {exc}", file=err)
        return 2


def main():
    sys.exit(cli_dispatch(sys.argv[1:]))
