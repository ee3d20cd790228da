"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage error (bad flags,
unreadable or malformed input), 3 capacity or guard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import presets
from .errors import CapacityError, ConfigurationError, ContractError, DimlabError, InputError
from .measure import DiscreteMeasure, format_measure, load_measure, witness_k_max, witness_measure
from .measure_dims import (
    assouad_dim_measure,
    assouad_spectrum_measure,
    density_dim,
    frostman_dim,
    lower_spectrum_measure,
    lq_spectrum,
    minkowski_dims_measure,
    spectrum_curve,
)
from .metric import FixtureMeta, PointCloud, exact_packing_number, format_rows, load_cloud
from .presets import AnalysisConfig, default_config
from .set_dims import assouad_dim_set, assouad_spectrum_set, lower_spectrum_set, minkowski_dims_set
from .verify import verify_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# output helpers


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_atomic(path, text: str):
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


# ---------------------------------------------------------------------------
# input helpers


def sidecar_path(points_path) -> Path:
    return Path(points_path).with_suffix(".json")


def read_sidecar(points_path) -> dict:
    p = sidecar_path(points_path)
    if not p.is_file():
        return {}
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: malformed sidecar ({exc})") from exc


def open_cloud(path, metric="euclidean") -> tuple[PointCloud, dict]:
    if not Path(path).is_file():
        raise InputError(f"{path}: no such file")
    side = read_sidecar(path)
    meta = FixtureMeta.from_dict(side["meta"]) if "meta" in side else None
    metric = side.get("metric", metric)
    return load_cloud(path, metric, meta), side


def open_measure(path, cloud) -> DiscreteMeasure:
    if not Path(path).is_file():
        raise InputError(f"{path}: no such file")
    return load_measure(path, cloud)


def parse_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None
    if not vals:
        raise UsageError("empty list")
    return vals


def resolve_config(args, cloud, side) -> AnalysisConfig:
    """Sidecar analysis settings (or defaults), overridden by explicit flags."""
    cfg = AnalysisConfig.from_dict(side["analysis"]) if "analysis" in side else default_config(cloud)
    over = {
        "r_max": getattr(args, "rmax", None),
        "r_min": getattr(args, "rmin", None),
        "per_octave": getattr(args, "per_octave", None),
        "ratio_floor": getattr(args, "ratio_floor", None),
        "slack": getattr(args, "slack", None),
    }
    cfg = cfg.with_(**over)
    w = getattr(args, "window", None)
    if w is not None:
        if w < 2:
            raise InputError("--window must be at least 2 rows")
        cfg = cfg.with_(window_octaves=(w - 1) / cfg.per_octave)
    return cfg


def maybe_shuffle(cloud: PointCloud, args) -> PointCloud:
    """Random greedy order: permute the points with --seed."""
    if not getattr(args, "shuffle", False):
        return cloud
    rng = np.random.default_rng(args.seed)
    return cloud.subset(rng.permutation(len(cloud)), name=cloud.meta.name)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.replace("-", "_")] = v
    for k in ("depth", "n", "k_max", "p", "q"):
        if getattr(args, k, None) is not None:
            params[k] = getattr(args, k)
    if args.s is not None:
        params["s"] = args.s
    if args.digits is not None:
        params["digits"] = args.digits
    typed = {}
    for k, v in params.items():
        if k == "digits":
            pairs = str(v).replace(";", " ").split()
            try:
                typed[k] = tuple(tuple(int(c) for c in pr.split(",")) for pr in pairs)
            except ValueError:
                raise UsageError(f"--digits expects 'j,k;j,k;...', got {v!r}") from None
        elif k == "s":
            typed[k] = float(v)
        else:
            try:
                typed[k] = int(v)
            except ValueError:
                raise UsageError(f"parameter {k} expects an integer, got {v!r}") from None
    try:
        fx = presets.build(args.fixture, **typed)
    except TypeError as exc:
        raise UsageError(f"{args.fixture}: {exc}") from None
    prefix = Path(args.output)
    cloud = fx.cloud
    points = format_rows(cloud.points, f"fixture={fx.name} points={len(cloud)} dim={cloud.dim}")
    meta = FixtureMeta(name=fx.name, scale_factor=1.0, mesh=cloud.meta.mesh, dedup_eps=cloud.meta.dedup_eps)
    side = {
        "fixture": fx.name,
        "params": {k: (list(map(list, v)) if k == "digits" else v) for k, v in fx.params.items()},
        "metric": cloud.metric,
        "meta": meta.to_dict(),
        "generator": {k: v for k, v in cloud.meta.to_dict().items() if k != "name"},
        "targets": fx.targets,
        "analysis": fx.config.to_dict(),
        "inhomogeneous": fx.inhomogeneous,
        "files": {"points": prefix.name + ".points"},
    }
    if fx.measure is not None:
        side["files"]["measure"] = prefix.name + ".measure"
        write_atomic(str(prefix) + ".measure", format_measure(fx.measure, all_points=True))
    write_atomic(str(prefix) + ".points", points)
    write_atomic(str(prefix) + ".json", dumps(_jsonable(side)))
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return float(obj)


SET_QUANTITIES = ("minkowski", "assouad")
MEASURE_QUANTITIES = ("minkowski", "frostman", "density", "assouad")


def cmd_dim(args):
    cloud, side = open_cloud(args.input)
    cloud = maybe_shuffle(cloud, args)
    cfg = resolve_config(args, cloud, side)
    g, W = cfg.grid, cfg.window
    out = []
    if args.kind == "set":
        wanted = args.quantity or SET_QUANTITIES
        if "minkowski" in wanted:
            out.extend(minkowski_dims_set(cloud, g, W))
        if "assouad" in wanted:
            out.append(assouad_dim_set(cloud, g, cfg.ratio_floor, W))
    else:
        mu = _measure_for(args, cloud, side)
        wanted = args.quantity or MEASURE_QUANTITIES
        if "minkowski" in wanted:
            out.extend(minkowski_dims_measure(mu, g, W))
        if "frostman" in wanted:
            out.append(frostman_dim(mu, g, W))
        if "density" in wanted:
            dens = density_dim(mu, g, cfg.density_window)
            out.append(dens.estimate)
            if args.output not in (None, "-"):
                write_atomic(str(Path(args.output).with_suffix("")) + ".density.csv", dens.to_csv(mu.host))
        if "assouad" in wanted:
            out.append(assouad_dim_measure(mu, g, cfg.ratio_floor, W))
    doc = {"input": Path(args.input).name, "estimates": [e.to_dict() for e in out]}
    emit(args.output, dumps(doc))
    return EXIT_OK


def _measure_for(args, cloud, side):
    path = args.measure
    if path is None and "measure" in side.get("files", {}):
        path = str(Path(args.input).parent / side["files"]["measure"])
    if path is None:
        raise InputError("a measure file is required (--measure)")
    return open_measure(path, cloud)


SPECTRA = {
    "assouad-set": ("thetas", lambda c, m, cfg: lambda t: assouad_spectrum_set(c, t, cfg.grid, cfg.window)),
    "lower-set": ("thetas", lambda c, m, cfg: lambda t: lower_spectrum_set(c, t, cfg.grid, cfg.window)),
    "assouad-measure": ("thetas", lambda c, m, cfg: lambda t: assouad_spectrum_measure(m, t, cfg.grid, cfg.window)),
    "lower-measure": ("thetas", lambda c, m, cfg: lambda t: lower_spectrum_measure(m, t, cfg.grid, cfg.window)),
    "lq": ("qs", lambda c, m, cfg: lambda q: lq_spectrum(m, q, cfg.grid, cfg.window).dim),
}


def cmd_spectrum(args):
    cloud, side = open_cloud(args.input)
    cfg = resolve_config(args, cloud, side)
    pname, make = SPECTRA[args.kind]
    other = "qs" if pname == "thetas" else "thetas"
    if getattr(args, other) is not None:
        raise UsageError(f"spectrum {args.kind} takes --{pname}, not --{other}")
    raw = getattr(args, pname)
    params = sorted(parse_list(raw)) if raw is not None else list(getattr(cfg, pname))
    mu = None if args.kind.endswith("-set") else _measure_for(args, cloud, side)
    curve = spectrum_curve(make(cloud, mu, cfg), params, fixture=side.get("fixture", Path(args.input).stem))
    if args.output in (None, "-"):
        emit(None, dumps(curve.to_dict()))
        return EXIT_OK
    out = Path(args.output)
    csv_path = out.with_suffix(".csv")
    emit(out, dumps(curve.to_dict(table_ref=csv_path.name)))
    write_atomic(csv_path, curve.to_csv())
    return EXIT_OK


def cmd_witness(args):
    cloud, side = open_cloud(args.input)
    if (args.kmax is None) == (args.klist is None):
        raise UsageError("witness needs exactly one of --kmax or --klist")
    if args.kmax is not None:
        if args.kmax < 1:
            raise UsageError("--kmax must be positive")
        ks = list(range(1, args.kmax + 1))
    else:
        vals = parse_list(args.klist)
        if any(v != int(v) for v in vals):
            raise UsageError("--klist expects integers")
        ks = [int(v) for v in vals]
    limit = witness_k_max(cloud)
    if ks[-1] > limit and not args.below_mesh:
        raise ConfigurationError(
            f"k={ks[-1]} resolves scales below the sample mesh (largest allowed k is {limit}); "
            "pass --below-mesh to override"
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mu = witness_measure(cloud, ks)
    emit(args.output, format_measure(mu))
    return EXIT_OK


def cmd_verify(args):
    cloud, side = open_cloud(args.input)
    cfg = resolve_config(args, cloud, side)
    mu = None
    if args.measure is not None:
        mu = open_measure(args.measure, cloud)
    rep = verify_suite(cloud, mu, cfg, side.get("fixture", Path(args.input).stem), bool(side.get("inhomogeneous")))
    emit(args.output, dumps(rep.to_dict()))
    for c in rep.failures:
        print(f"FAIL {c.name}: lhs={c.lhs:.4g} rhs={c.rhs:.4g} slack={c.slack:g}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_oracle(args):
    cloud, _ = open_cloud(args.input)
    if not args.r > 0:
        raise UsageError("--r must be positive")
    # the radius is given in file units; the cloud may have been rescaled
    n = exact_packing_number(cloud, args.r * cloud.meta.scale_factor)
    sys.stdout.write(f"{n}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dimlab", description="Finite-scale dimension estimates for point clouds and measures.")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized options such as --shuffle")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def grid_flags(sp):
        sp.add_argument("--rmax", type=float)
        sp.add_argument("--rmin", type=float)
        sp.add_argument("--per-octave", type=int, dest="per_octave")
        sp.add_argument("--window", type=int, help="rows per slope window")
        sp.add_argument("--ratio-floor", type=int, dest="ratio_floor")

    g = sub.add_parser("gen", help="generate a fixture")
    g.add_argument("fixture", choices=sorted(presets.FIXTURES))
    g.add_argument("-o", "--output", required=True, help="output prefix")
    g.add_argument("--depth", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--k-max", type=int, dest="k_max")
    g.add_argument("--s", type=float)
    g.add_argument("--p", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--digits", help="digit set as 'j,k;j,k;...'")
    g.add_argument("--param", action="append", help="extra key=value fixture parameter")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("dim", help="dimension estimates")
    d.add_argument("kind", choices=("set", "measure"))
    d.add_argument("-i", "--input", required=True)
    d.add_argument("--measure")
    d.add_argument("--quantity", action="append", choices=sorted(set(SET_QUANTITIES + MEASURE_QUANTITIES)))
    d.add_argument("--shuffle", action="store_true", help="greedy packings in a random (--seed) order")
    d.add_argument("-o", "--output")
    grid_flags(d)
    d.set_defaults(func=cmd_dim)

    s = sub.add_parser("spectrum", help="Assouad, lower or L^q spectrum")
    s.add_argument("kind", choices=sorted(SPECTRA))
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--measure")
    s.add_argument("--thetas")
    s.add_argument("--qs")
    s.add_argument("-o", "--output")
    grid_flags(s)
    s.set_defaults(func=cmd_spectrum)

    w = sub.add_parser("witness", help="build the witness measure of a cloud")
    w.add_argument("-i", "--input", required=True)
    w.add_argument("--kmax", type=int)
    w.add_argument("--klist")
    w.add_argument("--below-mesh", action="store_true", dest="below_mesh")
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_witness)

    v = sub.add_parser("verify", help="run the inequality checks")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("--measure")
    v.add_argument("--slack", type=float)
    v.add_argument("-o", "--output")
    grid_flags(v)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exact computations on small clouds")
    o.add_argument("what", choices=("pack",))
    o.add_argument("-i", "--input", required=True)
    o.add_argument("--r", type=float, required=True)
    o.set_defaults(func=cmd_oracle)
    return p


def run_cli(argv=None) -> int:
    """Run one command; returns the exit code instead of exiting."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"dimlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        print(f"dimlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, ContractError, ConfigurationError) as exc:
        print(f"dimlab: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (InputError, OSError) as exc:
        print(f"dimlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimlabError as exc:
        print(f"dimlab: {exc}", file=sys.stderr)
        return EXIT_GUARD


def main(argv=None):
    sys.exit(run_cli(argv))


if __name__ == "__main__":
    main()
