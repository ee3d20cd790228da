"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL ...`` line (visible with
``pytest -v``) before asserting.
"""

import json
import time
import warnings

import numpy as np
import pytest

from dimlab import (
    PointCloud,
    density_dim,
    exact_packing_number,
    frostman_dim,
    greedy_maximal_packing,
    minkowski_dims_measure,
    minkowski_dims_set,
    verify_suite,
    witness_roundtrip,
)
from dimlab import assouad_dim_set, presets
from dimlab.cli import run_cli
from dimlab.generators import CANTOR_DIM

pytestmark = pytest.mark.slow

SHIPPED = ("cantor", "sequence", "bm", "inhomog", "corner", "grid")
CHAIN_PREFIXES = ("lq_le_udimm", "udimm_le_spectrum", "spectrum_le_assouad", "spectrum_le_udimm_cap", "spectrum_limit")
BM_DEPTH_MINKOWSKI = 12


def report_line(capsys, n, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"\nCRITERION {n}: {status} {detail}".rstrip())
        for f in failures:
            print(f"    {f}")
    assert not failures, failures


_REPORTS = {}


def fixture_report(name):
    if name not in _REPORTS:
        fx = presets.build(name)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _REPORTS[name] = (fx, verify_suite(fx.cloud, fx.measure, fx.config, fx.name, fx.inhomogeneous))
    return _REPORTS[name]


def failed_checks(rep, prefixes):
    return [
        f"{rep.fixture}: {c.name} lhs={c.lhs:.4f} rhs={c.rhs:.4f} margin={c.margin:.4f}"
        for c in rep.checks
        if c.name.startswith(prefixes) and not c.passed
    ]


def test_criterion_1_packing_invariants(capsys):
    rng = np.random.default_rng(20261015)
    t0 = time.perf_counter()
    bad, n_inst = [], 10_000
    for i in range(n_inst):
        n = int(rng.integers(1, 16))
        d = int(rng.integers(1, 4))
        pts = rng.random((n, d))
        if rng.random() < 0.3:  # lattice points produce exact ties at distance 2r
            pts = np.round(pts * 4) / 4
        metric = "chebyshev" if rng.random() < 0.25 else "euclidean"
        cloud = PointCloud.from_points(pts, metric)
        r = float(rng.choice([rng.uniform(0.01, 0.6), 0.125, 0.25]))
        order = rng.permutation(len(cloud))
        pk = greedy_maximal_packing(cloud, r, order=order)
        if len(pk) > 1 and not pk.min_separation(cloud) > 2 * r:
            bad.append(f"instance {i}: separation")
        if pk.cover_radius(cloud) > 2 * r:
            bad.append(f"instance {i}: cover")
        lo, hi = exact_packing_number(cloud, 2 * r), exact_packing_number(cloud, r)
        if not lo <= len(pk) <= hi:
            bad.append(f"instance {i}: sandwich {lo} <= {len(pk)} <= {hi}")
    dt = time.perf_counter() - t0
    if dt >= 60:
        bad.append(f"runtime {dt:.1f}s >= 60s")
    report_line(capsys, 1, bad[:10], f"{n_inst} instances, {len(bad)} violations, {dt:.1f}s")


def test_criterion_2_sequence(capsys):
    t0 = time.perf_counter()
    fx = presets.sequence(100_000)
    cfg = fx.config
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        up_set, _ = minkowski_dims_set(fx.cloud, cfg.grid, cfg.window)
        dens = density_dim(fx.measure, cfg.grid, cfg.density_window).estimate.value
        frost = frostman_dim(fx.measure, cfg.grid, cfg.window).value
        up_mu, _ = minkowski_dims_measure(fx.measure, cfg.grid, cfg.window)
    dt = time.perf_counter() - t0
    bad = []
    if abs(up_set.value - 0.5) > 0.05:
        bad.append(f"set upper Minkowski {up_set.value:.4f} not within 0.05 of 0.5")
    if dens > 0.05:
        bad.append(f"density dimension {dens:.4f} > 0.05")
    if frost > 0.05:
        bad.append(f"Frostman dimension {frost:.4f} > 0.05")
    if up_mu.value < 0.45:
        bad.append(f"measure upper Minkowski {up_mu.value:.4f} < 0.45")
    if dt >= 120:
        bad.append(f"runtime {dt:.1f}s >= 120s")
    detail = f"set={up_set.value:.4f} density={dens:.4f} frostman={frost:.4f} udimm(mu)={up_mu.value:.4f} {dt:.1f}s"
    report_line(capsys, 2, bad, detail)


def test_criterion_3_witness_roundtrip(capsys):
    bad, parts = [], []
    for name, kw in (("cantor", {"depth": 10}), ("bm", {"depth": 6})):
        fx = presets.build(name, **kw)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rt = witness_roundtrip(fx.cloud, fx.config)
        du = rt.witness_upper - rt.set_upper
        dl = rt.witness_lower_sparse - rt.set_lower
        parts.append(f"{name}: dU={du:+.3f} dL={dl:+.3f}")
        if abs(du) > 0.1:
            bad.append(f"{name}: udimm(witness)={rt.witness_upper:.4f} vs udimm(set)={rt.set_upper:.4f}")
        if abs(dl) > 0.1:
            bad.append(f"{name}: ldimm(sparse witness)={rt.witness_lower_sparse:.4f} vs ldimm(set)={rt.set_lower:.4f}")
    report_line(capsys, 3, bad, "; ".join(parts))


def test_criterion_4_closed_forms(capsys):
    bad = []
    fx, rep = fixture_report("cantor")
    est = rep.estimates
    keys = ["measure_minkowski_upper", "measure_minkowski_lower", "frostman", "density", "assouad_measure"]
    keys += [f"lq[{q:g}]" for q in (-8, -4, -2, 0, 0.5)]
    keys += [f"assouad_spectrum_measure[{t:g}]" for t in fx.config.thetas]
    keys += [f"lower_spectrum_measure[{t:g}]" for t in fx.config.thetas]
    for k in keys:
        if abs(est[k] - CANTOR_DIM) > 0.08:
            bad.append(f"cantor {k}={est[k]:.4f} (|diff|={abs(est[k] - CANTOR_DIM):.3f})")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        deep = presets.bm(BM_DEPTH_MINKOWSKI)
        up_deep, _ = minkowski_dims_set(deep.cloud, deep.config.grid, deep.config.window)
        target = deep.targets["minkowski"]
        if abs(up_deep.value - target) > 0.08:
            bad.append(f"bm depth {BM_DEPTH_MINKOWSKI} Minkowski {up_deep.value:.4f} vs {target:.4f}")
        gaps = {}
        for label, digits in (("non-uniform", presets.NONUNIFORM_DIGITS), ("uniform", presets.UNIFORM_DIGITS)):
            b = presets.bm(digits=digits)
            cfg = b.config
            m, _ = minkowski_dims_set(b.cloud, cfg.grid, cfg.window)
            a = assouad_dim_set(b.cloud, cfg.grid, cfg.ratio_floor, cfg.window)
            gaps[label] = (a.value - m.value, a.value, m.value)
    g, a, m = gaps["non-uniform"]
    if not g >= 0.15:
        bad.append(f"bm non-uniform: Assouad {a:.4f} - Minkowski {m:.4f} = {g:+.4f} < 0.15")
    g, a, m = gaps["uniform"]
    if not abs(g) <= 0.1:
        bad.append(f"bm uniform fibers: |Assouad {a:.4f} - Minkowski {m:.4f}| = {abs(g):.4f} > 0.1")
    detail = (
        f"cantor {len(keys)} quantities; bm Minkowski={up_deep.value:.4f}; "
        f"gap non-uniform={gaps['non-uniform'][0]:+.3f} uniform={gaps['uniform'][0]:+.3f}"
    )
    report_line(capsys, 4, bad, detail)


def test_criterion_5_chain(capsys):
    bad, n = [], 0
    for name in SHIPPED:
        _, rep = fixture_report(name)
        n += sum(c.name.startswith(CHAIN_PREFIXES) for c in rep.checks)
        bad += failed_checks(rep, CHAIN_PREFIXES)
    report_line(capsys, 5, bad, f"{n} checks on {len(SHIPPED)} fixtures, {len(bad)} failed")


def test_criterion_6_lq(capsys):
    bad, n = [], 0
    for name in ("cantor", "sequence"):
        _, rep = fixture_report(name)
        n += sum(c.name.startswith(("lq_monotone", "lq_limit")) for c in rep.checks)
        bad += failed_checks(rep, ("lq_monotone", "lq_limit"))
    report_line(capsys, 6, bad, f"{n} checks, {len(bad)} failed")


def test_criterion_7_set_measure_and_frostman(capsys):
    prefixes = ("set_spectrum_le_measure", "lower_spectrum_le_frostman")
    bad, n = [], 0
    for name in SHIPPED:
        _, rep = fixture_report(name)
        n += sum(c.name.startswith(prefixes) for c in rep.checks)
        bad += failed_checks(rep, prefixes)
    report_line(capsys, 7, bad, f"{n} checks on {len(SHIPPED)} fixtures, {len(bad)} failed")


def test_criterion_8_inhomogeneous_probe(capsys):
    fx, rep = fixture_report("inhomog")
    gm = rep.gap_metrics
    bad = []
    if not gm["assouad_spectrum_gap_min_over_theta"] > 0:
        bad.append(f"min over theta of spectrum gap = {gm['assouad_spectrum_gap_min_over_theta']:.4f}")
    if not gm["doubling_trend_nondecreasing"]:
        bad.append(f"doubling maxima by octave not non-decreasing: {gm['doubling_max_by_octave']}")
    detail = (
        f"gap={gm['assouad_spectrum_gap_min_over_theta']:.4f} "
        f"doubling growth x{gm['doubling_trend_growth']:.3g} over {len(gm['doubling_max_by_octave'])} octaves"
    )
    report_line(capsys, 8, bad, detail)


def test_criterion_9_cli_contract(capsys, tmp_path):
    bad = []

    def run(*argv):
        return run_cli([str(a) for a in argv])

    # determinism
    for k in "ab":
        run("gen", "cantor", "--depth", 7, "-o", tmp_path / k / "c")
        d = tmp_path / k
        run("dim", "measure", "-i", d / "c.points", "-o", d / "dim.json")
        run("spectrum", "lq", "-i", d / "c.points", "--qs=-4,0", "-o", d / "lq.json")
        run("witness", "-i", d / "c.points", "--kmax", 6, "-o", d / "w.measure")
        run("verify", "-i", d / "c.points", "--measure", d / "c.measure", "-o", d / "v.json")
    for f in ("c.points", "c.json", "c.measure", "dim.json", "dim.density.csv", "lq.json", "lq.csv", "w.measure", "v.json"):
        a, b = tmp_path / "a" / f, tmp_path / "b" / f
        if not a.is_file() or a.read_bytes() != b.read_bytes():
            bad.append(f"{f} differs between runs or is missing")
    for f in ("dim.json", "lq.json", "v.json"):
        if (tmp_path / "a" / f).is_file():
            json.loads((tmp_path / "a" / f).read_text())

    # exit-code matrix
    d = tmp_path / "a"
    one = tmp_path / "one.points"
    one.write_text("0.5 0.5\n")
    matrix = [
        (0, ["gen", "grid", "--n", 65, "-o", tmp_path / "g"]),
        (0, ["dim", "set", "-i", d / "c.points", "-o", tmp_path / "x.json"]),
        (0, ["oracle", "pack", "-i", one, "--r", 0.1]),
        (0, ["verify", "-i", one, "-o", tmp_path / "one.json"]),
        (1, ["verify", "-i", d / "c.points", "--measure", d / "c.measure", "--slack", -1, "-o", tmp_path / "f.json"]),
        (2, ["dim", "set", "-i", tmp_path / "missing.points", "-o", tmp_path / "never.json"]),
        (2, ["nosuchcommand"]),
        (2, ["dim", "set"]),
        (2, ["spectrum", "lq", "-i", d / "c.points", "--thetas", 0.5]),
        (3, ["gen", "cantor", "--depth", 40, "-o", tmp_path / "huge"]),
        (3, ["oracle", "pack", "-i", d / "c.points", "--r", 0.001]),
        (3, ["witness", "-i", d / "c.points", "--kmax", 40]),
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for want, argv in matrix:
            got = run(*argv)
            if got != want:
                bad.append(f"exit {got} (want {want}) for {' '.join(map(str, argv))}")
    if (tmp_path / "never.json").exists():
        bad.append("usage error still wrote an output file")
    capsys.readouterr()
    report_line(capsys, 9, bad, f"{len(matrix)} exit-code cases, 9 outputs compared")
