"""Dimension estimators for finite point sets.

Every estimator builds a log-log table of a count against scale and reads
the exponent from windowed least-squares slopes (see :mod:`dimlab.scaling`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError
from .metric import PointCloud
from .parallel import pmap
from .scaling import LogLogTable, ScaleGrid, SlopeReport, fmt, slope_envelope

THETA_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))
DEFAULT_RATIO_FLOOR = 1

QUANTITIES = (
    "minkowski_upper",
    "minkowski_lower",
    "assouad",
    "assouad_spectrum",
    "lower_spectrum",
    "frostman",
    "density",
    "lq",
)


@dataclass(frozen=True)
class DimensionEstimate:
    """An exponent read off a log-log table.

    ``value`` is the designated envelope (upper for limsup-type quantities,
    lower for liminf-type ones) converted to a dimension and clamped at 0;
    ``raw`` keeps the unclamped number.
    """

    quantity: str
    value: float
    raw: float
    report: SlopeReport
    grid: ScaleGrid
    table: LogLogTable
    theta: float | None = None
    q: float | None = None

    def to_dict(self, table_ref: str | None = None):
        d = {
            "quantity": self.quantity,
            "value": float(fmt(self.value)),
            "raw": float(fmt(self.raw)),
            "report": {k: (float(fmt(v)) if isinstance(v, float) else v) for k, v in self.report.to_dict().items()},
            "grid": self.grid.to_dict(),
        }
        if self.theta is not None:
            d["theta"] = self.theta
        if self.q is not None:
            d["q"] = self.q
        if table_ref is not None:
            d["table"] = table_ref
        return d


def resolve_window(grid: ScaleGrid, window: int | None, rows: int | None = None) -> int:
    w = grid.default_window() if window is None else int(window)
    if rows is not None:
        w = min(w, rows)
    if w < 2:
        raise InputError("window must be at least 2")
    return w


def exponent(quantity, table, grid, window, sign, mode, divisor=1.0, theta=None, q=None) -> DimensionEstimate:
    """Turn slope envelopes into a dimension.

    The per-window exponent is ``sign * slope / divisor``; `mode` picks its
    largest ('upper') or smallest ('lower') value.
    """
    rep = slope_envelope(table, window)
    hi_slope, lo_slope = (rep.upper_env, rep.lower_env) if sign > 0 else (rep.lower_env, rep.upper_env)
    raw = sign * (hi_slope if mode == "upper" else lo_slope) / divisor
    return DimensionEstimate(quantity, max(raw, 0.0), raw, rep, grid, table, theta, q)


def _constant(quantity, grid, table, theta=None):
    """Estimate for tables with no variation (single points): exactly 0."""
    rep = SlopeReport(0.0, 0.0, 0.0, len(table), table.dropped, ())
    return DimensionEstimate(quantity, 0.0, 0.0, rep, grid, table, theta)


def _guard(cloud: PointCloud, grid: ScaleGrid, what: str):
    grid.check_mesh(cloud.meta.mesh, what)


def packing_table(cloud: PointCloud, grid: ScaleGrid) -> LogLogTable:
    order = np.arange(len(cloud), dtype=np.int64)
    counts = pmap(lambda r: len(kernels.greedy_pack(cloud.points, order, r, cloud.metric_code)), grid.scales)
    return LogLogTable.from_values(grid.scales, counts, "packing_count")


def minkowski_dims_set(cloud: PointCloud, grid: ScaleGrid, window: int | None = None):
    """(upper, lower) Minkowski dimension from greedy packing counts N_r."""
    _guard(cloud, grid, "minkowski_dims_set")
    table = packing_table(cloud, grid)
    w = resolve_window(grid, window)
    if len(cloud) == 1:
        return _constant("minkowski_upper", grid, table), _constant("minkowski_lower", grid, table)
    up = exponent("minkowski_upper", table, grid, w, -1, "upper")
    lo = exponent("minkowski_lower", table, grid, w, -1, "lower")
    return up, lo


def local_count_extrema(cloud: PointCloud, r: float, R: float):
    """(max, min) over all cloud points x of the greedy r-packing count of B(x, R)."""
    order = np.arange(len(cloud), dtype=np.int64)
    cnt = kernels.local_counts(cloud.points, order, cloud.points, R, r, cloud.metric_code)
    return int(cnt.max()), int(cnt.min())


def ratio_grid(grid: ScaleGrid, ratio_floor: int):
    """Index offsets j (ratio R/r = 2**(j/per_octave)) with j >= per_octave * ratio_floor."""
    if ratio_floor < 0 or int(ratio_floor) != ratio_floor:
        raise InputError("ratio_floor must be a non-negative integer")
    if grid.octaves < ratio_floor + 2:
        raise InputError(f"grid spans {grid.octaves:.2f} octaves, need at least ratio_floor + 2 = {ratio_floor + 2}")
    j0 = max(1, grid.per_octave * int(ratio_floor))
    return np.arange(j0, len(grid))


def _ratio_table(values_by_offset, grid, offsets, label):
    rho = np.exp2(offsets / grid.per_octave)
    # tabulate against 1/rho so the 'scale' column decreases
    return LogLogTable.from_values(1.0 / rho, values_by_offset, label)


def assouad_dim_set(cloud: PointCloud, grid: ScaleGrid, ratio_floor: int = DEFAULT_RATIO_FLOOR, window: int | None = None):
    """Assouad dimension as the growth exponent of the worst local count.

    F(rho) is the largest greedy count N_r(B(x, R)) over all points x and all
    grid pairs with R / r = rho >= 2**ratio_floor; the estimate is the upper
    envelope of d log F / d log rho.
    """
    _guard(cloud, grid, "assouad_dim_set")
    offsets = ratio_grid(grid, ratio_floor)
    s = grid.scales
    if len(cloud) == 1:
        return _constant("assouad", grid, _ratio_table(np.ones(len(offsets)), grid, offsets, "worst_local_count"))
    # for each small scale r = s[k], every larger grid scale R = s[k - j]
    def worst(k):
        js = offsets[offsets <= k]
        if len(js) == 0:
            return js, np.zeros(0, dtype=np.int64)
        cnt = kernels.local_counts(cloud.points, order, cloud.points, s[k - js], s[k], cloud.metric_code)
        return js, cnt.max(axis=1)

    order = np.arange(len(cloud), dtype=np.int64)
    best = dict.fromkeys(offsets.tolist(), 0)
    for js, vals in pmap(worst, range(len(s))):
        for j, v in zip(js.tolist(), vals.tolist()):
            best[j] = max(best[j], v)
    table = _ratio_table([best[j] for j in offsets], grid, offsets, "worst_local_count")
    w = resolve_window(grid, window, len(table))
    return exponent("assouad", table, grid, w, -1, "upper")


def _spectrum_tables(cloud, grid, theta):
    if not (0 < theta < 1):
        raise InputError("theta must lie in (0, 1)")
    s = grid.scales
    ext = pmap(lambda r: local_count_extrema(cloud, r, r**theta), s)
    hi = LogLogTable.from_values(s, [e[0] for e in ext], f"max_local_count_theta_{theta:g}")
    lo = LogLogTable.from_values(s, [e[1] for e in ext], f"min_local_count_theta_{theta:g}")
    return hi, lo


def assouad_spectrum_set(cloud: PointCloud, theta: float, grid: ScaleGrid, window: int | None = None):
    """Upper envelope of -d log V / d log r / (1 - theta), V(r) = max_x N_r(B(x, r**theta))."""
    _guard(cloud, grid, "assouad_spectrum_set")
    hi, _ = _spectrum_tables(cloud, grid, theta)
    if len(cloud) == 1:
        return _constant("assouad_spectrum", grid, hi, theta)
    w = resolve_window(grid, window)
    return exponent("assouad_spectrum", hi, grid, w, -1, "upper", 1.0 - theta, theta)


def lower_spectrum_set(cloud: PointCloud, theta: float, grid: ScaleGrid, window: int | None = None):
    """Lower envelope of -d log U / d log r / (1 - theta), U(r) = min_x N_r(B(x, r**theta))."""
    _guard(cloud, grid, "lower_spectrum_set")
    _, lo = _spectrum_tables(cloud, grid, theta)
    if len(cloud) == 1:
        return _constant("lower_spectrum", grid, lo, theta)
    w = resolve_window(grid, window)
    return exponent("lower_spectrum", lo, grid, w, -1, "lower", 1.0 - theta, theta)
