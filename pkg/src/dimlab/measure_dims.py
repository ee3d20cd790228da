"""Dimension estimators for atomic measures.

Ball masses are evaluated at every host point for every grid scale; the
resulting extremal tables are turned into exponents with the same windowed
slope machinery as the set estimators.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError, InputError
from .measure import DiscreteMeasure, ball_masses
from .parallel import pmap
from .scaling import LogLogTable, ScaleGrid, fmt, slope_envelope
from .set_dims import (
    DEFAULT_RATIO_FLOOR,
    DimensionEstimate,
    _constant,
    _ratio_table,
    exponent,
    ratio_grid,
    resolve_window,
)

Q_GRID = (-8.0, -4.0, -2.0, 0.0, 0.5)


@dataclass(frozen=True)
class SpectrumCurve:
    """Estimates of one quantity over an increasing grid of theta or q values."""

    quantity: str
    parameter: tuple
    estimates: tuple
    fixture: str = ""

    def __post_init__(self):
        if len(self.parameter) != len(self.estimates):
            raise InputError("parameter and estimate lists differ in length")
        if any(b <= a for a, b in zip(self.parameter, self.parameter[1:])):
            raise InputError("parameters must be strictly increasing")

    @property
    def values(self):
        return [e.value for e in self.estimates]

    def to_dict(self, table_ref: str | None = None):
        d = {
            "quantity": self.quantity,
            "fixture": self.fixture,
            "theta_or_q": [float(fmt(p)) for p in self.parameter],
            "value": [float(fmt(v)) for v in self.values],
            "estimates": [e.to_dict() for e in self.estimates],
        }
        if table_ref is not None:
            d["tables"] = table_ref
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["parameter", "r", "value", "log_r", "log_value"])
        for p, e in zip(self.parameter, self.estimates):
            for row in zip(e.table.r, e.table.value, e.table.log_r, e.table.log_value):
                w.writerow([fmt(p)] + [fmt(x) for x in row])
        return buf.getvalue()


def _prepare(measure: DiscreteMeasure, grid: ScaleGrid, what: str):
    grid.check_mesh(measure.host.meta.mesh, what)
    measure.check_support(grid.r_min, what)


def mass_matrix(measure: DiscreteMeasure, scales) -> np.ndarray:
    """Row j holds mu(B(x, scales[j])) for every host point x."""
    return np.stack(pmap(lambda r: ball_masses(measure, r), scales))


def _checked(m, label):
    if np.any(m <= 0):
        raise ContractError(f"{label}: a ball about a host point has zero mass (full support broken)")
    return m


def minkowski_dims_measure(measure: DiscreteMeasure, grid: ScaleGrid, window: int | None = None, subsequence=None):
    """(upper, lower) Minkowski dimension of a measure from the smallest ball mass m(r).

    `subsequence` optionally lists radii; the lower estimate is then the
    least-squares exponent over those radii only.
    """
    _prepare(measure, grid, "minkowski_dims_measure")
    s = grid.scales
    m = _checked(np.array(pmap(lambda r: ball_masses(measure, r).min(), s)), "minkowski_dims_measure")
    table = LogLogTable.from_values(s, m, "min_ball_mass")
    if len(measure.atom_ids) == 1 and measure.full_support:
        return _constant("minkowski_upper", grid, table), _constant("minkowski_lower", grid, table)
    w = resolve_window(grid, window)
    up = exponent("minkowski_upper", table, grid, w, +1, "upper")
    lo = exponent("minkowski_lower", table, grid, w, +1, "lower")
    if subsequence is not None:
        radii = np.sort(np.asarray(subsequence, dtype=np.float64))[::-1]
        ms = _checked(np.array([ball_masses(measure, r).min() for r in radii]), "minkowski_dims_measure")
        sub = LogLogTable.from_values(radii, ms, "min_ball_mass_subsequence")
        lo = exponent("minkowski_lower", sub, grid, len(sub), +1, "lower")
    return up, lo


def frostman_dim(measure: DiscreteMeasure, grid: ScaleGrid, window: int | None = None) -> DimensionEstimate:
    """Lower envelope of d log M / d log r with M(r) the largest ball mass."""
    _prepare(measure, grid, "frostman_dim")
    s = grid.scales
    M = np.array(pmap(lambda r: ball_masses(measure, r).max(), s))
    table = LogLogTable.from_values(s, M, "max_ball_mass")
    if len(measure.atom_ids) == 1 and measure.full_support:
        return _constant("frostman", grid, table)
    return exponent("frostman", table, grid, resolve_window(grid, window), +1, "lower")


def _row_window_slopes(x, Y, window):
    """Windowed LS slopes of every row of Y against x."""
    x = x - x.mean()
    Y = Y - Y.mean(axis=1, keepdims=True)
    k = np.ones(window)
    sx = np.convolve(x, k, "valid")
    sxx = np.convolve(x * x, k, "valid")
    den = sxx - sx * sx / window
    cy = np.concatenate([np.zeros((Y.shape[0], 1)), np.cumsum(Y, axis=1)], axis=1)
    cxy = np.concatenate([np.zeros((Y.shape[0], 1)), np.cumsum(Y * x, axis=1)], axis=1)
    sy = cy[:, window:] - cy[:, :-window]
    sxy = cxy[:, window:] - cxy[:, :-window]
    return (sxy - sx * sy / window) / den


@dataclass(frozen=True)
class DensityResult:
    estimate: DimensionEstimate
    pointwise: np.ndarray  # lower-envelope exponent at every host point
    argmax: int

    def to_csv(self, host) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index"] + [f"x{k}" for k in range(host.dim)] + ["exponent"])
        for i, (p, e) in enumerate(zip(host.points, self.pointwise)):
            w.writerow([i] + [fmt(c) for c in p] + [fmt(e)])
        return buf.getvalue()


def density_dim(measure: DiscreteMeasure, grid: ScaleGrid, window: int | None = None) -> DensityResult:
    """max over host points x of the lower envelope of d log mu(B(x, r)) / d log r."""
    _prepare(measure, grid, "density_dim")
    s = grid.scales
    masses = _checked(mass_matrix(measure, s), "density_dim")
    w = resolve_window(grid, window)
    if len(s) < w:
        raise InputError(f"grid has {len(s)} scales, window needs {w}")
    logs = np.log(masses).T
    slopes = _row_window_slopes(np.log(s), logs, w)
    pointwise = slopes.min(axis=1)
    i = int(np.argmax(pointwise))
    table = LogLogTable.from_values(s, masses[:, i], f"ball_mass_at_point_{i}")
    if len(measure.atom_ids) == 1 and measure.full_support:
        return DensityResult(_constant("density", grid, table), np.zeros(len(measure.host)), 0)
    est = exponent("density", table, grid, w, +1, "lower")
    return DensityResult(est, np.maximum(pointwise, 0.0), i)


@dataclass(frozen=True)
class LqResult:
    q: float
    tau: float
    dim: DimensionEstimate
    input_order_sums: np.ndarray
    extremal_order_sums: np.ndarray

    @property
    def packing_gap(self) -> np.ndarray:
        """log of the ratio between the better and the worse packing sum per scale."""
        a, b = self.input_order_sums, self.extremal_order_sums
        return np.abs(np.log(a) - np.log(b))


def moment_sums(measure: DiscreteMeasure, q: float, r: float):
    """sum of mu(B)**q over two greedy r-packings: input order and mass-extremal order."""
    host = measure.host
    masses = ball_masses(measure, r)
    natural = np.arange(len(host), dtype=np.int64)
    # small masses dominate for q < 1, large ones for q > 1
    key = masses if q < 1 else -masses
    extremal = np.argsort(key, kind="stable").astype(np.int64)
    sums = []
    for order in (natural, extremal):
        ids = kernels.greedy_pack(host.points, order, r, host.metric_code)
        mb = _checked(masses[ids], "lq_spectrum")
        sums.append(float(np.sum(mb**q)))
    return sums[0], sums[1]


def lq_spectrum(measure: DiscreteMeasure, q: float, grid: ScaleGrid, window: int | None = None) -> LqResult:
    """tau_q as the lower envelope of d log M_q / d log r, and dim = tau_q / (q - 1)."""
    q = float(q)
    if q == 1.0:
        raise InputError("the L^q dimension is undefined at q = 1")
    _prepare(measure, grid, "lq_spectrum")
    s = grid.scales
    pairs = pmap(lambda r: moment_sums(measure, q, r), s)
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    table = LogLogTable.from_values(s, np.maximum(a, b), f"moment_sum_q_{q:g}")
    if len(measure.atom_ids) == 1 and measure.full_support:
        est = _constant("lq", grid, table)
        return LqResult(q, 0.0, DimensionEstimate("lq", 0.0, 0.0, est.report, grid, table, None, q), a, b)
    rep = slope_envelope(table, resolve_window(grid, window))
    tau = rep.lower_env
    raw = tau / (q - 1.0)
    est = DimensionEstimate("lq", max(raw, 0.0), raw, rep, grid, table, None, q)
    return LqResult(q, tau, est, a, b)


def assouad_dim_measure(
    measure: DiscreteMeasure, grid: ScaleGrid, ratio_floor: int = DEFAULT_RATIO_FLOOR, window: int | None = None
) -> DimensionEstimate:
    """Worst two-scale mass exponent.

    The estimate is the max over host points x and grid pairs r < R with
    R / r >= 2**ratio_floor of log(mu(B(x, R)) / mu(B(x, r))) / log(R / r).
    Unlike the set version this is read directly rather than from slopes:
    a measure need not be doubling, and its worst ratio can grow faster
    than any power of R / r without a clean slope. ``report`` holds the
    slope envelopes of the worst log-ratio table for diagnostics.
    """
    _prepare(measure, grid, "assouad_dim_measure")
    offsets = ratio_grid(grid, ratio_floor)
    masses = _checked(mass_matrix(measure, grid.scales), "assouad_dim_measure")
    logm = np.log(masses)
    worst = np.array([float(np.max(logm[:-j] - logm[j:])) for j in offsets])
    table = _ratio_table(np.exp(worst), grid, offsets, "worst_mass_ratio")
    if len(measure.atom_ids) == 1 and measure.full_support:
        return _constant("assouad", grid, table)
    w = resolve_window(grid, window, len(table))
    rep = slope_envelope(table, w)
    raw = float(np.max(worst / (offsets / grid.per_octave * np.log(2.0))))
    return DimensionEstimate("assouad", max(raw, 0.0), raw, rep, grid, table)


def _ratio_tables(measure, grid, theta):
    if not (0 < theta < 1):
        raise InputError("theta must lie in (0, 1)")
    s = grid.scales

    def extrema(r):
        small = ball_masses(measure, r)
        big = ball_masses(measure, r**theta)
        lr = np.log(_checked(big, "spectrum")) - np.log(_checked(small, "spectrum"))
        return float(lr.max()), float(lr.min())

    ext = pmap(extrema, s)
    hi = LogLogTable.from_values(s, np.exp([e[0] for e in ext]), f"max_mass_ratio_theta_{theta:g}")
    lo = LogLogTable.from_values(s, np.exp([e[1] for e in ext]), f"min_mass_ratio_theta_{theta:g}")
    return hi, lo


def assouad_spectrum_measure(measure: DiscreteMeasure, theta: float, grid: ScaleGrid, window: int | None = None):
    """Upper envelope of -d log V / d log r / (1 - theta), V(r) = max_x mu(B(x, r**theta)) / mu(B(x, r))."""
    _prepare(measure, grid, "assouad_spectrum_measure")
    hi, _ = _ratio_tables(measure, grid, theta)
    return exponent("assouad_spectrum", hi, grid, resolve_window(grid, window), -1, "upper", 1.0 - theta, theta)


def lower_spectrum_measure(measure: DiscreteMeasure, theta: float, grid: ScaleGrid, window: int | None = None):
    """Lower envelope of -d log U / d log r / (1 - theta), U(r) = min_x mu(B(x, r**theta)) / mu(B(x, r))."""
    _prepare(measure, grid, "lower_spectrum_measure")
    _, lo = _ratio_tables(measure, grid, theta)
    return exponent("lower_spectrum", lo, grid, resolve_window(grid, window), -1, "lower", 1.0 - theta, theta)


def spectrum_curve(fn, params, fixture="", quantity=None) -> SpectrumCurve:
    """Evaluate an estimator over a parameter list; `fn(p)` returns a DimensionEstimate."""
    params = tuple(float(p) for p in params)
    ests = tuple(fn(p) for p in params)
    return SpectrumCurve(quantity or ests[0].quantity, params, ests, fixture)
