"""Scale grids and log-log slope machinery.

Exponents are read off as slopes ``d log v / d log r`` of least-squares fits
over runs of consecutive scales. Multiplicative constants only shift the
intercept, so they never enter an estimate. The largest and smallest run
slopes act as finite-scale stand-ins for limsup and liminf.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError

DEFAULT_WINDOW_OCTAVES = 6


class MeshWarning(UserWarning):
    """The scale range reaches below the resolution of the sample."""


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric scales ``r_j = r_max * 2**(-j / per_octave)`` down to r_min."""

    r_max: float
    r_min: float
    per_octave: int = 4

    def __post_init__(self):
        if not (0 < self.r_max < 1):
            raise InputError("r_max must lie in (0, 1)")
        if not (0 < self.r_min < self.r_max):
            raise InputError("r_min must lie in (0, r_max)")
        if int(self.per_octave) != self.per_octave or self.per_octave < 1:
            raise InputError("per_octave must be a positive integer")
        if len(self.scales) < 4:
            raise InputError("a scale grid needs at least 4 scales")

    @property
    def scales(self) -> np.ndarray:
        n = int(math.floor(self.per_octave * math.log2(self.r_max / self.r_min) + 1e-9)) + 1
        return self.r_max * np.exp2(-np.arange(n) / self.per_octave)

    @property
    def octaves(self) -> float:
        return math.log2(self.r_max / self.r_min)

    def __len__(self):
        return len(self.scales)

    def default_window(self) -> int:
        """Rows in a window spanning DEFAULT_WINDOW_OCTAVES octaves (capped at the grid)."""
        return min(len(self), self.per_octave * DEFAULT_WINDOW_OCTAVES + 1)

    def check_mesh(self, mesh: float, what: str = "estimate") -> bool:
        """Warn when r_min < 4 * mesh; returns True when the grid is safe."""
        if mesh > 0 and self.r_min < 4.0 * mesh:
            warnings.warn(
                f"{what}: r_min={self.r_min:.3g} is below 4*mesh={4 * mesh:.3g}; "
                "fine scales see the sample as a finite set",
                MeshWarning,
                stacklevel=3,
            )
            return False
        return True

    def to_dict(self):
        return {"r_max": self.r_max, "r_min": self.r_min, "per_octave": self.per_octave}


@dataclass(frozen=True)
class LogLogTable:
    """Rows (log r, log v) with v > 0 and log r strictly decreasing."""

    r: np.ndarray
    value: np.ndarray
    label: str = ""
    dropped: int = 0

    @classmethod
    def from_values(cls, r, v, label=""):
        r = np.asarray(r, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if r.shape != v.shape:
            raise InputError("r and v must have equal length")
        if np.any(np.diff(r) >= 0):
            raise InputError("scales must be strictly decreasing")
        keep = np.isfinite(v) & (v > 0)
        return cls(r[keep], v[keep], label, int((~keep).sum()))

    def __len__(self):
        return len(self.r)

    @property
    def log_r(self):
        return np.log(self.r)

    @property
    def log_value(self):
        return np.log(self.value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "value", "log_r", "log_value"])
        for row in zip(self.r, self.value, self.log_r, self.log_value):
            w.writerow([fmt(x) for x in row])
        return buf.getvalue()


def fmt(x: float) -> str:
    """Deterministic 12-significant-digit rendering used in all machine output."""
    return format(float(x), ".12g")


@dataclass(frozen=True)
class SlopeReport:
    """Least-squares slopes of log v against log r.

    ``upper_env``/``lower_env`` are the largest/smallest slopes over all runs
    of ``window`` consecutive rows; ``global_ls`` fits every row.
    """

    global_ls: float
    upper_env: float
    lower_env: float
    window: int
    dropped_rows: int
    window_slopes: tuple = ()

    def to_dict(self):
        return {
            "global_ls": self.global_ls,
            "upper_env": self.upper_env,
            "lower_env": self.lower_env,
            "window": self.window,
            "dropped_rows": self.dropped_rows,
        }


def _ls_slope(x, y):
    xm = x - x.mean()
    den = float((xm * xm).sum())
    return float((xm * (y - y.mean())).sum() / den)


def window_slopes(x, y, window):
    """LS slope of y on x over every run of `window` consecutive rows."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    k = np.ones(window)
    sx = np.convolve(x, k, "valid")
    sy = np.convolve(y, k, "valid")
    sxx = np.convolve(x * x, k, "valid")
    sxy = np.convolve(x * y, k, "valid")
    num = sxy - sx * sy / window
    den = sxx - sx * sx / window
    return num / den


def slope_envelope(table: LogLogTable, window: int) -> SlopeReport:
    if window < 2:
        raise InputError("window must be at least 2")
    if len(table) < window:
        raise InputError(f"table {table.label!r} has {len(table)} usable rows, window needs {window}")
    x, y = table.log_r, table.log_value
    # centre before the running sums to keep cancellation small
    x = x - x.mean()
    y = y - y.mean()
    ws = window_slopes(x, y, window)
    return SlopeReport(
        global_ls=_ls_slope(x, y),
        upper_env=float(ws.max()),
        lower_env=float(ws.min()),
        window=int(window),
        dropped_rows=table.dropped,
        window_slopes=tuple(float(s) for s in ws),
    )
