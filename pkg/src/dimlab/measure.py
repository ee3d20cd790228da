"""Atomic measures on point clouds.

Weights are stored densely, one per host point. A measure is *fully
supported* when every host point carries positive weight. Witness measures
only charge packing centers; they record a ``support_floor`` instead, the
radius from which on every closed ball about a host point has positive mass.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError, InputError
from .metric import FixtureMeta, PointCloud, format_rows, normalize, parse_rows
from .parallel import pmap
from .scaling import LogLogTable, ScaleGrid


class DiscreteMeasure:
    """Finite atomic measure on the points of a host cloud.

    Parameters
    ----------
    host : PointCloud
    weights : array of shape (len(host),)
        Non-negative, finite, with positive total.
    support_floor : float
        For measures that are not fully supported: every ball B(x, r) with
        x in the host and r >= support_floor has positive mass.
    notes : tuple of str
        Warnings recorded at construction (for example mesh-guard hits).
    """

    __slots__ = ("host", "weights", "support_floor", "notes", "_masses")

    def __init__(self, host: PointCloud, weights, support_floor=0.0, notes=()):
        w = np.array(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != len(host):
            raise InputError(f"expected {len(host)} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights must be finite and non-negative")
        if not w.sum() > 0:
            raise InputError("a measure needs at least one positive atom")
        w.setflags(write=False)
        object.__setattr__(self, "host", host)
        object.__setattr__(self, "weights", w)
        floor = 0.0 if bool(np.all(w > 0)) else float(support_floor)
        object.__setattr__(self, "support_floor", floor)
        object.__setattr__(self, "notes", tuple(notes))
        object.__setattr__(self, "_masses", {})

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    @classmethod
    def from_weights(cls, host, weights, **kw):
        return cls(host, weights, **kw)

    @classmethod
    def from_atoms(cls, host, indices, weights, **kw):
        idx = np.asarray(indices, dtype=np.int64)
        w = np.asarray(weights, dtype=np.float64)
        if idx.shape != w.shape:
            raise InputError("indices and weights differ in length")
        if len(np.unique(idx)) != len(idx):
            raise InputError("atom indices must be distinct")
        if np.any(w <= 0):
            raise InputError("atom weights must be positive")
        if len(idx) and (idx.min() < 0 or idx.max() >= len(host)):
            raise InputError("atom index outside the host cloud")
        dense = np.zeros(len(host))
        dense[idx] = w
        return cls(host, dense, **kw)

    def __repr__(self):
        return f"DiscreteMeasure(atoms={len(self.atom_ids)}, host={self.host!r}, total={self.total_mass:.6g})"

    @property
    def full_support(self) -> bool:
        return bool(np.all(self.weights > 0))

    @property
    def atom_ids(self) -> np.ndarray:
        return np.nonzero(self.weights > 0)[0]

    @property
    def atoms(self):
        return [(int(i), float(self.weights[i])) for i in self.atom_ids]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def scaled(self, c: float) -> "DiscreteMeasure":
        if not c > 0:
            raise InputError("scale must be positive")
        return DiscreteMeasure(self.host, self.weights * c, self.support_floor, self.notes)

    def check_support(self, r_min: float, what: str = "estimate"):
        """Raise ContractError if balls at radius r_min may be empty."""
        if r_min < self.support_floor:
            raise ContractError(
                f"{what}: measure only charges every ball from r={self.support_floor:.3g} on, "
                f"grid reaches r_min={r_min:.3g}"
            )


def ball_mass(measure: DiscreteMeasure, x, r: float) -> float:
    """mu(B(x, r)) for the closed ball."""
    if not r > 0:
        raise InputError("radius must be positive")
    x = measure.host._check_point(x)
    host = measure.host
    return float(kernels.ball_weights(host.points, measure.weights, x.reshape(1, -1), r, host.metric_code)[0])


MASS_CACHE_BYTES = 64 << 20


def ball_masses(measure: DiscreteMeasure, r: float, centers=None) -> np.ndarray:
    """mu(B(x, r)) for every host point x (or for the given center array).

    Whole-host results are cached per measure (read-only arrays) since the
    estimators revisit the same radii.
    """
    host = measure.host
    if centers is not None:
        c = np.asarray(centers, dtype=np.float64).reshape(-1, host.dim)
        return kernels.ball_weights(host.points, measure.weights, c, r, host.metric_code)
    cache = measure._masses
    key = float(r)
    hit = cache.get(key)
    if hit is None:
        hit = kernels.ball_weights(host.points, measure.weights, host.points, key, host.metric_code)
        hit.setflags(write=False)
        if (len(cache) + 1) * hit.nbytes <= MASS_CACHE_BYTES:
            cache[key] = hit
    return hit


@dataclass(frozen=True)
class MassExtrema:
    min_mass: float
    argmin: int
    max_mass: float
    argmax: int

    def __iter__(self):
        return iter((self.min_mass, self.argmin, self.max_mass, self.argmax))


def ball_mass_extrema(measure: DiscreteMeasure, r: float) -> MassExtrema:
    """Smallest and largest ball mass over all host centers; ties go to the lowest index."""
    if not r > 0:
        raise InputError("radius must be positive")
    m = ball_masses(measure, r)
    lo, hi = int(np.argmin(m)), int(np.argmax(m))
    return MassExtrema(float(m[lo]), lo, float(m[hi]), hi)


def doubling_ratios(measure: DiscreteMeasure, r: float) -> np.ndarray:
    """mu(B(x, 2r)) / mu(B(x, r)) at every host point with mu(B(x, r)) > 0."""
    small = ball_masses(measure, r)
    big = ball_masses(measure, 2.0 * r)
    ok = small > 0
    return big[ok] / small[ok]


@dataclass(frozen=True)
class DoublingSweep:
    table: LogLogTable
    max_ratio: float

    @property
    def running_max(self) -> np.ndarray:
        """Largest ratio seen down to each scale; non-decreasing as r shrinks."""
        return np.maximum.accumulate(self.table.value)


def doubling_sweep(measure: DiscreteMeasure, grid: ScaleGrid) -> DoublingSweep:
    scales = grid.scales
    worst = np.array(pmap(lambda r: float(doubling_ratios(measure, r).max()), scales))
    return DoublingSweep(LogLogTable.from_values(scales, worst, "doubling"), float(worst.max()))


def _union_host(hosts):
    metric = hosts[0].metric
    if any(h.metric != metric or h.dim != hosts[0].dim for h in hosts):
        raise InputError("components live on incompatible hosts")
    if all(h is hosts[0] or np.array_equal(h.points, hosts[0].points) for h in hosts):
        return hosts[0], [np.arange(len(h)) for h in hosts]
    pts = np.concatenate([h.points for h in hosts])
    _, first, inverse = np.unique(pts, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    # keep first-occurrence order in the union
    keep = np.sort(first)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    pos = rank[inverse]
    meta = FixtureMeta(
        name="mix",
        scale_factor=hosts[0].meta.scale_factor,
        mesh=max(h.meta.mesh for h in hosts),
        dedup_eps=hosts[0].meta.dedup_eps,
    )
    union = PointCloud(pts[keep], metric, meta)
    maps, start = [], 0
    for h in hosts:
        maps.append(pos[start:start + len(h)])
        start += len(h)
    return union, maps


def mix_measures(components) -> DiscreteMeasure:
    """sum_n 2**-n mu_n (n from 1) on the union of the component hosts.

    Points are merged when their coordinates coincide exactly.
    """
    components = list(components)
    if not components:
        raise InputError("need at least one component")
    union, maps = _union_host([m.host for m in components])
    w = np.zeros(len(union))
    for n, (m, idx) in enumerate(zip(components, maps), 1):
        np.add.at(w, idx, m.weights * 2.0**-n)
    floor = max(m.support_floor for m in components)
    notes = tuple(n for m in components for n in m.notes)
    return DiscreteMeasure(union, w, floor, notes)


def witness_k_max(cloud: PointCloud, cap: int = 40) -> int:
    """Largest k with 2**-k >= mesh (for exact samples, until packings stop growing)."""
    mesh = cloud.meta.mesh
    if mesh > 0:
        return max(1, min(cap, int(math.floor(-math.log2(mesh)))))
    order = np.arange(len(cloud), dtype=np.int64)
    for k in range(1, cap + 1):
        if len(kernels.greedy_pack(cloud.points, order, 2.0**-k, cloud.metric_code)) == len(cloud):
            return k
    return cap


def witness_measure(cloud: PointCloud, k_list) -> DiscreteMeasure:
    """sum_k k**-2 * (1/N_k) * sum of Dirac masses at a greedy 2**-k packing.

    A consecutive k_list 1..K gives the upper construction, a sparse one the
    lower (subsequence) construction. Scales below the sample mesh are still
    used but recorded in ``notes``.
    """
    ks = [int(k) for k in k_list]
    if not ks:
        raise InputError("k_list must be non-empty")
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise InputError("k_list must be strictly increasing positive integers")
    if cloud.diameter_bound() > 1 + 1e-9:
        raise InputError("witness construction expects a cloud of diameter at most 1")
    notes = []
    order = np.arange(len(cloud), dtype=np.int64)
    w = np.zeros(len(cloud))
    for k in ks:
        r = 2.0**-k
        if r < cloud.meta.mesh:
            notes.append(f"k={k}: 2^-k={r:.3g} below sample mesh {cloud.meta.mesh:.3g}")
        ids = kernels.greedy_pack(cloud.points, order, r, cloud.metric_code)
        w[ids] += 1.0 / (k * k * len(ids))
    for n in notes:
        warnings.warn(n, stacklevel=2)
    return DiscreteMeasure(cloud, w, support_floor=2.0 ** (1 - ks[-1]), notes=notes)


# ---------------------------------------------------------------------------
# measure files: point rows with a trailing weight column

_FLOOR_RE = re.compile(r"#\s*support_floor\s*=\s*([0-9eE+.\-]+)")


def format_measure(measure: DiscreteMeasure, all_points=False) -> str:
    """Rows 'x_1 ... x_d w' for the atoms (or every host point)."""
    idx = np.arange(len(measure.host)) if all_points else measure.atom_ids
    body = np.column_stack([measure.host.points[idx], measure.weights[idx]])
    header = f"support_floor={measure.support_floor!r}" if measure.support_floor > 0 else None
    return format_rows(body, header)


def parse_measure(text: str, host: PointCloud | None = None, metric="euclidean", source="<text>") -> DiscreteMeasure:
    """Parse a measure file.

    Without a host the atoms form their own host, normalised to diameter at
    most 1. With a host, coordinates are rescaled by the host's scale factor
    and each atom is matched to a host point within the dedup tolerance.
    """
    rows = parse_rows(text, source)
    if rows.shape[1] < 2:
        raise InputError(f"{source}: a measure row needs coordinates and a weight")
    pts, w = rows[:, :-1], rows[:, -1]
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise InputError(f"{source}: weights must be positive")
    m = _FLOOR_RE.search(text)
    floor = float(m.group(1)) if m else 0.0
    if host is None:
        scale = normalize(pts, metric)
        host = PointCloud.from_points(pts * scale, metric, FixtureMeta(name=source, scale_factor=scale))
        if len(host) != len(pts):
            raise InputError(f"{source}: duplicate atom positions")
        return DiscreteMeasure(host, w, floor * scale)
    if pts.shape[1] != host.dim:
        raise InputError(f"{source}: atoms have {pts.shape[1]} coordinates, host has {host.dim}")
    pts = pts * host.meta.scale_factor
    idx = match_points(host, pts)
    if len(np.unique(idx)) != len(idx):
        raise InputError(f"{source}: two atoms map to the same host point")
    return DiscreteMeasure.from_atoms(host, idx, w, support_floor=floor * host.meta.scale_factor)


def match_points(host: PointCloud, pts) -> np.ndarray:
    """Index of the host point equal to each row of pts (within dedup tolerance)."""
    lookup = {tuple(p): i for i, p in enumerate(host.points.tolist())}
    out = np.empty(len(pts), dtype=np.int64)
    tol = max(host.meta.dedup_eps, 1e-12)
    for j, p in enumerate(np.asarray(pts, dtype=np.float64)):
        i = lookup.get(tuple(p.tolist()))
        if i is None:
            d = host.distances_to(p)
            i = int(np.argmin(d))
            if d[i] > tol * 10:
                raise InputError(f"atom {j} at {p.tolist()} is not a host point")
        out[j] = i
    return out


def load_measure(path, host: PointCloud | None = None, metric="euclidean") -> DiscreteMeasure:
    with open(path) as fh:
        return parse_measure(fh.read(), host, metric, str(path))
