"""Finite metric spaces: point clouds, closed-ball queries and packings.

A :class:`PointCloud` stands in for a compact metric space. Balls are closed
throughout, so two balls B(x, r), B(y, r) are disjoint exactly when
``d(x, y) > 2r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from ._kernels_py import _Grid
from .errors import CapacityError, InputError

METRICS = {"euclidean": kernels.EUCLIDEAN, "chebyshev": kernels.CHEBYSHEV}

DEFAULT_DEDUP_EPS = 1e-12
ORACLE_CAP = 20


@dataclass(frozen=True)
class FixtureMeta:
    """Provenance of a cloud.

    Attributes
    ----------
    name : str
        Fixture or file name.
    scale_factor : float
        Factor applied to the raw coordinates so the cloud fits in a set of
        diameter at most 1.
    mesh : float
        Upper bound on the distance from the underlying compact set to the
        sample, after scaling. 0 means the sample is the set.
    dedup_eps : float
        Points closer than this (after scaling) are merged.
    """

    name: str = "cloud"
    scale_factor: float = 1.0
    mesh: float = 0.0
    dedup_eps: float = DEFAULT_DEDUP_EPS
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.scale_factor > 0:
            raise InputError("scale_factor must be positive")
        if not self.mesh >= 0:
            raise InputError("mesh must be non-negative")
        if not self.dedup_eps >= 0:
            raise InputError("dedup_eps must be non-negative")

    def to_dict(self):
        d = {
            "name": self.name,
            "scale_factor": self.scale_factor,
            "mesh": self.mesh,
            "dedup_eps": self.dedup_eps,
        }
        if self.extra:
            d["extra"] = self.extra
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d.get("name", "cloud"),
            scale_factor=float(d.get("scale_factor", 1.0)),
            mesh=float(d.get("mesh", 0.0)),
            dedup_eps=float(d.get("dedup_eps", DEFAULT_DEDUP_EPS)),
            extra=dict(d.get("extra", {})),
        )


class PointCloud:
    """Immutable finite point set in R^d with a Euclidean or Chebyshev metric.

    Construct through :meth:`from_points`, which validates, deduplicates at
    ``meta.dedup_eps`` (keeping the first occurrence) and freezes the array.
    """

    __slots__ = ("points", "metric", "meta")

    def __init__(self, points, metric="euclidean", meta=None):
        pts = np.array(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise InputError("a point cloud needs at least one point with at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise InputError("coordinates must be finite")
        if metric not in METRICS:
            raise InputError(f"unknown metric {metric!r}; expected one of {sorted(METRICS)}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "meta", meta if meta is not None else FixtureMeta())

    def __setattr__(self, name, value):
        raise AttributeError("PointCloud is immutable")

    @classmethod
    def from_points(cls, points, metric="euclidean", meta=None):
        meta = meta if meta is not None else FixtureMeta()
        raw = cls(points, metric, meta)
        keep = dedup_indices(raw.points, meta.dedup_eps, METRICS[metric])
        if len(keep) == len(raw):
            return raw
        return cls(raw.points[keep], metric, meta)

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        return f"PointCloud(n={len(self)}, dim={self.dim}, metric={self.metric!r}, name={self.meta.name!r})"

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def metric_code(self):
        return METRICS[self.metric]

    def distances_to(self, x):
        x = self._check_point(x)
        diff = self.points - x
        if self.metric == "chebyshev":
            return np.abs(diff).max(axis=1)
        return np.sqrt((diff * diff).sum(axis=1))

    def diameter_bound(self):
        """Bounding-box diameter (>= the true diameter)."""
        span = self.points.max(axis=0) - self.points.min(axis=0)
        if self.metric == "chebyshev":
            return float(span.max())
        return float(np.sqrt((span * span).sum()))

    def _check_point(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dim:
            raise InputError(f"point has {x.shape[0]} coordinates, cloud has dimension {self.dim}")
        return x

    def subset(self, idx, name=None):
        meta = self.meta if name is None else FixtureMeta(name, self.meta.scale_factor, self.meta.mesh, self.meta.dedup_eps)
        return PointCloud(self.points[np.asarray(idx, dtype=np.int64)], self.metric, meta)


def dedup_indices(points, eps, metric=kernels.EUCLIDEAN):
    """Indices of points kept after merging points within `eps`, first occurrence wins."""
    n = points.shape[0]
    order = np.arange(n, dtype=np.int64)
    if eps > 0:
        # only points with an eps-neighbour along the widest axis can merge
        axis = int(np.argmax(points.max(axis=0) - points.min(axis=0)))
        srt = np.argsort(points[:, axis], kind="stable")
        close = np.diff(points[srt, axis]) <= eps
        suspect = np.zeros(n, dtype=bool)
        suspect[srt[:-1][close]] = True
        suspect[srt[1:][close]] = True
        if not suspect.any():
            return order
        sub = order[suspect]
        # conflict iff distance <= 2 * (eps / 2): exactly the greedy packing test
        kept = sub[kernels.greedy_pack(points[sub], np.arange(len(sub), dtype=np.int64), eps / 2.0, metric)]
        return np.sort(np.concatenate([order[~suspect], kept]))
    _, first = np.unique(points, axis=0, return_index=True)
    return np.sort(first)


def normalize(points, metric="euclidean"):
    """Scale factor bringing the bounding-box diameter to at most 1 (never enlarges)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    span = pts.max(axis=0) - pts.min(axis=0)
    ext = float(span.max()) if metric == "chebyshev" else float(np.sqrt((span * span).sum()))
    return 1.0 if ext <= 1.0 else 1.0 / ext


class GridIndex:
    """Uniform grid over a cloud for closed-ball queries.

    Buckets are stored CSR-style over sorted linearised cell keys, so memory
    is proportional to the number of occupied cells.
    """

    def __init__(self, cloud: PointCloud, cell_size: float):
        if not cell_size > 0:
            raise InputError("cell_size must be positive")
        self.cloud = cloud
        self.cell_size = float(cell_size)
        self._grid = _Grid(np.ascontiguousarray(cloud.points), self.cell_size)

    @property
    def buckets(self):
        """Map from integer cell coordinates to the point indices in that cell."""
        g = self._grid
        out = {}
        for u in range(len(g.keys)):
            members = g.perm[g.starts[u]:g.starts[u + 1]]
            out[tuple(int(c) for c in g.coords[members[0]])] = sorted(int(m) for m in members)
        return out

    def candidate_cells(self, x, r):
        """Cell-coordinate box inspected by a query of radius r at x."""
        g = self._grid
        lo = np.floor((x - r - g.origin) / g.cell).astype(np.int64) - 1
        hi = np.floor((x + r - g.origin) / g.cell).astype(np.int64) + 1
        return np.maximum(lo, 0), np.minimum(hi, g.extent - 1)


def range_query(cloud: PointCloud, index: GridIndex, x, r: float) -> list[int]:
    """Indices of cloud points in the closed ball B(x, r), ascending."""
    if not r > 0:
        raise InputError("radius must be positive")
    x = cloud._check_point(x)
    cand = index._grid.candidates(x, r)
    if len(cand) == 0:
        return []
    diff = cloud.points[cand] - x
    d = np.abs(diff).max(axis=1) if cloud.metric == "chebyshev" else np.sqrt((diff * diff).sum(axis=1))
    return sorted(int(i) for i in cand[d <= r])


@dataclass(frozen=True)
class Packing:
    """Centers of pairwise disjoint closed r-balls; `maximal` if the 2r-balls cover."""

    radius: float
    center_ids: tuple
    maximal: bool

    def __len__(self):
        return len(self.center_ids)

    def min_separation(self, cloud: PointCloud) -> float:
        ids = list(self.center_ids)
        if len(ids) < 2:
            return float("inf")
        best = float("inf")
        for j, i in enumerate(ids[:-1]):
            d = cloud.subset(ids[j + 1:]).distances_to(cloud.points[i])
            best = min(best, float(d.min()))
        return best

    def cover_radius(self, cloud: PointCloud) -> float:
        """Largest distance from a cloud point to its nearest center."""
        centers = cloud.subset(list(self.center_ids))
        return max(float(centers.distances_to(p).min()) for p in cloud.points)


def _resolve_order(n, order, seed):
    if order is not None:
        order = np.asarray(order, dtype=np.int64)
        if sorted(order.tolist()) != list(range(n)):
            raise InputError("order must be a permutation of all point indices")
        return order
    if seed is not None:
        return np.random.default_rng(seed).permutation(n).astype(np.int64)
    return np.arange(n, dtype=np.int64)


def greedy_maximal_packing(cloud: PointCloud, r: float, order=None, seed=None) -> Packing:
    """Greedy maximal r-packing.

    Points are scanned in `order` (default: input order; `seed` draws a
    random permutation instead) and accepted when farther than 2r from every
    accepted center. The result is maximal by construction.
    """
    if not r > 0:
        raise InputError("radius must be positive")
    order = _resolve_order(len(cloud), order, seed)
    ids = kernels.greedy_pack(cloud.points, order, r, cloud.metric_code)
    return Packing(float(r), tuple(int(i) for i in ids), True)


def packing_count(cloud: PointCloud, r: float, restrict=None, order=None) -> int:
    """Size of the greedy maximal r-packing of the cloud, or of its part in B(x, R).

    `restrict` is an optional ``(x, R)`` pair with R > r.
    """
    if not r > 0:
        raise InputError("radius must be positive")
    order = _resolve_order(len(cloud), order, None)
    if restrict is None:
        return len(kernels.greedy_pack(cloud.points, order, r, cloud.metric_code))
    x, R = restrict
    if not R > r:
        raise InputError("restriction radius must exceed the packing radius")
    x = cloud._check_point(x)
    return int(kernels.local_counts(cloud.points, order, x.reshape(1, -1), R, r, cloud.metric_code)[0])


def conflict_graph(cloud: PointCloud, r: float) -> list[int]:
    """Adjacency bitmasks: i ~ j when the closed r-balls intersect (d <= 2r)."""
    n = len(cloud)
    adj = [0] * n
    for i in range(n):
        d = cloud.distances_to(cloud.points[i])
        for j in np.nonzero(d <= 2.0 * r)[0]:
            if j != i:
                adj[i] |= 1 << int(j)
    return adj


def _max_independent(adj: Sequence[int], cand: int, size: int, best: list) -> None:
    if cand == 0:
        if size > best[0]:
            best[0] = size
        return
    if size + bin(cand).count("1") <= best[0]:
        return
    # branch on a vertex of maximum degree inside the candidate set
    v, deg = -1, -1
    c = cand
    while c:
        low = c & -c
        u = low.bit_length() - 1
        du = bin(adj[u] & cand).count("1")
        if du > deg:
            v, deg = u, du
        c ^= low
    if deg == 0:
        total = size + bin(cand).count("1")
        if total > best[0]:
            best[0] = total
        return
    bit = 1 << v
    _max_independent(adj, cand & ~bit & ~adj[v], size + 1, best)
    _max_independent(adj, cand & ~bit, size, best)


def exact_packing_number(cloud: PointCloud, r: float, cap: int = ORACLE_CAP) -> int:
    """Exact maximum r-packing size by branch and bound on the conflict graph.

    Only for small clouds (at most `cap` points); used as a test oracle.
    """
    if not r > 0:
        raise InputError("radius must be positive")
    if len(cloud) > cap:
        raise CapacityError(f"exact packing oracle is capped at {cap} points, cloud has {len(cloud)}")
    adj = conflict_graph(cloud, r)
    best = [0]
    _max_independent(adj, (1 << len(cloud)) - 1, 0, best)
    return best[0]


# ---------------------------------------------------------------------------
# text format


def parse_rows(text: str, source: str = "<text>") -> np.ndarray:
    """Parse comma/whitespace separated numeric rows; '#' starts a comment line."""
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.replace(",", " ").split()
        try:
            row = [float(p) for p in parts]
        except ValueError as exc:
            raise InputError(f"{source}:{lineno}: non-numeric field") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{source}:{lineno}: expected {width} columns, found {len(row)}")
        rows.append(row)
    if not rows:
        raise InputError(f"{source}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def format_rows(arr: np.ndarray, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend("# " + h for h in header.splitlines())
    for row in np.atleast_2d(arr):
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def load_cloud(path, metric="euclidean", meta: FixtureMeta | None = None) -> PointCloud:
    """Read a point file and normalise it to diameter at most 1.

    The mesh recorded in `meta` is interpreted in the file's units and scaled
    along with the coordinates.
    """
    with open(path) as fh:
        raw = parse_rows(fh.read(), str(path))
    return cloud_from_array(raw, metric, meta, name=str(path))


def cloud_from_array(raw, metric="euclidean", meta: FixtureMeta | None = None, name="cloud") -> PointCloud:
    scale = normalize(raw, metric)
    base = meta if meta is not None else FixtureMeta(name=name)
    meta = FixtureMeta(
        name=base.name,
        scale_factor=base.scale_factor * scale,
        mesh=base.mesh * scale,
        dedup_eps=base.dedup_eps,
        extra=base.extra,
    )
    return PointCloud.from_points(raw * scale, metric, meta)
