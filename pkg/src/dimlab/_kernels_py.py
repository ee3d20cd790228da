"""Pure-Python/numpy implementation of the spatial kernels.

Used when the compiled extension is unavailable, or when
``DIMLAB_PURE=1`` is set. Semantics must match ``_kernels.pyx`` exactly:
the test-suite runs both backends against each other.
"""

import numpy as np

EUCLIDEAN = 0
CHEBYSHEV = 1

# Cells are inflated slightly so that two points within distance h never
# land more than one cell apart after floating-point rounding.
CELL_INFLATE = 1.0 + 1e-6


def _dist(points, x, metric):
    diff = points - x
    if metric == CHEBYSHEV:
        return np.abs(diff).max(axis=1)
    return np.sqrt((diff * diff).sum(axis=1))


class _Grid:
    """Sparse uniform grid: sorted linear cell keys with CSR buckets."""

    def __init__(self, points, cell):
        self.points = points
        self.cell = cell
        self.origin = points.min(axis=0)
        coords = np.floor((points - self.origin) / cell).astype(np.int64)
        self.extent = coords.max(axis=0) + 1
        self.strides = np.ones(points.shape[1], dtype=np.int64)
        for k in range(points.shape[1] - 2, -1, -1):
            self.strides[k] = self.strides[k + 1] * self.extent[k + 1]
        if float(np.prod(self.extent.astype(np.float64))) > 2.0**62:
            raise OverflowError("grid too fine for 64-bit cell keys")
        self.coords = coords
        keys = coords @ self.strides
        self.perm = np.argsort(keys, kind="stable")
        sk = keys[self.perm]
        self.keys, self.starts = np.unique(sk, return_index=True)
        self.starts = np.append(self.starts, len(sk)).astype(np.int64)
        self.point_keys = keys

    def candidates(self, x, radius):
        """Indices in every cell that may hold points within `radius` of x."""
        lo = np.floor((x - radius - self.origin) / self.cell).astype(np.int64) - 1
        hi = np.floor((x + radius - self.origin) / self.cell).astype(np.int64) + 1
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, self.extent - 1)
        if np.any(lo > hi):
            return np.empty(0, dtype=np.int64)
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
        keys = mesh @ self.strides
        pos = np.searchsorted(self.keys, keys)
        hit = pos < len(self.keys)
        hit[hit] = self.keys[pos[hit]] == keys[hit]
        pos = pos[hit]
        if len(pos) == 0:
            return np.empty(0, dtype=np.int64)
        chunks = [self.perm[self.starts[p]:self.starts[p + 1]] for p in pos]
        return np.concatenate(chunks)


def ball_weights(points, weights, centers, r, metric):
    """Sum of `weights` over points within closed distance r of each center."""
    g = _Grid(points, r)
    out = np.zeros(len(centers), dtype=np.float64)
    for i, x in enumerate(centers):
        cand = g.candidates(x, r)
        if len(cand):
            d = _dist(points[cand], x, metric)
            out[i] = weights[cand[d <= r]].sum()
    return out


def _greedy(points, idx, r, metric):
    """Greedy scan over `idx` (already in scan order); returns accepted ids."""
    h = 2.0 * r * CELL_INFLATE
    cells = {}
    accepted = []
    if len(idx) == 0:
        return accepted
    origin = points[idx].min(axis=0)
    coords = np.floor((points[idx] - origin) / h).astype(np.int64)
    d = points.shape[1]
    offsets = np.stack(np.meshgrid(*([np.arange(-1, 2)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    for j, p in enumerate(idx):
        c = coords[j]
        ok = True
        for off in offsets:
            bucket = cells.get(tuple(c + off))
            if bucket is None:
                continue
            dd = _dist(points[bucket], points[p], metric)
            if np.any(dd <= 2.0 * r):
                ok = False
                break
        if ok:
            accepted.append(int(p))
            cells.setdefault(tuple(c), []).append(int(p))
    return accepted


def greedy_pack(points, order, r, metric):
    return np.asarray(_greedy(points, np.asarray(order, dtype=np.int64), r, metric), dtype=np.int64)


def local_counts(points, rank, centers, R, r, metric):
    """Greedy r-packing size of the sub-cloud in B(x, R), scanning by `rank`."""
    g = _Grid(points, R)
    out = np.zeros(len(centers), dtype=np.int64)
    for i, x in enumerate(centers):
        cand = g.candidates(x, R)
        if len(cand) == 0:
            continue
        d = _dist(points[cand], x, metric)
        sub = cand[d <= R]
        sub = sub[np.argsort(rank[sub], kind="stable")]
        out[i] = len(_greedy(points, sub, r, metric))
    return out


def lifted_counts_1d(xs, up, cx, R):
    """Greedy counts inside [c - R, c + R] for sorted xs, via binary-lifted jumps."""
    n = len(xs)
    lo = np.searchsorted(xs, cx - R, side="left")
    hi = np.searchsorted(xs, cx + R, side="right")
    # align with the closed-ball predicate |x - c| <= R after rounding
    for _ in range(3):
        left = xs[np.clip(lo - 1, 0, n - 1)]
        here = xs[np.clip(lo, 0, n - 1)]
        dec = (lo > 0) & (np.abs(left - cx) <= R)
        inc = ~dec & (lo < n) & (here < cx) & (np.abs(here - cx) > R)
        lo = lo + inc.astype(np.int64) - dec.astype(np.int64)
        here = xs[np.clip(hi, 0, n - 1)]
        left = xs[np.clip(hi - 1, 0, n - 1)]
        inc = (hi < n) & (np.abs(here - cx) <= R)
        dec = ~inc & (hi > 0) & (left > cx) & (np.abs(left - cx) > R)
        hi = hi + inc.astype(np.int64) - dec.astype(np.int64)
    nonempty = hi > lo
    cnt = nonempty.astype(np.int64)
    cur = np.minimum(lo, n - 1)
    last = hi - 1
    for k in range(up.shape[0] - 1, -1, -1):
        cand = up[k][cur]
        ok = (cand <= last) & nonempty
        cur = np.where(ok, cand, cur)
        cnt += ok.astype(np.int64) << k
    return cnt
