"""Backend selection for the hot spatial kernels.

The compiled extension ``dimlab._kernels`` is used when importable; the
pure-Python module ``dimlab._kernels_py`` is the fallback. Setting
``DIMLAB_PURE=1`` forces the fallback. Both expose

``ball_weights(points, weights, centers, r, metric)``
    closed-ball weight sums around each center,
``greedy_pack(points, order, r, metric)``
    accepted centers of the greedy scan (distance to all accepted > 2r),
``local_counts(points, rank, centers, R, r, metric)``
    greedy r-packing size of the sub-cloud inside each B(x, R).

On top of either backend this module adds exact one-dimensional fast paths
(prefix sums and binary-lifted greedy jumps) used when the cloud is 1-D and,
for packings, scanned in monotone coordinate order.
"""

import os

import numpy as np

from . import _kernels_py

EUCLIDEAN = _kernels_py.EUCLIDEAN
CHEBYSHEV = _kernels_py.CHEBYSHEV

if os.environ.get("DIMLAB_PURE", "") not in ("", "0"):
    _backend = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _backend

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _backend = _kernels_py
        BACKEND = "python"


def use_backend(name):
    """Switch backend at runtime ('compiled' or 'python'); returns the previous one."""
    global _backend, BACKEND
    prev = BACKEND
    if name == "python":
        _backend = _kernels_py
    elif name == "compiled":
        from . import _kernels

        _backend = _kernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return prev


def compiled_available():
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


# ---------------------------------------------------------------------------
# one-dimensional fast paths


def _interval_bounds(xs, centers, r):
    """[lo, hi) index ranges of sorted `xs` within closed distance r of centers."""
    n = len(xs)
    lo = np.searchsorted(xs, centers - r, side="left")
    hi = np.searchsorted(xs, centers + r, side="right")
    # searchsorted compares x >= c - r; align with the |x - c| <= r predicate
    for _ in range(3):
        left = xs[np.clip(lo - 1, 0, n - 1)]
        here = xs[np.clip(lo, 0, n - 1)]
        dec = (lo > 0) & (np.abs(left - centers) <= r)
        inc = ~dec & (lo < n) & (here < centers) & (np.abs(here - centers) > r)
        lo = lo + inc.astype(np.int64) - dec.astype(np.int64)
        here = xs[np.clip(hi, 0, n - 1)]
        left = xs[np.clip(hi - 1, 0, n - 1)]
        inc = (hi < n) & (np.abs(here - centers) <= r)
        dec = ~inc & (hi > 0) & (left > centers) & (np.abs(left - centers) > r)
        hi = hi + inc.astype(np.int64) - dec.astype(np.int64)
    return lo, np.maximum(hi, lo)


def _ball_weights_1d(xs_sorted, w_sorted, centers, r):
    cs = np.concatenate(([0.0], np.cumsum(w_sorted)))
    lo, hi = _interval_bounds(xs_sorted, centers, r)
    out = cs[hi] - cs[lo]
    # isolated atoms: take the weight itself rather than a difference of sums
    single = hi - lo == 1
    out[single] = w_sorted[lo[single]]
    out[hi <= lo] = 0.0
    return np.maximum(out, 0.0)


def _next_free(xs, r):
    """For each sorted position j, the first k > j with xs[k] - xs[j] > 2r."""
    n = len(xs)
    idx = np.arange(n)
    nxt = np.searchsorted(xs, xs + 2.0 * r, side="right")
    for _ in range(3):
        inc = (nxt < n) & (xs[np.minimum(nxt, n - 1)] - xs <= 2.0 * r)
        dec = ~inc & (nxt - 1 > idx) & (xs[np.maximum(nxt - 1, 0)] - xs > 2.0 * r)
        nxt = nxt + inc.astype(np.int64) - dec.astype(np.int64)
    return nxt.astype(np.int64)


def _lift(nxt):
    n = len(nxt)
    up = [np.append(nxt, n)]
    while (1 << len(up)) <= n:
        prev = up[-1]
        up.append(prev[prev])
    return up


def _monotone_direction(points, order):
    """+1/-1 if scanning `order` visits the 1-D coordinates in strictly monotone order."""
    if points.shape[1] != 1 or len(order) < 2:
        return 1 if points.shape[1] == 1 else 0
    v = points[order, 0]
    dv = np.diff(v)
    if np.all(dv > 0):
        return 1
    if np.all(dv < 0):
        return -1
    return 0


# ---------------------------------------------------------------------------
# public kernel entry points


def ball_weights(points, weights, centers, r, metric=EUCLIDEAN):
    points = _f64(points)
    centers = _f64(centers).reshape(-1, points.shape[1])
    weights = _f64(weights)
    if points.shape[1] == 1:
        srt = np.argsort(points[:, 0], kind="stable")
        return _ball_weights_1d(points[srt, 0], weights[srt], centers[:, 0], r)
    return np.asarray(_backend.ball_weights(points, weights, centers, float(r), int(metric)))


def greedy_pack(points, order, r, metric=EUCLIDEAN):
    points = _f64(points)
    order = _i64(order)
    direction = _monotone_direction(points, order)
    if direction != 0 and len(order) > 1:
        xs = direction * points[order, 0]
        nxt = _next_free(xs, r)
        acc = []
        j = 0
        while j < len(xs):
            acc.append(j)
            j = nxt[j]
        return order[np.asarray(acc, dtype=np.int64)]
    try:
        return np.asarray(_backend.greedy_pack(points, order, float(r), int(metric)))
    except OverflowError:
        # cells too fine for linearised keys; the fallback hashes cell tuples
        return np.asarray(_kernels_py.greedy_pack(points, order, float(r), int(metric)))


def local_counts(points, order, centers, R, r, metric=EUCLIDEAN):
    """Greedy r-packing counts of the sub-clouds B(x, R), scanning in `order`.

    `R` may be a scalar (result shape (m,)) or a sequence (result shape
    (len(R), m)); per-r preprocessing is shared across the R values.
    """
    points = _f64(points)
    order = _i64(order)
    centers = _f64(centers).reshape(-1, points.shape[1])
    Rs = np.atleast_1d(np.asarray(R, dtype=np.float64))
    direction = _monotone_direction(points, order)
    if direction != 0 and len(order) > 1:
        xs = direction * points[order, 0]
        cx = direction * centers[:, 0]
        up = np.ascontiguousarray(np.stack(_lift(_next_free(xs, r))), dtype=np.int64)
        out = np.empty((len(Rs), len(centers)), dtype=np.int64)
        for row, RR in enumerate(Rs):
            out[row] = _backend.lifted_counts_1d(xs, up, _f64(cx), float(RR))
    else:
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order), dtype=np.int64)
        out = np.stack([
            np.asarray(_backend.local_counts(points, rank, centers, float(RR), float(r), int(metric)))
            for RR in Rs
        ])
    return out if np.ndim(R) else out[0]
