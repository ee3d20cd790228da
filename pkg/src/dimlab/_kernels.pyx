# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled spatial kernels: closed-ball weight sums and greedy packings.

Mirrors ``_kernels_py`` exactly; see that module for the reference semantics.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, fabs
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport int64_t

cnp.import_array()

cdef enum:
    MAXD = 8

cdef double CELL_INFLATE = 1.0 + 1e-6


cdef struct Grid:
    int d
    Py_ssize_t n
    Py_ssize_t m
    double cell
    double origin[MAXD]
    int64_t extent[MAXD]
    int64_t strides[MAXD]
    int64_t *keys      # unique sorted cell keys, length m
    int64_t *starts    # CSR offsets, length m + 1
    int64_t *perm      # point ids grouped by cell, length n
    int64_t *coords    # per point cell coords, n * d
    int64_t *cellpos   # per point index into keys, length n


cdef class _GridHolder:
    """Owns the malloc'd buffers of a Grid."""
    cdef Grid g

    def __dealloc__(self):
        free(self.g.keys)
        free(self.g.starts)
        free(self.g.perm)
        free(self.g.coords)
        free(self.g.cellpos)


cdef _GridHolder build_grid(const double[:, ::1] pts, const int64_t[::1] ids, double cell):
    """Grid over the subset `ids` of `pts`."""
    cdef _GridHolder h = _GridHolder()
    cdef Grid *g = &h.g
    cdef Py_ssize_t n = ids.shape[0], i, j
    cdef int d = pts.shape[1], k
    cdef double v
    cdef int64_t c
    if d > MAXD:
        raise ValueError("dimension above compiled limit")
    g.d = d
    g.n = n
    g.cell = cell
    g.keys = NULL
    g.starts = NULL
    g.perm = NULL
    g.coords = <int64_t *> malloc(max(n * d, 1) * sizeof(int64_t))
    g.cellpos = <int64_t *> malloc(max(n, 1) * sizeof(int64_t))
    for k in range(d):
        g.origin[k] = pts[ids[0], k]
        for i in range(1, n):
            v = pts[ids[i], k]
            if v < g.origin[k]:
                g.origin[k] = v
    for k in range(d):
        g.extent[k] = 1
    for i in range(n):
        for k in range(d):
            c = <int64_t> floor((pts[ids[i], k] - g.origin[k]) / cell)
            g.coords[i * d + k] = c
            if c + 1 > g.extent[k]:
                g.extent[k] = c + 1
    cdef double total = 1.0
    for k in range(d):
        total *= <double> g.extent[k]
    if total > 4.611686018427388e18:
        raise OverflowError("grid too fine for 64-bit cell keys")
    g.strides[d - 1] = 1
    for k in range(d - 2, -1, -1):
        g.strides[k] = g.strides[k + 1] * g.extent[k + 1]
    keys_np = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] keys = keys_np
    for i in range(n):
        c = 0
        for k in range(d):
            c += g.coords[i * d + k] * g.strides[k]
        keys[i] = c
    order_np = np.argsort(keys_np, kind="stable")
    cdef int64_t[::1] order = order_np.astype(np.int64)
    g.perm = <int64_t *> malloc(max(n, 1) * sizeof(int64_t))
    g.keys = <int64_t *> malloc(max(n, 1) * sizeof(int64_t))
    g.starts = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef Py_ssize_t m = 0
    for j in range(n):
        i = order[j]
        g.perm[j] = ids[i]
        if m == 0 or keys[i] != g.keys[m - 1]:
            g.keys[m] = keys[i]
            g.starts[m] = j
            m += 1
        g.cellpos[i] = m - 1
    g.starts[m] = n
    g.m = m
    return h


cdef inline Py_ssize_t find_key(Grid *g, int64_t key) nogil:
    cdef Py_ssize_t lo = 0, hi = g.m, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if g.keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < g.m and g.keys[lo] == key:
        return lo
    return -1


cdef inline double dist(const double[:, ::1] pts, Py_ssize_t a, double *x, int d, int metric) nogil:
    cdef double s = 0.0, t
    cdef int k
    if metric == 1:
        for k in range(d):
            t = fabs(pts[a, k] - x[k])
            if t > s:
                s = t
        return s
    for k in range(d):
        t = pts[a, k] - x[k]
        s += t * t
    return sqrt(s)


cdef inline bint box_range(Grid *g, double *x, double radius,
                           int64_t *lo, int64_t *hi) nogil:
    cdef int k
    for k in range(g.d):
        lo[k] = <int64_t> floor((x[k] - radius - g.origin[k]) / g.cell) - 1
        hi[k] = <int64_t> floor((x[k] + radius - g.origin[k]) / g.cell) + 1
        if lo[k] < 0:
            lo[k] = 0
        if hi[k] > g.extent[k] - 1:
            hi[k] = g.extent[k] - 1
        if lo[k] > hi[k]:
            return False
    return True


cdef inline bint box_next(int d, int64_t *cur, int64_t *lo, int64_t *hi) nogil:
    cdef int k = d - 1
    while k >= 0:
        cur[k] += 1
        if cur[k] <= hi[k]:
            return True
        cur[k] = lo[k]
        k -= 1
    return False


def ball_weights(const double[:, ::1] points, const double[::1] weights,
                 const double[:, ::1] centers, double r, int metric):
    cdef Py_ssize_t n = points.shape[0], nc = centers.shape[0], i, j, u
    cdef int d = points.shape[1], k
    ids_np = np.arange(n, dtype=np.int64)
    cdef _GridHolder h = build_grid(points, ids_np, r)
    cdef Grid *g = &h.g
    out_np = np.zeros(nc, dtype=np.float64)
    cdef double[::1] out = out_np
    cdef int64_t lo[MAXD]
    cdef int64_t hi[MAXD]
    cdef int64_t cur[MAXD]
    cdef double x[MAXD]
    cdef int64_t key
    cdef double acc
    cdef Py_ssize_t p
    with nogil:
        for i in range(nc):
            for k in range(d):
                x[k] = centers[i, k]
            if not box_range(g, x, r, lo, hi):
                continue
            for k in range(d):
                cur[k] = lo[k]
            acc = 0.0
            while True:
                key = 0
                for k in range(d):
                    key += cur[k] * g.strides[k]
                u = find_key(g, key)
                if u >= 0:
                    for j in range(g.starts[u], g.starts[u + 1]):
                        p = g.perm[j]
                        if dist(points, p, x, d, metric) <= r:
                            acc += weights[p]
                if not box_next(d, cur, lo, hi):
                    break
            out[i] = acc
    return out_np


cdef Py_ssize_t greedy_scan(const double[:, ::1] points, Grid *g, int64_t *scan, Py_ssize_t ns,
                            int64_t *local, int64_t *head, int64_t *nxt,
                            int64_t *acc_out, double r, int metric) nogil:
    """Greedy scan; `local[p]` maps a point id to its row in the grid arrays."""
    cdef int d = g.d, k
    cdef Py_ssize_t s, q, u, na = 0, row
    cdef int64_t p, a, key
    cdef int64_t lo[MAXD]
    cdef int64_t hi[MAXD]
    cdef int64_t cur[MAXD]
    cdef double x[MAXD]
    cdef bint ok, inside
    cdef double lim = 2.0 * r
    for s in range(ns):
        p = scan[s]
        row = local[p]
        for k in range(d):
            x[k] = points[p, k]
            lo[k] = g.coords[row * d + k] - 1
            hi[k] = g.coords[row * d + k] + 1
            if lo[k] < 0:
                lo[k] = 0
            if hi[k] > g.extent[k] - 1:
                hi[k] = g.extent[k] - 1
            cur[k] = lo[k]
        ok = True
        while ok:
            key = 0
            for k in range(d):
                key += cur[k] * g.strides[k]
            u = find_key(g, key)
            if u >= 0:
                a = head[u]
                while a >= 0:
                    if dist(points, a, x, d, metric) <= lim:
                        ok = False
                        break
                    a = nxt[a]
            if not box_next(d, cur, lo, hi):
                break
        if ok:
            u = g.cellpos[row]
            nxt[p] = head[u]
            head[u] = p
            acc_out[na] = p
            na += 1
    return na


def greedy_pack(const double[:, ::1] points, const int64_t[::1] order, double r, int metric):
    cdef Py_ssize_t n = points.shape[0], ns = order.shape[0], i
    if ns == 0:
        return np.empty(0, dtype=np.int64)
    cdef _GridHolder h = build_grid(points, order, 2.0 * r * CELL_INFLATE)
    cdef Grid *g = &h.g
    local_np = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] local = local_np
    for i in range(ns):
        local[order[i]] = i
    head_np = np.full(g.m, -1, dtype=np.int64)
    nxt_np = np.full(n, -1, dtype=np.int64)
    out_np = np.empty(ns, dtype=np.int64)
    cdef int64_t[::1] head = head_np
    cdef int64_t[::1] nxt = nxt_np
    cdef int64_t[::1] out = out_np
    cdef Py_ssize_t na
    with nogil:
        na = greedy_scan(points, g, &order[0], ns, &local[0], &head[0], &nxt[0],
                         &out[0], r, metric)
    return out_np[:na].copy()


cdef int cmp_ll(const void *a, const void *b) noexcept nogil:
    cdef int64_t x = (<int64_t *> a)[0], y = (<int64_t *> b)[0]
    return (x > y) - (x < y)


def local_counts(const double[:, ::1] points, const int64_t[::1] rank, const double[:, ::1] centers,
                 double R, double r, int metric):
    cdef Py_ssize_t n = points.shape[0], nc = centers.shape[0], i, j, u, ns, na, t
    cdef int d = points.shape[1], k
    ids_np = np.arange(n, dtype=np.int64)
    cdef _GridHolder hR = build_grid(points, ids_np, R)
    cdef _GridHolder h2 = build_grid(points, ids_np, 2.0 * r * CELL_INFLATE)
    cdef Grid *gR = &hR.g
    cdef Grid *g2 = &h2.g
    order_np = np.empty(n, dtype=np.int64)
    order_np[np.asarray(rank)] = ids_np
    cdef int64_t[::1] order = order_np
    head_np = np.full(g2.m, -1, dtype=np.int64)
    nxt_np = np.full(n, -1, dtype=np.int64)
    buf_np = np.empty(n, dtype=np.int64)
    acc_np = np.empty(n, dtype=np.int64)
    out_np = np.zeros(nc, dtype=np.int64)
    cdef int64_t[::1] head = head_np
    cdef int64_t[::1] nxt = nxt_np
    cdef int64_t[::1] buf = buf_np
    cdef int64_t[::1] acc = acc_np
    cdef int64_t[::1] out = out_np
    cdef int64_t[::1] ident = ids_np
    cdef int64_t lo[MAXD]
    cdef int64_t hi[MAXD]
    cdef int64_t cur[MAXD]
    cdef double x[MAXD]
    cdef int64_t key, p
    with nogil:
        for i in range(nc):
            for k in range(d):
                x[k] = centers[i, k]
            if not box_range(gR, x, R, lo, hi):
                continue
            for k in range(d):
                cur[k] = lo[k]
            ns = 0
            while True:
                key = 0
                for k in range(d):
                    key += cur[k] * gR.strides[k]
                u = find_key(gR, key)
                if u >= 0:
                    for j in range(gR.starts[u], gR.starts[u + 1]):
                        p = gR.perm[j]
                        if dist(points, p, x, d, metric) <= R:
                            buf[ns] = rank[p]
                            ns += 1
                if not box_next(d, cur, lo, hi):
                    break
            if ns == 0:
                continue
            qsort(&buf[0], ns, sizeof(int64_t), cmp_ll)
            for j in range(ns):
                buf[j] = order[buf[j]]
            na = greedy_scan(points, g2, &buf[0], ns, &ident[0], &head[0], &nxt[0],
                             &acc[0], r, metric)
            out[i] = na
            for t in range(na):
                head[g2.cellpos[acc[t]]] = -1
    return out_np


def lifted_counts_1d(const double[::1] xs, const int64_t[:, ::1] up, const double[::1] cx, double R):
    """Greedy counts inside [c - R, c + R] for sorted xs, via binary-lifted jumps.

    ``up[k, j]`` is the position reached from j after 2**k greedy jumps
    (sentinel ``len(xs)``). Membership uses the closed-ball test |x - c| <= R.
    """
    cdef Py_ssize_t n = xs.shape[0], nc = cx.shape[0], L = up.shape[0], i, a, b, m
    cdef int k
    cdef double c
    cdef int64_t cur, cand, last, cnt
    out_np = np.zeros(nc, dtype=np.int64)
    cdef int64_t[::1] out = out_np
    with nogil:
        for i in range(nc):
            c = cx[i]
            # first index with |x - c| <= R among x <= c side, else first x > c - R
            a, b = 0, n
            while a < b:
                m = (a + b) // 2
                if xs[m] < c and fabs(xs[m] - c) > R:
                    a = m + 1
                else:
                    b = m
            cur = a
            a, b = cur, n
            while a < b:
                m = (a + b) // 2
                if xs[m] <= c or fabs(xs[m] - c) <= R:
                    a = m + 1
                else:
                    b = m
            last = a - 1
            if cur > last:
                continue
            cnt = 1
            for k in range(L - 1, -1, -1):
                cand = up[k, cur]
                if cand <= last:
                    cur = cand
                    cnt += (<int64_t> 1) << k
            out[i] = cnt
    return out_np
