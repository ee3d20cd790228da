"""Fixture factory: self-similar and inhomogeneous attractors, carpets, test sets.

Words are enumerated lexicographically with the first letter applied
outermost, so ``phi_w = phi_{w1} o ... o phi_{wn}`` and output order is
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, InputError
from .measure import DiscreteMeasure
from .metric import FixtureMeta, PointCloud, normalize

WORD_CAP = 2_000_000
CANTOR_DIM = math.log(2) / math.log(3)


@dataclass(frozen=True)
class Similitude:
    """x -> ratio * orthogonal @ x + translation."""

    ratio: float
    orthogonal: np.ndarray
    translation: np.ndarray

    def __call__(self, pts):
        return self.ratio * (pts @ self.orthogonal.T) + self.translation

    def fixed_point(self):
        d = len(self.translation)
        return np.linalg.solve(np.eye(d) - self.ratio * self.orthogonal, self.translation)


def similitude(ratio, translation, orthogonal=None):
    t = np.atleast_1d(np.asarray(translation, dtype=np.float64))
    o = np.eye(len(t)) if orthogonal is None else np.asarray(orthogonal, dtype=np.float64).reshape(len(t), len(t))
    return Similitude(float(ratio), o, t)


@dataclass(frozen=True)
class IFSSpec:
    maps: tuple
    dim: int

    def __post_init__(self):
        if len(self.maps) < 2:
            raise InputError("an IFS needs at least two maps")
        for m in self.maps:
            if not (0 < m.ratio < 1):
                raise InputError("similarity ratios must lie in (0, 1)")
            if m.orthogonal.shape != (self.dim, self.dim) or len(m.translation) != self.dim:
                raise InputError("map dimensions disagree with the IFS dimension")
            if not np.allclose(m.orthogonal @ m.orthogonal.T, np.eye(self.dim), atol=1e-9):
                raise InputError("linear part is not orthogonal")

    @classmethod
    def of(cls, maps):
        maps = tuple(maps)
        return cls(maps, len(maps[0].translation))

    @property
    def ratios(self):
        return [m.ratio for m in self.maps]

    def hull_radius(self, center):
        """Radius of a ball about `center` mapped into itself by every map."""
        return max(float(np.linalg.norm(m(center[None, :])[0] - center)) / (1 - m.ratio) for m in self.maps)

    def to_dict(self):
        return {
            "maps": [
                {"ratio": m.ratio, "orthogonal": m.orthogonal.reshape(-1).tolist(), "translation": m.translation.tolist()}
                for m in self.maps
            ],
            "dim": self.dim,
        }


def cantor_spec():
    return IFSSpec.of([similitude(1 / 3, [0.0]), similitude(1 / 3, [2 / 3])])


def corner_maps():
    """The four maps x -> (x + t_i)/3 with t in {(0,0),(0,2),(2,2),(2,0)}."""
    ts = [(0, 0), (0, 2), (2, 2), (2, 0)]
    return IFSSpec.of([similitude(1 / 3, np.asarray(t, dtype=np.float64) / 3) for t in ts])


def similitude_dimension(ratios, tol=1e-12) -> float:
    """Unique s >= 0 with sum(r_i ** s) = 1, by bisection."""
    r = np.asarray(ratios, dtype=np.float64)
    if len(r) < 2 or np.any((r <= 0) | (r >= 1)):
        raise InputError("need at least two ratios in (0, 1)")

    def f(s):
        return float(np.sum(r**s)) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_words(n_maps, depth):
    if depth < 0:
        raise InputError("depth must be non-negative")
    if n_maps**depth > WORD_CAP:
        raise CapacityError(f"{n_maps}^{depth} words exceed the cap of {WORD_CAP}")


def word_images(spec: IFSSpec, depth: int, pts) -> np.ndarray:
    """phi_w(p) for every word w of length `depth` and p in pts, lexicographic in w."""
    _check_words(len(spec.maps), depth)
    out = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    for _ in range(depth):
        out = np.concatenate([m(out) for m in spec.maps])
    return out


def _finish(raw, name, mesh_raw, metric="euclidean", extra=None):
    scale = normalize(raw, metric)
    meta = FixtureMeta(name=name, scale_factor=scale, mesh=mesh_raw * scale, extra=extra or {})
    return PointCloud.from_points(raw * scale, metric, meta)


def self_similar_cloud(spec: IFSSpec, depth: int, seed_point=None, name="self_similar") -> PointCloud:
    """Images of a seed point under all words of length `depth`."""
    seed = spec.maps[0].fixed_point() if seed_point is None else np.asarray(seed_point, dtype=np.float64).reshape(-1)
    raw = word_images(spec, depth, seed)
    rad = spec.hull_radius(seed)
    mesh = max(spec.ratios) ** depth * 2 * rad
    extra = {"similitude_dimension": similitude_dimension(spec.ratios), "depth": depth}
    return _finish(raw, name, mesh, extra=extra)


def inhomogeneous_cloud(spec: IFSSpec, condensation: PointCloud, depth: int, name="inhomog") -> PointCloud:
    """Attractor sample united with phi_w(C) for all words of length 0..depth."""
    if condensation.dim != spec.dim:
        raise InputError("condensation set lives in a different dimension")
    _check_words(len(spec.maps), depth)
    seed = spec.maps[0].fixed_point()
    c_raw = condensation.points / condensation.meta.scale_factor
    parts = [word_images(spec, depth, seed)]
    level = c_raw
    parts.append(level)
    for _ in range(depth):
        level = np.concatenate([m(level) for m in spec.maps])
        parts.append(level)
    raw = np.concatenate(parts)
    rad = max(spec.hull_radius(seed), float(np.max(np.linalg.norm(c_raw - seed, axis=1))))
    mesh = max(max(spec.ratios) ** depth * 2 * rad, condensation.meta.mesh / condensation.meta.scale_factor)
    extra = {
        "similitude_dimension": similitude_dimension(spec.ratios),
        "depth": depth,
        "condensation_points": len(condensation),
    }
    return _finish(raw, name, mesh, extra=extra)


@dataclass(frozen=True)
class BMCarpetSpec:
    """Bedford-McMullen carpet on a p x q grid (q > p > 1) with digit set A."""

    p: int
    q: int
    digits: tuple
    column_counts: tuple = field(init=False)
    uniform_fibers: bool = field(init=False)

    def __post_init__(self):
        if not (self.q > self.p > 1):
            raise InputError("need integers q > p > 1")
        digits = tuple(sorted({(int(j), int(k)) for j, k in self.digits}))
        if not (2 <= len(digits) <= self.p * self.q):
            raise InputError("need between 2 and p*q digits")
        for j, k in digits:
            if not (0 <= j < self.p and 0 <= k < self.q):
                raise InputError(f"digit {(j, k)} outside the {self.p}x{self.q} grid")
        counts = tuple(sum(1 for j, _ in digits if j == col) for col in range(self.p))
        nz = {c for c in counts if c}
        object.__setattr__(self, "digits", digits)
        object.__setattr__(self, "column_counts", counts)
        object.__setattr__(self, "uniform_fibers", len(nz) == 1)

    def closed_forms(self):
        """Known dimension values for the carpet."""
        p, q = self.p, self.q
        cols = sum(1 for c in self.column_counts if c)
        n = len(self.digits)
        a = math.log(p) / math.log(q)
        return {
            "hausdorff": math.log(sum(c**a for c in self.column_counts if c)) / math.log(p),
            "minkowski": math.log(cols) / math.log(p) + math.log(n / cols) / math.log(q),
            "assouad": math.log(cols) / math.log(p) + math.log(max(self.column_counts)) / math.log(q),
            "lower": math.log(cols) / math.log(p) + math.log(min(c for c in self.column_counts if c)) / math.log(q),
        }

    def to_dict(self):
        return {
            "p": self.p,
            "q": self.q,
            "digits": [list(d) for d in self.digits],
            "column_counts": list(self.column_counts),
            "uniform_fibers": self.uniform_fibers,
        }


def bedford_mcmullen_cloud(spec: BMCarpetSpec, depth: int, name="bm") -> PointCloud:
    """Points (sum j_m p^-m, sum k_m q^-m) over digit strings of length `depth`."""
    if depth < 1:
        raise InputError("depth must be positive")
    _check_words(len(spec.digits), depth)
    dig = np.asarray(spec.digits, dtype=np.float64)
    lin = np.array([1.0 / spec.p, 1.0 / spec.q])
    pts = np.zeros((1, 2))
    for _ in range(depth):
        # first digit outermost: new = lin * old + digit * lin
        pts = np.concatenate([pts * lin + d * lin for d in dig])
    mesh = math.hypot(spec.p**-depth, spec.q**-depth)
    extra = {"carpet": spec.to_dict(), "depth": depth, "closed_forms": spec.closed_forms()}
    return _finish(pts, name, mesh, extra=extra)


def sequence_fixture(n: int):
    """The set {0} u {1/k : k <= n} with masses 1 at 0 and k^-2 at 1/k.

    Points are stored in ascending order (0, 1/n, ..., 1/2, 1).
    """
    if n < 2:
        raise InputError("need n >= 2")
    k = np.arange(n, 0, -1, dtype=np.float64)
    pts = np.concatenate(([0.0], 1.0 / k))
    w = np.concatenate(([1.0], k**-2))
    meta = FixtureMeta(name="sequence", mesh=1.0 / (n + 1), extra={"n": n, "minkowski_upper": 0.5})
    cloud = PointCloud.from_points(pts, "euclidean", meta)
    if len(cloud) != n + 1:
        raise InputError("sequence points collided under deduplication; n is too large")
    return cloud, DiscreteMeasure.from_weights(cloud, w)


def corner_component_ratio(s: float, n: int) -> float:
    """Per-map ratio of the four-corner dust with similitude dimension s(1 - 1/(2n))."""
    sn = s * (1 - 1 / (2 * n))
    return 4.0 ** (-1.0 / sn)


def corner_dust(ratio: float, depth: int) -> np.ndarray:
    corners = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.float64)
    spec = IFSSpec.of([similitude(ratio, (1 - ratio) * c) for c in corners])
    return word_images(spec, depth, np.zeros(2))


def corner_fixture(s: float, k_max: int, depth: int) -> PointCloud:
    """Truncation of {0} u U_{k < k_max} U_{i in 2,3,4} phi_{1^k i}(X_{k+1}).

    X_n is a four-corner dust of similitude dimension s_n = s(1 - 1/(2n)),
    sampled with words of length `depth`.
    """
    if not (0 < s <= 2):
        raise InputError("s must lie in (0, 2]")
    if k_max < 1 or depth < 1:
        raise InputError("k_max and depth must be positive")
    _check_words(4, depth)
    outer = corner_maps().maps
    parts = [np.zeros((1, 2))]
    mesh = math.sqrt(2) * 3.0**-k_max
    for k in range(k_max):
        rho = corner_component_ratio(s, k + 1)
        dust = corner_dust(rho, depth)
        mesh = max(mesh, 3.0 ** -(k + 1) * math.sqrt(2) * rho**depth)
        for i in (1, 2, 3):
            piece = outer[i](dust)
            parts.append(piece / 3.0**k)
    raw = np.concatenate(parts)
    extra = {"s": s, "k_max": k_max, "depth": depth, "s_n": [s * (1 - 1 / (2 * n)) for n in range(1, k_max + 1)]}
    return _finish(raw, "corner", mesh, extra=extra)


def cantor_cloud(depth: int) -> PointCloud:
    return self_similar_cloud(cantor_spec(), depth, name="cantor")


def uniform_grid_cloud(n: int) -> PointCloud:
    """n equally spaced points on [0, 1]."""
    if n < 2:
        raise InputError("need at least two points")
    pts = np.linspace(0.0, 1.0, n)
    return PointCloud.from_points(pts, "euclidean", FixtureMeta(name="grid", mesh=0.5 / (n - 1), extra={"minkowski": 1.0}))


def uniform_measure(cloud: PointCloud) -> DiscreteMeasure:
    return DiscreteMeasure.from_weights(cloud, np.full(len(cloud), 1.0 / len(cloud)))
