"""Shipped fixtures and the analysis settings each one is checked with.

An :class:`AnalysisConfig` bundles the scale grid, slope windows, ratio
floor, parameter grids and slacks. Every fixture has a documented preset;
``default_config`` derives a conservative one for arbitrary clouds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InputError
from .generators import (
    BMCarpetSpec,
    IFSSpec,
    bedford_mcmullen_cloud,
    cantor_cloud,
    corner_fixture,
    inhomogeneous_cloud,
    sequence_fixture,
    similitude,
    uniform_grid_cloud,
    uniform_measure,
)
from .measure import DiscreteMeasure, witness_k_max
from .measure_dims import Q_GRID
from .metric import PointCloud
from .scaling import DEFAULT_WINDOW_OCTAVES, ScaleGrid
from .set_dims import THETA_GRID

NONUNIFORM_DIGITS = ((0, 0), (1, 0), (1, 1))
UNIFORM_DIGITS = ((0, 0), (1, 1))


@dataclass(frozen=True)
class AnalysisConfig:
    """Scales, windows and slacks for one analysis run.

    Windows are given in octaves and converted to rows with the grid's
    ``per_octave``. ``density_window_octaves`` may differ from the general
    window because the pointwise exponent is a liminf taken point by point.
    """

    r_max: float
    r_min: float
    per_octave: int = 4
    window_octaves: float = DEFAULT_WINDOW_OCTAVES
    density_window_octaves: float | None = None
    ratio_floor: int = 1
    thetas: tuple = THETA_GRID
    qs: tuple = Q_GRID
    q_limit: float = -32.0
    slack: float = 0.1
    limit_slack: float = 0.15
    frostman_slack: float = 0.05
    monotone_slack: float = 0.02
    witness_kmax: int | None = None
    sparse_step: int = 2

    @property
    def grid(self) -> ScaleGrid:
        return ScaleGrid(self.r_max, self.r_min, self.per_octave)

    def rows(self, octaves: float | None) -> int:
        o = self.window_octaves if octaves is None else octaves
        return min(len(self.grid), int(round(o * self.per_octave)) + 1)

    @property
    def window(self) -> int:
        return self.rows(self.window_octaves)

    @property
    def density_window(self) -> int:
        return self.rows(self.density_window_octaves)

    def to_dict(self):
        d = asdict(self)
        d["thetas"] = list(self.thetas)
        d["qs"] = list(self.qs)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for k in ("thetas", "qs"):
            if k in d:
                d[k] = tuple(float(v) for v in d[k])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown analysis settings: {sorted(unknown)}")
        return cls(**d)

    def with_(self, **kw) -> "AnalysisConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _pow2_at_least(x: float) -> float:
    return 2.0 ** math.ceil(math.log2(x) - 1e-12)


def default_config(cloud: PointCloud, **kw) -> AnalysisConfig:
    """Grid from 1/2 down to the first power of 2 at or above 4 * mesh.

    Exact samples (mesh 0) go down to the scale at which the greedy packing
    first holds every point; at least three octaves are always kept.
    """
    mesh = cloud.meta.mesh
    if mesh > 0:
        r_min = _pow2_at_least(4 * mesh)
    elif len(cloud) > 1:
        r_min = 2.0 ** -witness_k_max(cloud)
    else:
        r_min = 2.0**-8
    r_min = min(r_min, 2.0**-4)
    cfg = AnalysisConfig(r_max=0.5, r_min=r_min)
    octaves = cfg.grid.octaves
    cfg = replace(cfg, window_octaves=min(DEFAULT_WINDOW_OCTAVES, max(2.0, octaves / 2)))
    return cfg.with_(**kw)


@dataclass(frozen=True)
class Fixture:
    """A cloud, an optional measure, the analysis preset and any closed-form targets."""

    name: str
    cloud: PointCloud
    measure: DiscreteMeasure | None
    config: AnalysisConfig
    params: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    inhomogeneous: bool = False


CANTOR_DIM = math.log(2) / math.log(3)


def cantor(depth: int = 16) -> Fixture:
    """Middle-third Cantor set with its uniform (natural) measure.

    Preset: grid 2^-1 .. first power of 2 above 4 * mesh, 10-octave windows
    (6 below depth 12), ratio floor 8 octaves short of the grid span.
    """
    cloud = cantor_cloud(depth)
    cfg = default_config(cloud)
    octaves = int(round(cfg.grid.octaves))
    cfg = replace(cfg, window_octaves=10 if depth >= 12 else min(6, octaves), ratio_floor=max(1, octaves - 8))
    t = {k: CANTOR_DIM for k in ("minkowski", "frostman", "density", "assouad", "lq", "spectrum")}
    return Fixture("cantor", cloud, uniform_measure(cloud), cfg, {"depth": depth}, t)


def sequence(n: int = 100_000) -> Fixture:
    """{0} u {1/k} with masses k^-2; scales 2^-6 .. 2^-16.

    Slopes use 8-octave windows, the pointwise density one octave: the mass
    profile at 1/k is flat until B(1/k, r) reaches 0. The
    witness runs one level past the grid so that it charges every ball.
    """
    cloud, mu = sequence_fixture(n)
    cfg = AnalysisConfig(
        r_max=2.0**-6, r_min=2.0**-16, window_octaves=8, density_window_octaves=1, ratio_floor=1, witness_kmax=17
    )
    t = {"minkowski_upper_set": 0.5, "density": 0.0, "frostman": 0.0, "assouad_set": 1.0}
    return Fixture("sequence", cloud, mu, cfg, {"n": n}, t)


def bm(depth: int = 7, digits=NONUNIFORM_DIGITS, p: int = 2, q: int = 3) -> Fixture:
    """Bedford-McMullen carpet with its uniform sample measure."""
    spec = BMCarpetSpec(p, q, tuple(tuple(d) for d in digits))
    cloud = bedford_mcmullen_cloud(spec, depth)
    cfg = default_config(cloud)
    cfg = replace(cfg, window_octaves=min(6, int(cfg.grid.octaves)), ratio_floor=1)
    params = {"depth": depth, "p": p, "q": q, "digits": [list(d) for d in spec.digits]}
    return Fixture("bm", cloud, uniform_measure(cloud), cfg, params, dict(spec.closed_forms()))


def inhomog(depth: int = 8) -> Fixture:
    """Maps x/4 and x/4 + 3/4 with condensation set {1/2}; no measure (the witness is used)."""
    spec = IFSSpec.of([similitude(0.25, [0.0]), similitude(0.25, [0.75])])
    cond = PointCloud.from_points(np.array([[0.5]]))
    cloud = inhomogeneous_cloud(spec, cond, depth)
    cfg = default_config(cloud)
    cfg = replace(cfg, window_octaves=min(6, int(cfg.grid.octaves) // 2 * 2), ratio_floor=1)
    return Fixture("inhomog", cloud, None, cfg, {"depth": depth}, {"minkowski": 0.5}, inhomogeneous=True)


def corner(s: float = 1.0, k_max: int = 4, depth: int = 4) -> Fixture:
    """Truncated corner construction with its uniform sample measure."""
    cloud = corner_fixture(s, k_max, depth)
    cfg = default_config(cloud)
    return Fixture("corner", cloud, uniform_measure(cloud), cfg, {"s": s, "k_max": k_max, "depth": depth})


def grid(n: int = 1001) -> Fixture:
    """Equally spaced points on [0, 1] with the uniform measure; scales 2^-3 .. 2^-8."""
    cloud = uniform_grid_cloud(n)
    cfg = AnalysisConfig(r_max=2.0**-3, r_min=2.0**-8, window_octaves=3)
    return Fixture("grid", cloud, uniform_measure(cloud), cfg, {"n": n}, {"minkowski": 1.0})


FIXTURES = {"cantor": cantor, "sequence": sequence, "bm": bm, "inhomog": inhomog, "corner": corner, "grid": grid}


def build(name: str, **params) -> Fixture:
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise InputError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return factory(**params)
