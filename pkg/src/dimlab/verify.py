"""Finite-scale verification of the dimension inequalities.

:func:`verify_suite` estimates every quantity for a cloud and a measure (the
witness measure when none is given) and checks the known relations between
them with additive slacks. Each :class:`Check` names the result it tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError
from .measure import DiscreteMeasure, doubling_sweep, witness_k_max, witness_measure
from .measure_dims import (
    assouad_dim_measure,
    assouad_spectrum_measure,
    density_dim,
    frostman_dim,
    lower_spectrum_measure,
    lq_spectrum,
    minkowski_dims_measure,
)
from .metric import PointCloud
from .presets import AnalysisConfig, default_config
from .scaling import MeshWarning, fmt
from .set_dims import assouad_dim_set, assouad_spectrum_set, minkowski_dims_set


CHAIN = "L^q <= udimm <= spectrum <= min(Assouad, udimm/(1-theta))"


@dataclass(frozen=True)
class Check:
    """One inequality ``lhs <= rhs + slack`` (relation 'le') or ``|lhs - rhs| <= slack`` ('abs')."""

    name: str
    anchor: str
    relation: str
    lhs: float
    rhs: float
    slack: float

    @property
    def margin(self) -> float:
        if self.relation == "abs":
            return self.slack - abs(self.lhs - self.rhs)
        return self.rhs + self.slack - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -1e-12)

    def to_dict(self):
        return {
            "name": self.name,
            "anchor": self.anchor,
            "relation": self.relation,
            "lhs": float(fmt(self.lhs)),
            "rhs": float(fmt(self.rhs)),
            "slack": self.slack,
            "margin": float(fmt(self.margin)),
            "passed": self.passed,
        }


@dataclass
class VerifyReport:
    fixture: str
    checks: list = field(default_factory=list)
    gap_metrics: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)
    config: AnalysisConfig | None = None
    notes: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        def num(v):
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            if isinstance(v, (list, tuple)):
                return [num(x) for x in v]
            return float(fmt(v))

        return {
            "fixture": self.fixture,
            "passed": self.passed,
            "failures": len(self.failures),
            "checks": [c.to_dict() for c in self.checks],
            "gap_metrics": {k: num(v) for k, v in sorted(self.gap_metrics.items())},
            "estimates": {k: num(v) for k, v in sorted(self.estimates.items())},
            "config": self.config.to_dict() if self.config else None,
            "notes": list(self.notes),
        }


def _witness(cloud, k_list, grid):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mu = witness_measure(cloud, k_list)
    if mu.support_floor > grid.r_min:
        raise ConfigurationError(
            f"witness levels stop at k={k_list[-1]}; its support floor {mu.support_floor:.3g} "
            f"exceeds r_min={grid.r_min:.3g} (mesh guard)"
        )
    return mu, [str(w.message) for w in caught]


def sparse_k_list(k_max: int, step: int) -> list:
    """Every `step`-th level from 1, always ending at k_max."""
    ks = list(range(1, k_max + 1, max(1, step)))
    if ks[-1] != k_max:
        ks.append(k_max)
    return ks


@dataclass(frozen=True)
class Roundtrip:
    """Witness-measure Minkowski estimates next to the set's."""

    k_max: int
    set_upper: float
    set_lower: float
    witness_upper: float
    witness_lower_sparse: float
    witness: DiscreteMeasure
    notes: tuple = ()

    def checks(self, slack: float):
        return [
            Check("witness_upper_roundtrip", "witness measure attains udimm", "abs", self.witness_upper, self.set_upper, slack),
            Check("witness_lower_roundtrip", "sparse witness attains ldimm", "abs", self.witness_lower_sparse, self.set_lower, slack),
        ]


def witness_roundtrip(cloud: PointCloud, config: AnalysisConfig | None = None) -> Roundtrip:
    """Build the consecutive and sparse witness measures and estimate both sides.

    Levels run 1..k_max (``config.witness_kmax`` or the mesh limit); the
    sparse list keeps every ``sparse_step``-th level and its lower estimate
    is read along the radii 2**-k of that list.
    """
    cfg = config or default_config(cloud)
    g, W = cfg.grid, cfg.window
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MeshWarning)
        su, sl = minkowski_dims_set(cloud, g, W)
    k_max = cfg.witness_kmax or witness_k_max(cloud)
    wit, notes = _witness(cloud, list(range(1, k_max + 1)), g)
    sparse = sparse_k_list(k_max, cfg.sparse_step)
    wit_sparse, _ = _witness(cloud, sparse, g)
    radii = [2.0**-k for k in sparse if g.r_min <= 2.0**-k <= g.r_max]
    wu, _ = minkowski_dims_measure(wit, g, W)
    _, wl = minkowski_dims_measure(wit_sparse, g, W, subsequence=radii if len(radii) >= 2 else None)
    return Roundtrip(k_max, su.value, sl.value, wu.value, wl.value, wit, tuple(notes))


def verify_suite(
    cloud: PointCloud,
    measure: DiscreteMeasure | None = None,
    config: AnalysisConfig | None = None,
    fixture: str | None = None,
    inhomogeneous: bool = False,
) -> VerifyReport:
    """Run checks (a)-(f) and, for inhomogeneous fixtures, the gap probes (g).

    (a) witness measure vs set, upper and lower Minkowski dimension;
    (b) L^q <= udimm(mu) <= Assouad spectrum <= min(Assouad, udimm/(1-theta)),
        and the smallest-theta spectrum value close to udimm(mu);
    (c) L^q non-increasing in q and dim_{L^q} near udimm(mu) for very negative q;
    (d) set spectrum <= measure spectrum per theta;
    (e) measure lower spectrum <= Frostman dimension per theta;
    (f) Frostman dimension <= lower Minkowski dimension of the set.
    """
    cfg = config or default_config(cloud)
    g = cfg.grid
    W = cfg.window
    rep = VerifyReport(fixture or cloud.meta.name, config=cfg)
    est = rep.estimates
    add = rep.checks.append

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MeshWarning)
        # set side and witness measures
        rt = witness_roundtrip(cloud, cfg)
        rep.notes.extend(rt.notes)
        set_spec = {t: assouad_spectrum_set(cloud, t, g, W).value for t in cfg.thetas}
        wit = rt.witness
        est["set_minkowski_upper"], est["set_minkowski_lower"] = rt.set_upper, rt.set_lower
        est["witness_k_max"] = float(rt.k_max)
        est["witness_minkowski_upper"], est["witness_minkowski_lower_sparse"] = rt.witness_upper, rt.witness_lower_sparse

        # measure side
        if measure is None:
            mu = wit
            rep.notes.append("no measure supplied: the witness measure is analysed")
        else:
            mu = measure
            if not mu.full_support:
                raise ContractError("verify_suite expects a fully supported measure")
        mu_up, mu_lo = minkowski_dims_measure(mu, g, W)
        frost = frostman_dim(mu, g, W).value
        dens = density_dim(mu, g, cfg.density_window).estimate.value
        lq = {q: lq_spectrum(mu, q, g, W).dim.value for q in sorted(set(cfg.qs) | {cfg.q_limit})}
        a_mu = assouad_dim_measure(mu, g, cfg.ratio_floor, W).value
        spec = {t: assouad_spectrum_measure(mu, t, g, W).value for t in cfg.thetas}
        low = {t: lower_spectrum_measure(mu, t, g, W).value for t in cfg.thetas}
        a_set = assouad_dim_set(cloud, g, cfg.ratio_floor, W).value
    rep.notes.extend(sorted({str(w.message) for w in caught if issubclass(w.category, MeshWarning)}))

    est.update(
        measure_minkowski_upper=mu_up.value,
        measure_minkowski_lower=mu_lo.value,
        frostman=frost,
        density=dens,
        assouad_measure=a_mu,
        assouad_set=a_set,
    )
    for q, v in lq.items():
        est[f"lq[{q:g}]"] = v
    for t in cfg.thetas:
        est[f"assouad_spectrum_measure[{t:g}]"] = spec[t]
        est[f"lower_spectrum_measure[{t:g}]"] = low[t]
        est[f"assouad_spectrum_set[{t:g}]"] = set_spec[t]

    s, ud = cfg.slack, mu_up.value
    # (a)
    rep.checks.extend(rt.checks(s))
    # (b)
    for q in cfg.qs:
        if q < 1:
            add(Check(f"lq_le_udimm[q={q:g}]", CHAIN, "le", lq[q], ud, s))
    for t in cfg.thetas:
        add(Check(f"udimm_le_spectrum[theta={t:g}]", CHAIN, "le", ud, spec[t], s))
        add(Check(f"spectrum_le_assouad[theta={t:g}]", CHAIN, "le", spec[t], a_mu, s))
        add(Check(f"spectrum_le_udimm_cap[theta={t:g}]", CHAIN, "le", spec[t], ud / (1 - t), s))
    t0 = min(cfg.thetas)
    add(Check(f"spectrum_limit[theta={t0:g}]", "spectrum tends to udimm as theta -> 0", "abs", spec[t0], ud, cfg.limit_slack))
    # (c)
    qs = sorted(lq)
    for qa, qb in zip(qs, qs[1:]):
        add(Check(f"lq_monotone[q={qa:g}..{qb:g}]", "dim L^q non-increasing in q", "le", lq[qb], lq[qa], cfg.monotone_slack))
    add(Check(f"lq_limit[q={cfg.q_limit:g}]", "dim L^q tends to udimm as q -> -inf", "abs", lq[cfg.q_limit], ud, s))
    # (d), (e)
    for t in cfg.thetas:
        add(Check(f"set_spectrum_le_measure[theta={t:g}]", "set spectrum <= measure spectrum", "le", set_spec[t], spec[t], s))
    for t in cfg.thetas:
        add(Check(f"lower_spectrum_le_frostman[theta={t:g}]", "lower spectrum <= Frostman", "le", low[t], frost, cfg.frostman_slack))
    # (f)
    add(Check("frostman_le_set_lower", "Frostman <= dimh <= ldimm(set)", "le", frost, rt.set_lower, s))

    gm = rep.gap_metrics
    gm["dimm_upper_minus_density"] = ud - dens
    gm["assouad_measure_minus_set"] = a_mu - a_set
    gm["measure_minus_set_minkowski_upper"] = ud - rt.set_upper
    # (g)
    if inhomogeneous:
        gm["assouad_spectrum_gap_min_over_theta"] = min(spec[t] - set_spec[t] for t in cfg.thetas)
        sweep = doubling_sweep(mu, g)
        per = g.per_octave
        octave_max = [float(np.max(sweep.table.value[: j + 1])) for j in range(0, len(g), per)]
        gm["doubling_max_by_octave"] = octave_max
        gm["doubling_trend_nondecreasing"] = bool(np.all(np.diff(octave_max) >= 0))
        gm["doubling_trend_growth"] = octave_max[-1] / octave_max[0]
    return rep

