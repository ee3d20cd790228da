import math

import numpy as np
import pytest

from dimlab import (
    ContractError,
    DiscreteMeasure,
    InputError,
    PointCloud,
    ScaleGrid,
    assouad_dim_measure,
    assouad_spectrum_measure,
    density_dim,
    frostman_dim,
    lower_spectrum_measure,
    lq_spectrum,
    minkowski_dims_measure,
    sequence_fixture,
    spectrum_curve,
    witness_measure,
)
from dimlab import presets
from dimlab.generators import CANTOR_DIM


@pytest.fixture(scope="module")
def cantor(cantor_fx):
    return cantor_fx


@pytest.fixture(scope="module")
def seq(sequence_fx):
    return sequence_fx


@pytest.fixture(scope="module")
def atom():
    return DiscreteMeasure(PointCloud([[0.4]]), [3.0])


G = ScaleGrid(0.5, 2.0**-10)


def run(fn, fx, *args, density=False):
    cfg = fx.config
    return fn(fx.measure, *args, cfg.grid, cfg.density_window if density else cfg.window)


class TestMinkowski:
    def test_cantor(self, cantor):
        up, lo = run(minkowski_dims_measure, cantor)
        assert up.value == pytest.approx(CANTOR_DIM, abs=0.08)
        assert lo.value == pytest.approx(CANTOR_DIM, abs=0.08)

    def test_sequence_truncated(self):
        c, mu = sequence_fixture(10**4)
        up, _ = minkowski_dims_measure(mu, ScaleGrid(2.0**-6, 2.0**-12), 13)
        assert up.value >= 0.45

    def test_single_atom(self, atom):
        up, lo = minkowski_dims_measure(atom, G)
        assert up.value == lo.value == 0.0

    def test_partial_support_rejected(self):
        c = PointCloud([[0.0], [0.5], [1.0]])
        mu = witness_measure(c, [1, 2])
        with pytest.raises(ContractError):
            minkowski_dims_measure(mu, ScaleGrid(0.5, 0.05))


class TestFrostmanDensity:
    def test_frostman(self, cantor, seq, atom):
        assert run(frostman_dim, cantor).value == pytest.approx(CANTOR_DIM, abs=0.08)
        assert run(frostman_dim, seq).value == pytest.approx(0.0, abs=0.05)
        assert frostman_dim(atom, G).value == 0.0

    def test_density(self, cantor, seq, atom):
        assert run(density_dim, cantor, density=True).estimate.value == pytest.approx(CANTOR_DIM, abs=0.08)
        res = run(density_dim, seq, density=True)
        assert res.estimate.value == pytest.approx(0.0, abs=0.05)
        assert len(res.pointwise) == len(seq.cloud)
        assert density_dim(atom, G).estimate.value == 0.0


class TestLq:
    def test_cantor_q_minus_one(self, cantor):
        res = run(lq_spectrum, cantor, -1.0)
        assert res.tau == pytest.approx(-2 * CANTOR_DIM, abs=0.1)
        assert res.dim.value == pytest.approx(CANTOR_DIM, abs=0.05)

    def test_cantor_q_zero_counts_packings(self, cantor):
        assert run(lq_spectrum, cantor, 0.0).dim.value == pytest.approx(CANTOR_DIM, abs=0.08)

    @pytest.mark.parametrize("q", [-4.0, 0.0, 0.5, 2.0])
    def test_single_atom(self, atom, q):
        res = lq_spectrum(atom, q, G)
        assert res.tau == 0.0 and res.dim.value == 0.0

    def test_q_one_rejected(self, atom):
        with pytest.raises(InputError):
            lq_spectrum(atom, 1.0, G)

    def test_extremal_order_never_loses(self, cantor):
        res = run(lq_spectrum, cantor, -2.0)
        assert np.all(res.packing_gap >= 0)


class TestAssouad:
    def test_cantor(self, cantor):
        cfg = cantor.config
        assert assouad_dim_measure(cantor.measure, cfg.grid, cfg.ratio_floor, cfg.window).value == pytest.approx(
            CANTOR_DIM, abs=0.08
        )

    def test_witness_is_not_doubling(self):
        fx = presets.cantor(10)
        mu = witness_measure(fx.cloud, range(1, 14))
        g = ScaleGrid(0.5, mu.support_floor)
        assert assouad_dim_measure(mu, g, 1).value > CANTOR_DIM + 0.1

    def test_single_atom(self, atom):
        assert assouad_dim_measure(atom, G).value == 0.0


class TestSpectra:
    def test_cantor(self, cantor):
        assert run(assouad_spectrum_measure, cantor, 0.5).value == pytest.approx(CANTOR_DIM, abs=0.08)
        assert run(lower_spectrum_measure, cantor, 0.5).value == pytest.approx(CANTOR_DIM, abs=0.08)

    def test_two_atoms(self):
        mu = DiscreteMeasure(PointCloud([[0.0], [1.0]]), [1.0, 1.0])
        g = ScaleGrid(0.01, 1e-5)
        assert assouad_spectrum_measure(mu, 0.5, g).value == 0.0

    def test_sequence_lower_spectrum(self, seq):
        assert run(lower_spectrum_measure, seq, 0.5).value == pytest.approx(0.0, abs=0.05)

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_single_atom(self, atom, t):
        assert assouad_spectrum_measure(atom, t, G).value == 0.0
        assert lower_spectrum_measure(atom, t, G).value == 0.0


def test_spectrum_curve(cantor):
    cfg = cantor.config
    curve = spectrum_curve(lambda t: assouad_spectrum_measure(cantor.measure, t, cfg.grid, cfg.window), [0.2, 0.4], "cantor")
    assert curve.quantity == "assouad_spectrum" and len(curve.values) == 2
    d = curve.to_dict()
    assert d["theta_or_q"] == [0.2, 0.4]
    assert curve.to_csv().splitlines()[0] == "parameter,r,value,log_r,log_value"
    with pytest.raises(InputError):
        spectrum_curve(lambda t: assouad_spectrum_measure(cantor.measure, t, cfg.grid), [0.4, 0.2])
