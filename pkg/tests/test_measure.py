import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimlab import (
    ContractError,
    DiscreteMeasure,
    InputError,
    PointCloud,
    ScaleGrid,
    ball_mass,
    ball_mass_extrema,
    ball_masses,
    cantor_cloud,
    doubling_sweep,
    minkowski_dims_measure,
    mix_measures,
    sequence_fixture,
    uniform_measure,
    witness_measure,
)
from dimlab.generators import CANTOR_DIM
from dimlab.measure import doubling_ratios, format_measure, parse_measure
from dimlab.presets import default_config


def three_atoms(weights=(0.2, 0.3, 0.5)):
    # host diameter 2 is rescaled only by cloud_from_array; keep raw coordinates here
    host = PointCloud([[0.0], [1.0], [2.0]])
    return DiscreteMeasure(host, weights)


class TestDiscreteMeasure:
    def test_validation(self):
        host = PointCloud([[0.0], [1.0]])
        with pytest.raises(InputError):
            DiscreteMeasure(host, [1.0])
        with pytest.raises(InputError):
            DiscreteMeasure(host, [1.0, -1.0])
        with pytest.raises(InputError):
            DiscreteMeasure(host, [0.0, 0.0])
        with pytest.raises(InputError):
            DiscreteMeasure.from_atoms(host, [0, 0], [1.0, 1.0])

    def test_immutable_and_support(self):
        host = PointCloud([[0.0], [1.0]])
        mu = DiscreteMeasure.from_atoms(host, [1], [2.0], support_floor=0.5)
        assert not mu.full_support and mu.atoms == [(1, 2.0)]
        assert mu.support_floor == 0.5
        with pytest.raises(AttributeError):
            mu.weights = None
        with pytest.raises(ContractError):
            mu.check_support(0.1)
        assert DiscreteMeasure(host, [1.0, 1.0], support_floor=0.5).support_floor == 0.0


class TestBallMass:
    def test_sequence_examples(self):
        c, mu = sequence_fixture(100)
        assert ball_mass(mu, [0.0], 0.35) == pytest.approx(1 + sum(n**-2 for n in range(3, 101)), abs=1e-12)
        assert ball_mass(mu, [0.0], 0.35) == pytest.approx(1.384984, abs=1e-6)
        assert ball_mass(mu, [1.0], 0.4) == 1.0

    def test_large_radius_gives_total(self):
        c, mu = sequence_fixture(50)
        assert ball_mass(mu, [0.3], 2.0) == pytest.approx(mu.total_mass)

    def test_closed_ball(self):
        mu = three_atoms()
        assert ball_mass(mu, [0.0], 1.0) == pytest.approx(0.5)

    def test_bad_inputs(self):
        mu = three_atoms()
        with pytest.raises(InputError):
            ball_mass(mu, [0.0, 0.0], 1.0)
        with pytest.raises(InputError):
            ball_mass(mu, [0.0], 0.0)

    def test_cached_masses_are_read_only(self):
        mu = three_atoms()
        a = ball_masses(mu, 1.0)
        assert ball_masses(mu, 1.0) is a
        with pytest.raises(ValueError):
            a[0] = 0
        assert np.allclose(ball_masses(mu, 1.0, centers=[[0.0], [2.0]]), [0.5, 0.8])

    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=30),
        st.floats(0.001, 1.5),
        st.floats(0, 1),
    )
    def test_matches_brute_force(self, xs, r, x):
        host = PointCloud.from_points(np.array(xs))
        w = np.linspace(1, 2, len(host))
        mu = DiscreteMeasure(host, w)
        brute = w[np.abs(host.points[:, 0] - x) <= r].sum()
        assert ball_mass(mu, [x], r) == pytest.approx(brute, abs=1e-12)


class TestExtrema:
    def test_three_atoms(self):
        mu = three_atoms()
        e = ball_mass_extrema(mu, 0.5)
        assert (e.min_mass, e.argmin, e.max_mass, e.argmax) == (0.2, 0, 0.5, 2)
        e = ball_mass_extrema(mu, 1.0)
        assert e.min_mass == pytest.approx(0.5) and e.argmin == 0
        assert e.max_mass == pytest.approx(1.0) and e.argmax == 1

    def test_uniform_below_gap(self):
        c = cantor_cloud(5)
        mu = uniform_measure(c)
        lo, _, hi, _ = ball_mass_extrema(mu, 0.001)
        assert lo == hi == pytest.approx(1 / 32)


class TestDoubling:
    def test_three_uniform_atoms(self):
        mu = three_atoms((1.0, 1.0, 1.0))
        assert doubling_ratios(mu, 0.5).tolist() == [2.0, 3.0, 2.0]

    def test_single_atom(self):
        mu = DiscreteMeasure(PointCloud([[0.3]]), [2.0])
        sw = doubling_sweep(mu, ScaleGrid(0.5, 0.01))
        assert np.all(sw.table.value == 1.0) and sw.max_ratio == 1.0

    def test_witness_on_cantor_is_not_doubling(self):
        c = cantor_cloud(8)
        mu = witness_measure(c, range(1, 9))
        sw = doubling_sweep(mu, ScaleGrid(0.5, mu.support_floor))
        per = sw.table.value
        octave_max = [per[: j + 1].max() for j in range(0, len(per), 4)]
        assert np.all(np.diff(octave_max) >= 0)
        assert octave_max[-1] > 10 * octave_max[0]


class TestMix:
    def test_two_diracs(self):
        a = DiscreteMeasure(PointCloud([[0.0]]), [1.0])
        b = DiscreteMeasure(PointCloud([[0.5]]), [1.0])
        mu = mix_measures([a, b])
        got = dict(zip(mu.host.points[:, 0].tolist(), mu.weights.tolist()))
        assert got == {0.0: 0.5, 0.5: 0.25}
        assert mu.total_mass == 0.75

    def test_single_component_halves(self):
        mu = three_atoms()
        assert np.allclose(mix_measures([mu]).weights, np.array([0.2, 0.3, 0.5]) / 2)

    def test_same_point_merges(self):
        a = DiscreteMeasure(PointCloud([[0.25]]), [1.0])
        mu = mix_measures([a, DiscreteMeasure(PointCloud([[0.25]]), [1.0])])
        assert len(mu.host) == 1 and mu.weights.tolist() == [0.75]

    def test_empty(self):
        with pytest.raises(InputError):
            mix_measures([])


class TestWitness:
    def test_three_points(self):
        c = PointCloud([[0.0], [0.5], [1.0]])
        mu = witness_measure(c, [1, 2])
        assert mu.weights.tolist() == [1.125, 0.0, 0.125]
        assert mu.total_mass == 1.25
        assert mu.support_floor == 0.5

    def test_singleton(self):
        mu = witness_measure(PointCloud([[0.0]]), [1, 2, 3])
        assert mu.total_mass == pytest.approx(1 + 1 / 4 + 1 / 9)
        assert mu.total_mass == pytest.approx(1.3611, abs=1e-4)

    def test_k_list_validation(self):
        c = PointCloud([[0.0], [0.5]])
        for bad in ([], [2, 1], [0, 1], [1, 1]):
            with pytest.raises(InputError):
                witness_measure(c, bad)

    def test_below_mesh_is_recorded(self):
        c = cantor_cloud(4)
        with pytest.warns(UserWarning):
            mu = witness_measure(c, range(1, 10))
        assert any("below sample mesh" in n for n in mu.notes)

    def test_charges_every_ball_above_floor(self):
        c = cantor_cloud(7)
        mu = witness_measure(c, range(1, 8))
        lo = ball_mass_extrema(mu, mu.support_floor).min_mass
        assert lo > 0

    def test_cantor_upper_minkowski(self):
        c = cantor_cloud(8)
        mu = witness_measure(c, range(1, 9))
        cfg = default_config(c)
        g = ScaleGrid(cfg.r_max, max(cfg.r_min, mu.support_floor))
        up, _ = minkowski_dims_measure(mu, g, cfg.window)
        assert abs(up.value - CANTOR_DIM) <= 0.1, up.value


class TestMeasureFiles:
    def test_roundtrip_with_host(self):
        c, mu = sequence_fixture(20)
        text = format_measure(mu)
        back = parse_measure(text, c)
        assert np.array_equal(back.weights, mu.weights)

    def test_roundtrip_partial_support(self):
        c = PointCloud([[0.0], [0.5], [1.0]])
        mu = witness_measure(c, [1, 2])
        back = parse_measure(format_measure(mu), c)
        assert np.array_equal(back.weights, mu.weights)
        assert back.support_floor == mu.support_floor
        # without a host the atoms become a fully supported host of their own
        alone = parse_measure(format_measure(mu))
        assert len(alone.host) == 2 and alone.full_support and alone.support_floor == 0.0

    def test_bad_rows(self):
        with pytest.raises(InputError):
            parse_measure("0.0 -1\n")
        with pytest.raises(InputError):
            parse_measure("0.5\n")
        with pytest.raises(InputError):
            parse_measure("0.3 1\n", PointCloud([[0.0], [1.0]]))
