"""Property tests: separation, maximality and the sandwich against the exact oracle."""

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from dimlab import PointCloud, exact_packing_number, greedy_maximal_packing

coords = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def clouds(draw, max_points=15):
    d = draw(st.integers(1, 3))
    n = draw(st.integers(1, max_points))
    pts = draw(st.lists(st.lists(coords, min_size=d, max_size=d), min_size=n, max_size=n))
    metric = draw(st.sampled_from(["euclidean", "chebyshev"]))
    return PointCloud.from_points(np.array(pts), metric)


radii = st.floats(min_value=1e-4, max_value=0.8, allow_nan=False)


@given(clouds(), radii, st.integers(0, 2**31 - 1))
def test_separation_and_cover(cloud, r, seed):
    p = greedy_maximal_packing(cloud, r, seed=seed)
    assert p.min_separation(cloud) > 2 * r
    assert p.cover_radius(cloud) <= 2 * r


@given(clouds(), radii, st.integers(0, 2**31 - 1))
def test_sandwich_any_order(cloud, r, seed):
    lo = exact_packing_number(cloud, 2 * r)
    hi = exact_packing_number(cloud, r)
    assert lo <= len(greedy_maximal_packing(cloud, r)) <= hi
    assert lo <= len(greedy_maximal_packing(cloud, r, seed=seed)) <= hi


@given(clouds(), radii, radii)
def test_exact_count_monotone_in_r(cloud, a, b):
    r1, r2 = min(a, b), max(a, b)
    assert exact_packing_number(cloud, r1) >= exact_packing_number(cloud, r2)
