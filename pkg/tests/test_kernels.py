"""The compiled and pure-Python backends must agree exactly."""

import numpy as np
import pytest

from dimlab import kernels
from dimlab import _kernels_py
from dimlab.generators import cantor_cloud

pytestmark = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled backend not built")


def _pair():
    from dimlab import _kernels

    return _kernels, _kernels_py


@pytest.mark.parametrize("metric", [kernels.EUCLIDEAN, kernels.CHEBYSHEV])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_parity_random(metric, d):
    c, p = _pair()
    rng = np.random.default_rng(d * 7 + metric)
    pts = np.ascontiguousarray(rng.random((400, d)))
    w = rng.random(400)
    order = rng.permutation(400).astype(np.int64)
    rank = np.empty(400, dtype=np.int64)
    rank[order] = np.arange(400)
    for r in (0.003, 0.02, 0.1, 0.4):
        assert np.allclose(c.ball_weights(pts, w, pts, r, metric), p.ball_weights(pts, w, pts, r, metric), rtol=1e-12)
        assert np.array_equal(c.greedy_pack(pts, order, r, metric), p.greedy_pack(pts, order, r, metric))
        cen = np.ascontiguousarray(pts[::17])
        assert np.array_equal(
            c.local_counts(pts, rank, cen, 2.5 * r, r, metric), p.local_counts(pts, rank, cen, 2.5 * r, r, metric)
        )


def test_parity_on_lattice_ties():
    """Points at exactly 2r apart are not separated; both backends must agree on ties."""
    c, p = _pair()
    pts = np.ascontiguousarray(np.linspace(0, 1, 129).reshape(-1, 1))
    order = np.arange(129, dtype=np.int64)
    for r in (1 / 256, 1 / 128, 1 / 64):
        a = c.greedy_pack(pts, order, r, kernels.EUCLIDEAN)
        b = p.greedy_pack(pts, order, r, kernels.EUCLIDEAN)
        assert np.array_equal(a, b)


def test_one_dimensional_fast_paths_match_generic():
    cloud = cantor_cloud(9)
    pts = cloud.points
    n = len(pts)
    order = np.arange(n, dtype=np.int64)
    w = np.full(n, 1.0 / n)
    for backend in ("python", "compiled"):
        prev = kernels.use_backend(backend)
        try:
            for r in (3.0**-4, 3.0**-6, 1e-3):
                generic = kernels._backend.greedy_pack(pts, order, r, kernels.EUCLIDEAN)
                assert np.array_equal(kernels.greedy_pack(pts, order, r, kernels.EUCLIDEAN), generic)
                bw = kernels._backend.ball_weights(pts, w, pts, r, kernels.EUCLIDEAN)
                assert np.allclose(kernels.ball_weights(pts, w, pts, r, kernels.EUCLIDEAN), bw, rtol=1e-12, atol=1e-15)
                cen = pts[::5]
                lc = kernels._backend.local_counts(pts, order, np.ascontiguousarray(cen), 8 * r, r, kernels.EUCLIDEAN)
                multi = kernels.local_counts(pts, order, cen, [8 * r, 2 * r], r, kernels.EUCLIDEAN)
                assert np.array_equal(multi[0], lc)
        finally:
            kernels.use_backend(prev)


def test_pure_env_forces_fallback():
    import os
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from dimlab import kernels; print(kernels.BACKEND)"],
        env={**os.environ, "DIMLAB_PURE": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
