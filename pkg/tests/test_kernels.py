import math
import os
import subprocess
import sys

import numpy as np
import pytest

import idim
from idim import _kernels


needs_numba = pytest.mark.skipif(
    not _kernels.USING_NUMBA, reason="numba backend disabled in this process"
)


@needs_numba
@pytest.mark.parametrize("code", [0, 1, 2])
def test_pairwise_backends_agree(rng, code):
    X = rng.normal(size=(60, 7))
    a = _kernels.pairwise_distances_numba(X, code)
    b = _kernels.pairwise_distances_numpy(X, code)
    assert np.max(np.abs(a - b)) < 1e-12


@needs_numba
def test_knn_backends_agree(rng):
    X = rng.normal(size=(50, 4))
    dist = _kernels.pairwise_distances_numpy(X, 0)
    da, ia = _kernels.knn_select_numba(dist, 6)
    db, ib = _kernels.knn_select_numpy(dist, 6)
    np.testing.assert_array_equal(ia, ib)
    np.testing.assert_array_equal(da, db)


@needs_numba
def test_knn_backends_agree_under_ties():
    # lattice points produce many exactly-equal distances
    grid = np.array([[i, j] for i in range(5) for j in range(5)], dtype=float)
    dist = _kernels.pairwise_distances_numpy(grid, 1)
    da, ia = _kernels.knn_select_numba(dist, 8)
    db, ib = _kernels.knn_select_numpy(dist, 8)
    np.testing.assert_array_equal(ia, ib)
    np.testing.assert_array_equal(da, db)


@needs_numba
def test_coassignment_backends_agree(rng):
    labels = rng.integers(0, 4, size=(30, 17)).astype(np.int64)
    np.testing.assert_array_equal(
        _kernels.coassignment_counts_numba(labels),
        _kernels.coassignment_counts_numpy(labels),
    )


@needs_numba
def test_sweep_backends_agree(rng):
    n, k, q = 40, 5, 3
    ratios = idim.compute_mus(rng.normal(size=(n, 3)), with_adjacency=True, q=q)
    from idim.hidalgo import _in_neighbor_csr, _log_z_table

    _, cols = np.nonzero(ratios.adjacency)
    out_nbr = np.ascontiguousarray(cols.reshape(n, q), dtype=np.int64)
    indptr, inidx = _in_neighbor_csr(ratios.adjacency)
    log_z = _log_z_table(0.25, n, q)
    log_ratio = math.log(3.0)
    z0 = rng.integers(0, k, n).astype(np.int64)
    d = rng.uniform(0.5, 5.0, k)
    log_pi = np.log(rng.dirichlet(np.ones(k)))
    u = rng.random(n)
    za, ca = z0.copy(), np.bincount(z0, minlength=k).astype(np.int64)
    zb, cb = z0.copy(), ca.copy()
    _kernels.gibbs_label_sweep_numba(
        za, ca, d, log_pi, np.log(ratios.mus), out_nbr, indptr, inidx, log_z, log_ratio, u
    )
    _kernels.gibbs_label_sweep_numpy(
        zb, cb, d, log_pi, np.log(ratios.mus), out_nbr, indptr, inidx, log_z, log_ratio, u
    )
    np.testing.assert_array_equal(za, zb)
    np.testing.assert_array_equal(ca, cb)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, IDIM_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "import idim; print(idim.backend_name())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_fallback_backend_produces_same_mus():
    env = dict(os.environ, IDIM_NUMBA="0")
    code = (
        "import idim, numpy as np;"
        "cloud = idim.swissroll(80, 5);"
        "print(repr(idim.compute_mus(cloud).mus.sum()))"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
    )
    cloud = idim.swissroll(80, 5)
    ours = idim.compute_mus(cloud).mus.sum()
    assert abs(float(out.stdout.strip().replace("np.float64(", "").rstrip(")")) - ours) < 1e-9


def test_threads_env_accepted():
    env = dict(os.environ, IDIM_THREADS="1")
    code = "import idim, numpy as np; print(idim.distance_matrix(np.eye(4)).shape)"
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True
    )
    assert "(4, 4)" in out.stdout
