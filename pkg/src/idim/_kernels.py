"""Hot numeric kernels, in two flavors: numba ``@njit`` and pure numpy.

The numba path is the default whenever numba imports cleanly; setting the
environment variable ``IDIM_NUMBA`` to ``0``/``false``/``off``/``no`` before
import forces the numpy fallback. ``IDIM_THREADS`` caps the numba thread
count. Both flavors implement the same arithmetic in the same per-element
order, so results agree to floating-point rounding; within one backend,
results are bit-reproducible (parallelism is over rows only, reductions stay
sequential per row).

``benchmarks/bench_kernels.py`` times the two flavors against each other.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

EUCLIDEAN_CODE = 0
MANHATTAN_CODE = 1
CANBERRA_CODE = 2


def _numba_enabled_by_env() -> bool:
    return os.environ.get("IDIM_NUMBA", "").strip().lower() not in (
        "0",
        "false",
        "off",
        "no",
    )


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def pairwise_distances_numpy(X: np.ndarray, metric_code: int) -> np.ndarray:
    """Dense n x n distance matrix, chunked over rows to bound memory."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, ncols = X.shape
    out = np.empty((n, n), dtype=np.float64)
    chunk = max(1, int(8_000_000 // max(1, n * ncols)))
    absX = np.abs(X) if metric_code == CANBERRA_CODE else None
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        diff = X[start:stop, None, :] - X[None, :, :]
        if metric_code == EUCLIDEAN_CODE:
            out[start:stop] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        elif metric_code == MANHATTAN_CODE:
            out[start:stop] = np.abs(diff).sum(axis=2)
        elif metric_code == CANBERRA_CODE:
            num = np.abs(diff)
            den = absX[start:stop, None, :] + absX[None, :, :]
            with np.errstate(invalid="ignore", divide="ignore"):
                terms = np.where(den > 0.0, num / den, 0.0)
            out[start:stop] = terms.sum(axis=2)
        else:
            raise ValueError(f"unknown metric code {metric_code}")
    np.fill_diagonal(out, 0.0)
    return out


def knn_select_numpy(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-row k smallest off-diagonal distances, ties broken by lower index."""
    n = dist.shape[0]
    nn_dist = np.empty((n, k), dtype=np.float64)
    nn_index = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        row = dist[i].astype(np.float64, copy=True)
        row[i] = np.inf
        kth = np.partition(row, k - 1)[k - 1]
        lower = np.flatnonzero(row < kth)
        equal = np.flatnonzero(row == kth)
        cand = np.concatenate([lower, equal[: k - lower.size]])
        order = np.lexsort((cand, row[cand]))
        sel = cand[order]
        nn_index[i] = sel
        nn_dist[i] = row[sel]
    return nn_dist, nn_index


def gibbs_label_sweep_numpy(
    z: np.ndarray,
    counts: np.ndarray,
    d: np.ndarray,
    log_pi: np.ndarray,
    log_mu: np.ndarray,
    out_nbr: np.ndarray,
    in_indptr: np.ndarray,
    in_index: np.ndarray,
    log_z_table: np.ndarray,
    log_zeta_ratio: float,
    uniforms: np.ndarray,
) -> None:
    """One systematic-scan update of all membership labels, in place.

    ``z`` holds 0-based labels; ``counts`` the occupancy per component;
    ``out_nbr[i]`` the q neighbor indices of point i; ``in_indptr``/``in_index``
    the CSR lists of points that have i among their neighbors. ``uniforms``
    supplies one pre-drawn U(0,1) per point so both backends consume the RNG
    stream identically.
    """
    n = z.shape[0]
    nk = d.shape[0]
    log_d = np.log(d)
    for i in range(n):
        counts[z[i]] -= 1
        nbr = np.bincount(z[out_nbr[i]], minlength=nk)
        nbr += np.bincount(z[in_index[in_indptr[i] : in_indptr[i + 1]]], minlength=nk)
        logw = (
            log_pi
            + log_d
            - (d + 1.0) * log_mu[i]
            + log_zeta_ratio * nbr
            - log_z_table[counts + 1]
            + counts * (log_z_table[counts] - log_z_table[counts + 1])
        )
        w = np.exp(logw - logw.max())
        target = uniforms[i] * w.sum()
        new = int(np.searchsorted(np.cumsum(w), target, side="right"))
        if new >= nk:
            new = nk - 1
        z[i] = new
        counts[new] += 1


def coassignment_counts_numpy(labels: np.ndarray) -> np.ndarray:
    """n x n counts of draws on which two observations share a label."""
    ndraws, n = labels.shape
    counts = np.zeros((n, n), dtype=np.int64)
    for t in range(ndraws):
        row = labels[t]
        counts += row[:, None] == row[None, :]
    return counts


# ---------------------------------------------------------------------------
# numba implementations (compiled only when the backend is active)
# ---------------------------------------------------------------------------

USING_NUMBA = False
pairwise_distances_numba = None
knn_select_numba = None
gibbs_label_sweep_numba = None
coassignment_counts_numba = None

if _numba_enabled_by_env():
    try:
        import numba
        from numba import njit, prange
    except ImportError:  # pragma: no cover - numba is a declared dependency
        warnings.warn("numba unavailable; falling back to pure-numpy kernels")
    else:
        USING_NUMBA = True
        _threads = os.environ.get("IDIM_THREADS", "").strip()
        if _threads:
            try:
                numba.set_num_threads(
                    max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS))
                )
            except ValueError:
                warnings.warn(f"ignoring non-integer IDIM_THREADS={_threads!r}")

        @njit(parallel=True, cache=True)
        def pairwise_distances_numba(X, metric_code):  # noqa: F811
            n, ncols = X.shape
            out = np.empty((n, n), dtype=np.float64)
            for i in prange(n):
                for j in range(n):
                    if j == i:
                        out[i, j] = 0.0
                        continue
                    acc = 0.0
                    if metric_code == 0:
                        for t in range(ncols):
                            delta = X[i, t] - X[j, t]
                            acc += delta * delta
                        acc = np.sqrt(acc)
                    elif metric_code == 1:
                        for t in range(ncols):
                            acc += abs(X[i, t] - X[j, t])
                    else:
                        for t in range(ncols):
                            den = abs(X[i, t]) + abs(X[j, t])
                            if den > 0.0:
                                acc += abs(X[i, t] - X[j, t]) / den
                    out[i, j] = acc
            return out

        @njit(parallel=True, cache=True)
        def knn_select_numba(dist, k):  # noqa: F811
            n = dist.shape[0]
            nn_dist = np.empty((n, k), dtype=np.float64)
            nn_index = np.empty((n, k), dtype=np.int64)
            for i in prange(n):
                filled = 0
                for j in range(n):
                    if j == i:
                        continue
                    v = dist[i, j]
                    if filled < k:
                        pos = filled
                        while pos > 0 and nn_dist[i, pos - 1] > v:
                            nn_dist[i, pos] = nn_dist[i, pos - 1]
                            nn_index[i, pos] = nn_index[i, pos - 1]
                            pos -= 1
                        nn_dist[i, pos] = v
                        nn_index[i, pos] = j
                        filled += 1
                    elif v < nn_dist[i, k - 1]:
                        pos = k - 1
                        while pos > 0 and nn_dist[i, pos - 1] > v:
                            nn_dist[i, pos] = nn_dist[i, pos - 1]
                            nn_index[i, pos] = nn_index[i, pos - 1]
                            pos -= 1
                        nn_dist[i, pos] = v
                        nn_index[i, pos] = j
            return nn_dist, nn_index

        @njit(cache=True)
        def gibbs_label_sweep_numba(  # noqa: F811
            z,
            counts,
            d,
            log_pi,
            log_mu,
            out_nbr,
            in_indptr,
            in_index,
            log_z_table,
            log_zeta_ratio,
            uniforms,
        ):
            n = z.shape[0]
            nk = d.shape[0]
            logw = np.empty(nk, dtype=np.float64)
            nbr = np.empty(nk, dtype=np.int64)
            log_d = np.log(d)
            for i in range(n):
                counts[z[i]] -= 1
                for k in range(nk):
                    nbr[k] = 0
                for t in range(out_nbr.shape[1]):
                    nbr[z[out_nbr[i, t]]] += 1
                for t in range(in_indptr[i], in_indptr[i + 1]):
                    nbr[z[in_index[t]]] += 1
                for k in range(nk):
                    ck = counts[k]
                    logw[k] = (
                        log_pi[k]
                        + log_d[k]
                        - (d[k] + 1.0) * log_mu[i]
                        + log_zeta_ratio * nbr[k]
                        - log_z_table[ck + 1]
                        + ck * (log_z_table[ck] - log_z_table[ck + 1])
                    )
                top = logw[0]
                for k in range(1, nk):
                    if logw[k] > top:
                        top = logw[k]
                total = 0.0
                for k in range(nk):
                    logw[k] = np.exp(logw[k] - top)
                    total += logw[k]
                target = uniforms[i] * total
                new = nk - 1
                acc = 0.0
                for k in range(nk):
                    acc += logw[k]
                    if target < acc:
                        new = k
                        break
                z[i] = new
                counts[new] += 1

        @njit(parallel=True, cache=True)
        def coassignment_counts_numba(labels):  # noqa: F811
            ndraws, n = labels.shape
            counts = np.zeros((n, n), dtype=np.int64)
            for i in prange(n):
                for t in range(ndraws):
                    zi = labels[t, i]
                    for j in range(n):
                        if labels[t, j] == zi:
                            counts[i, j] += 1
            return counts


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"


# Dispatchers used by the rest of the package.

def pairwise_distances(X: np.ndarray, metric_code: int) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if USING_NUMBA:
        return pairwise_distances_numba(X, metric_code)
    return pairwise_distances_numpy(X, metric_code)


def knn_select(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if USING_NUMBA:
        return knn_select_numba(dist, k)
    return knn_select_numpy(dist, k)


def gibbs_label_sweep(*args) -> None:
    if USING_NUMBA:
        gibbs_label_sweep_numba(*args)
    else:
        gibbs_label_sweep_numpy(*args)


def coassignment_counts(labels: np.ndarray) -> np.ndarray:
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if USING_NUMBA:
        return coassignment_counts_numba(labels)
    return coassignment_counts_numpy(labels)
