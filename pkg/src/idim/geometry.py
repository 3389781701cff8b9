"""Distances, nearest neighbors, and distance-ratio construction.

Everything downstream (the homogeneous estimators and the mixture sampler)
consumes the ``RatioSet`` produced here: per-point sorted neighbor distances,
the ratios ``mu_i = r_{i,n2} / r_{i,n1}``, and optionally the binary
q-neighborhood adjacency matrix.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels


class Metric(enum.Enum):
    """Supported distance definitions."""

    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    CANBERRA = "canberra"
    PRECOMPUTED = "precomputed"

    @classmethod
    def coerce(cls, value: "Metric | str") -> "Metric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown metric {value!r}; expected one of: {names}")


_METRIC_CODES = {
    Metric.EUCLIDEAN: _kernels.EUCLIDEAN_CODE,
    Metric.MANHATTAN: _kernels.MANHATTAN_CODE,
    Metric.CANBERRA: _kernels.CANBERRA_CODE,
}


@dataclass
class PointCloud:
    """Dense n x D matrix of observations with optional column names."""

    data: np.ndarray
    col_names: list[str] | None = None

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError("point cloud data must be a 2-D matrix")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("point cloud contains non-finite values")
        if self.col_names is not None:
            self.col_names = [str(c) for c in self.col_names]
            if len(self.col_names) != self.data.shape[1]:
                raise ValueError("col_names length does not match column count")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def ncols(self) -> int:
        return self.data.shape[1]


@dataclass
class RatioSet:
    """Neighbor distances and ratios for one dataset.

    ``mus[i] = nn_dist[i, n2-1] / nn_dist[i, n1-1]``. ``adjacency`` (when
    requested) is the n x n 0/1 matrix whose row i marks the q nearest
    neighbors of point i.
    """

    mus: np.ndarray
    n1: int
    n2: int
    nn_dist: np.ndarray
    nn_index: np.ndarray
    adjacency: np.ndarray | None = None
    q: int | None = None
    removed_duplicates: int = 0

    def validate(self) -> None:
        """Check the structural invariants; raises ValueError on violation."""
        if np.any(self.mus < 1.0) or not np.all(np.isfinite(self.mus)):
            raise ValueError("mu ratios must be finite and >= 1")
        if np.any(self.nn_dist <= 0.0):
            raise ValueError("neighbor distances must be strictly positive")
        if np.any(np.diff(self.nn_dist, axis=1) < 0.0):
            raise ValueError("neighbor distances must be nondecreasing")
        if self.adjacency is not None:
            if np.any(np.diag(self.adjacency) != 0):
                raise ValueError("adjacency diagonal must be zero")
            if np.any(self.adjacency.sum(axis=1) != self.q):
                raise ValueError("adjacency rows must each hold exactly q ones")


def coerce_cloud(X: "PointCloud | np.ndarray") -> PointCloud:
    return X if isinstance(X, PointCloud) else PointCloud(np.asarray(X))


def deduplicate(X: "PointCloud | np.ndarray") -> tuple[PointCloud, int]:
    """Drop exact-duplicate rows (bitwise equality), keeping first occurrences.

    Returns the reduced cloud and the number of removed rows, warning when any
    were dropped. Fails if fewer than 3 rows remain.
    """
    cloud = coerce_cloud(X)
    data = np.ascontiguousarray(cloud.data)
    as_void = data.view(np.dtype((np.void, data.dtype.itemsize * data.shape[1])))
    _, first = np.unique(as_void.ravel(), return_index=True)
    keep = np.sort(first)
    removed = cloud.n - keep.size
    if removed > 0:
        warnings.warn(
            "Duplicates are present and will be removed. "
            f"Original sample size: {cloud.n}. New sample size: {keep.size}."
        )
    if keep.size < 3:
        raise ValueError(
            f"need at least 3 distinct rows, got {keep.size} after duplicate removal"
        )
    return PointCloud(data[keep], cloud.col_names), removed


def distance_matrix(X: "PointCloud | np.ndarray", metric: "Metric | str" = Metric.EUCLIDEAN) -> np.ndarray:
    """Full symmetric distance matrix under a named metric.

    Canberra terms with a 0/0 coordinate contribute 0.
    """
    metric = Metric.coerce(metric)
    if metric is Metric.PRECOMPUTED:
        raise ValueError("pass a precomputed matrix via dist_mat, not as a metric")
    cloud = coerce_cloud(X)
    return _kernels.pairwise_distances(cloud.data, _METRIC_CODES[metric])


def validate_distance_matrix(dist: np.ndarray) -> np.ndarray:
    """Validate a user-supplied distance matrix: square, symmetric,
    zero-diagonal, nonnegative, finite."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.all(np.isfinite(dist)):
        raise ValueError("distance matrix contains non-finite values")
    if np.any(dist < 0.0):
        raise ValueError("distance matrix contains negative entries")
    scale = dist.max() if dist.size else 0.0
    if np.any(np.abs(np.diag(dist)) > 1e-12 * max(scale, 1.0)):
        raise ValueError("distance matrix diagonal must be zero")
    if np.max(np.abs(dist - dist.T)) > 1e-10 * max(scale, 1.0):
        raise ValueError("distance matrix must be symmetric")
    return dist


def knn(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k nearest neighbors per row of a distance matrix.

    Brute-force partial selection: row i of the outputs holds the k smallest
    off-diagonal entries of dist[i] in ascending order with their column
    indices, ties broken by lower column index.
    """
    n = dist.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= n-1, got k={k} with n={n}")
    nn_dist, nn_index = _kernels.knn_select(dist, k)
    if np.any(nn_dist[:, 0] == 0.0):
        raise ValueError(
            "zero off-diagonal distance found: duplicate points survived; "
            "deduplicate the input first"
        )
    return nn_dist, nn_index


def compute_mus(
    X: "PointCloud | np.ndarray | None" = None,
    dist_mat: np.ndarray | None = None,
    metric: "Metric | str" = Metric.EUCLIDEAN,
    n1: int = 1,
    n2: int = 2,
    with_adjacency: bool = False,
    q: int = 3,
) -> RatioSet:
    """Distance ratios mu_{n1,n2} (and optionally the q-NN adjacency matrix).

    Parameters
    ----------
    X : point cloud, ignored when dist_mat is given
    dist_mat : precomputed n x n distance matrix; overrides X
    metric : distance definition used when computing from X
    n1, n2 : neighbor orders, 1 <= n1 < n2 <= n-1
    with_adjacency : also build the binary q-neighborhood matrix
    q : neighborhood order for the adjacency matrix
    """
    removed = 0
    if dist_mat is not None:
        dist = validate_distance_matrix(dist_mat)
    elif X is not None:
        cloud, removed = deduplicate(X)
        dist = distance_matrix(cloud, metric)
    else:
        raise ValueError("either X or dist_mat is required")
    n = dist.shape[0]
    if not (1 <= n1 < n2 <= n - 1):
        raise ValueError(f"need 1 <= n1 < n2 <= n-1, got n1={n1}, n2={n2}, n={n}")
    if with_adjacency and not 1 <= q <= n - 1:
        raise ValueError(f"q must satisfy 1 <= q <= n-1, got q={q} with n={n}")
    k = max(n2, q) if with_adjacency else n2
    nn_dist, nn_index = knn(dist, k)
    mus = nn_dist[:, n2 - 1] / nn_dist[:, n1 - 1]
    adjacency = None
    if with_adjacency:
        adjacency = np.zeros((n, n), dtype=np.int8)
        rows = np.repeat(np.arange(n), q)
        adjacency[rows, nn_index[:, :q].ravel()] = 1
    return RatioSet(
        mus=mus,
        n1=n1,
        n2=n2,
        nn_dist=nn_dist[:, :n2],
        nn_index=nn_index[:, :n2],
        adjacency=adjacency,
        q=q if with_adjacency else None,
        removed_duplicates=removed,
    )
