"""Postprocessing of raw mixture chains into observation-level estimates.

Mixture labels are only identified up to permutation across MCMC draws, so
per-component chains cannot be summarized directly. Mapping each observation
to the dimension of its component at every draw removes that ambiguity; the
co-assignment (posterior similarity) matrix then drives a dendrogram-based
clustering of the observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import Metric, coerce_cloud, deduplicate, distance_matrix, validate_distance_matrix
from .hidalgo import HidalgoChains

ID_SUMMARY_COLUMNS = ["mean", "q05", "q25", "q50", "q75", "q95"]


@dataclass
class PosteriorSummary:
    """Observation-level postprocessed output of one mixture run."""

    id_postpr: np.ndarray  # (T, n) observation-specific dimension chains
    id_summary: np.ndarray  # (n, 6): mean, 5/25/50/75/95% quantiles
    psm: np.ndarray  # (n, n) co-assignment frequencies
    clusters: np.ndarray | None = None  # (n,) labels in 1..k
    method_echo: dict | None = None


def fix_label_switching(chains: HidalgoChains) -> np.ndarray:
    """Map the K component chains onto observations: out[t, i] = d_{z_i(t)}(t).

    The result is invariant under any per-draw relabeling applied jointly to
    the label and dimension chains.
    """
    labels = chains.membership_labels
    rows = np.arange(labels.shape[0])[:, None]
    return chains.id_raw[rows, labels - 1]


def summarize_ids(id_postpr: np.ndarray) -> np.ndarray:
    """Per-observation mean and 5/25/50/75/95% quantiles of the chains.

    Quantiles interpolate linearly between order statistics.
    """
    id_postpr = np.asarray(id_postpr, dtype=np.float64)
    if id_postpr.ndim != 2 or id_postpr.shape[0] < 1:
        raise ValueError("id_postpr must be a (T, n) matrix with T >= 1")
    mean = id_postpr.mean(axis=0)
    quants = np.quantile(id_postpr, [0.05, 0.25, 0.50, 0.75, 0.95], axis=0)
    return np.column_stack([mean, quants.T])


def posterior_similarity(membership_labels: np.ndarray) -> np.ndarray:
    """Fraction of draws on which each pair of observations shares a label."""
    labels = np.asarray(membership_labels, dtype=np.int64)
    if labels.ndim != 2 or labels.shape[0] < 1:
        raise ValueError("membership_labels must be a (T, n) matrix with T >= 1")
    counts = _kernels.coassignment_counts(labels)
    return counts / labels.shape[0]


def _validate_psm(psm: np.ndarray) -> np.ndarray:
    psm = np.asarray(psm, dtype=np.float64)
    if psm.ndim != 2 or psm.shape[0] != psm.shape[1]:
        raise ValueError("psm must be square")
    if np.any(psm < 0.0) or np.any(psm > 1.0):
        raise ValueError("psm entries must lie in [0, 1]")
    if np.any(np.diag(psm) != 1.0):
        raise ValueError("psm diagonal must equal 1")
    return psm


def cluster_from_psm(psm: np.ndarray, K: int, linkage: str = "average") -> np.ndarray:
    """Cut an agglomerative dendrogram over dissimilarity 1 - psm at K clusters.

    Merging is deterministic: on equal dissimilarity the lexicographically
    lowest active pair merges first, and the merged cluster keeps the lower
    index. Returned labels are 1..K numbered by first member. ``linkage``
    is one of average, complete, single.
    """
    psm = _validate_psm(psm)
    n = psm.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K must lie in 1..n, got K={K} with n={n}")
    if linkage not in ("average", "complete", "single"):
        raise ValueError("linkage must be average, complete, or single")
    diss = 1.0 - psm
    np.fill_diagonal(diss, np.inf)
    sizes = np.ones(n, dtype=np.int64)
    rep = np.arange(n)
    for _ in range(n - K):
        flat = np.argmin(diss)
        a, b = divmod(int(flat), n)
        if a > b:
            a, b = b, a
        if linkage == "average":
            merged = (sizes[a] * diss[a] + sizes[b] * diss[b]) / (sizes[a] + sizes[b])
        elif linkage == "complete":
            merged = np.maximum(diss[a], diss[b])
        else:
            merged = np.minimum(diss[a], diss[b])
        diss[a] = merged
        diss[:, a] = merged
        diss[a, a] = np.inf
        diss[b, :] = np.inf
        diss[:, b] = np.inf
        sizes[a] += sizes[b]
        rep[rep == b] = a
    labels = np.empty(n, dtype=np.int64)
    next_label = 1
    seen: dict[int, int] = {}
    for i in range(n):
        r = int(rep[i])
        if r not in seen:
            seen[r] = next_label
            next_label += 1
        labels[i] = seen[r]
    return labels


def cluster_frequencies(labels: np.ndarray) -> np.ndarray:
    """Counts per cluster label 1..max(labels)."""
    labels = np.asarray(labels, dtype=np.int64)
    return np.bincount(labels - 1, minlength=labels.max())


def id_by_class(
    id_postpr: np.ndarray, class_labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified summary of the observation chains by an external factor.

    Per class: mean of the pooled class draws, median of the per-observation
    medians, and standard deviation across the pooled class draws. Returns
    (classes, stats) with stats columns [mean, median, sd] and classes in
    sorted order.
    """
    id_postpr = np.asarray(id_postpr, dtype=np.float64)
    class_labels = np.asarray(class_labels)
    if class_labels.shape[0] != id_postpr.shape[1]:
        raise ValueError("class vector length must match the observation count")
    classes = np.unique(class_labels)
    stats = np.empty((classes.size, 3))
    obs_medians = np.median(id_postpr, axis=0)
    for row, cls in enumerate(classes):
        members = class_labels == cls
        pooled = id_postpr[:, members].ravel()
        stats[row, 0] = pooled.mean()
        stats[row, 1] = np.median(obs_medians[members])
        stats[row, 2] = pooled.std(ddof=1) if pooled.size > 1 else 0.0
    return classes, stats


def nn_distance_profile(
    X=None,
    dist_mat: np.ndarray | None = None,
    metric: "Metric | str" = Metric.EUCLIDEAN,
) -> np.ndarray:
    """Cumulative means of each point's ascending NN distances, row per point.

    Row i, column j holds the average of the j+1 smallest distances from
    point i; level jumps across columns flag heterogeneous neighborhoods.
    """
    if dist_mat is not None:
        dist = validate_distance_matrix(dist_mat)
    elif X is not None:
        cloud, _ = deduplicate(coerce_cloud(X))
        dist = distance_matrix(cloud, metric)
    else:
        raise ValueError("either X or dist_mat is required")
    n = dist.shape[0]
    ordered = np.sort(dist, axis=1)[:, 1:]
    return np.cumsum(ordered, axis=1) / np.arange(1, n)


def postprocess(
    chains: HidalgoChains,
    k_clusters: int | None = None,
    linkage: str = "average",
) -> PosteriorSummary:
    """Full postprocessing pipeline for one run."""
    id_postpr = fix_label_switching(chains)
    psm = posterior_similarity(chains.membership_labels)
    clusters = None
    if k_clusters is not None:
        clusters = cluster_from_psm(psm, k_clusters, linkage=linkage)
    return PosteriorSummary(
        id_postpr=id_postpr,
        id_summary=summarize_ids(id_postpr),
        psm=psm,
        clusters=clusters,
        method_echo={"method": "dendrogram", "linkage": linkage, "k": k_clusters},
    )
