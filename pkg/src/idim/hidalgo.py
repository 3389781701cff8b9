"""Heterogeneous intrinsic-dimension estimation via a penalized Pareto mixture.

A K-component mixture of Pareto(1, d_k) likelihoods over the NN distance
ratios, augmented with a q-neighborhood penalty that rewards assigning a
point to the component its neighbors occupy. Inference is a systematic-scan
Gibbs sampler: mixture weights from their Dirichlet full conditional, labels
from the penalized categorical full conditional (computed in log space), and
component dimensions from one of three prior families (conjugate Gamma,
Gamma truncated to (0, D), or truncated Gamma with a point mass at D).
"""

from __future__ import annotations

import enum
import math
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln, logsumexp

from . import _kernels
from ._gamma import log_trunc_gamma_norm, trunc_gamma_ppf
from .geometry import Metric, RatioSet, compute_mus


class PriorType(enum.Enum):
    CONJUGATE = "conjugate"
    TRUNCATED = "truncated"
    TRUNCATED_POINTMASS = "truncated-pointmass"

    @classmethod
    def coerce(cls, value: "PriorType | str") -> "PriorType":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown prior type {value!r}; expected one of: {names}")


@dataclass
class HidalgoConfig:
    """Sampler configuration.

    ``K`` is an upper bound on the number of occupied components (the sparse
    Dirichlet mass ``alpha_dirichlet`` keeps unneeded ones empty). ``xi`` is
    the local-homogeneity probability that a neighbor shares the component,
    so the cross-component probability is 1 - xi. ``pi_mass`` is the prior
    probability placed directly on d = D under the point-mass prior.
    """

    K: int = 10
    q: int = 3
    xi: float = 0.75
    alpha_dirichlet: float = 0.05
    a0_d: float = 1.0
    b0_d: float = 1.0
    prior_type: PriorType = PriorType.CONJUGATE
    D: int | None = None
    pi_mass: float = 0.5
    nsim: int = 2000
    burn_in: int = 2000
    thinning: int = 1
    seed: int = 0

    def validate(self) -> None:
        # K = 1 is allowed as the degenerate single-manifold run
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if not 0.5 < self.xi < 1.0:
            raise ValueError("xi must lie in (0.5, 1)")
        if self.alpha_dirichlet <= 0.0:
            raise ValueError("alpha_dirichlet must be positive")
        if self.a0_d <= 0.0 or self.b0_d <= 0.0:
            raise ValueError("Gamma prior parameters must be positive")
        self.prior_type = PriorType.coerce(self.prior_type)
        if self.prior_type is not PriorType.CONJUGATE:
            if self.D is None or self.D < 1:
                raise ValueError("truncated priors need a nominal dimension D >= 1")
        if self.prior_type is PriorType.TRUNCATED_POINTMASS:
            if not 0.0 < self.pi_mass < 1.0:
                raise ValueError("pi_mass must lie in (0, 1)")
        if self.nsim < 1 or self.burn_in < 0 or self.thinning < 1:
            raise ValueError("need nsim >= 1, burn_in >= 0, thinning >= 1")
        if self.nsim % self.thinning != 0:
            raise ValueError("nsim must be divisible by thinning")


@dataclass
class HidalgoChains:
    """Retained MCMC draws plus the configuration they came from."""

    cluster_prob: np.ndarray  # (T, K) mixture weights
    membership_labels: np.ndarray  # (T, n) labels in 1..K
    id_raw: np.ndarray  # (T, K) per-component dimensions
    config: HidalgoConfig
    elapsed: float
    n_obs: int
    removed_duplicates: int = 0

    def validate(self) -> None:
        cfg = self.config
        want_t = cfg.nsim // cfg.thinning
        if self.cluster_prob.shape != (want_t, cfg.K):
            raise ValueError("cluster_prob has wrong shape")
        if np.any(self.cluster_prob < 0.0) or np.any(
            np.abs(self.cluster_prob.sum(axis=1) - 1.0) > 1e-12
        ):
            raise ValueError("cluster_prob rows must be simplex points")
        if self.membership_labels.min() < 1 or self.membership_labels.max() > cfg.K:
            raise ValueError("membership labels must lie in 1..K")
        if np.any(self.id_raw <= 0.0):
            raise ValueError("component dimensions must be positive")
        if cfg.prior_type is not PriorType.CONJUGATE and np.any(
            self.id_raw > cfg.D + 1e-12
        ):
            raise ValueError("truncated prior violated: d exceeds D")


@dataclass
class SamplerState:
    """One Gibbs state: labels (1..K), component dims, mixture weights."""

    z: np.ndarray
    d: np.ndarray
    pi: np.ndarray


def log_likelihood_term(mu_i: float, d: float) -> float:
    """log of the Pareto(1, d) kernel at mu_i: log d - (d+1) log mu_i."""
    if mu_i < 1.0 or d <= 0.0:
        raise ValueError("need mu_i >= 1 and d > 0")
    return math.log(d) - (d + 1.0) * math.log(mu_i)


def _log_norm_z(zeta: float, size: int, n: int, q: int) -> float:
    """log Z(zeta, size): normalizer of the q-neighbor-choice mass for a point
    in a component of ``size`` members (itself included), out of n points."""
    m_lo = max(0, q - (n - size))
    m_hi = min(q, size - 1)
    if m_hi < m_lo:
        raise ValueError("impossible neighbor configuration (is q <= n-1?)")
    log_same = math.log1p(-zeta)
    log_diff = math.log(zeta)
    terms = np.empty(m_hi - m_lo + 1)
    for idx, m in enumerate(range(m_lo, m_hi + 1)):
        terms[idx] = (
            _log_choose(size - 1, m)
            + _log_choose(n - size, q - m)
            + m * log_same
            + (q - m) * log_diff
        )
    return float(logsumexp(terms))


def _log_choose(n: int, k: int) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def neighborhood_norm_Z(zeta: float, N_k: int, n: int, q: int) -> float:
    """Normalizing constant Z(zeta, N_k) of the neighbor-choice likelihood.

    ``zeta`` is the cross-component neighbor probability (the same-component
    probability is 1 - zeta). ``N_k`` is the component size including the
    point itself; a size of 0 returns 1 by convention (such a factor only
    ever appears with exponent zero).
    """
    if not 0.0 < zeta <= 0.5:
        raise ValueError("zeta must lie in (0, 0.5]")
    if not 0 <= N_k <= n:
        raise ValueError("component size must lie in 0..n")
    if not 1 <= q <= n - 1:
        raise ValueError("need 1 <= q <= n-1")
    if N_k == 0:
        return 1.0
    return math.exp(_log_norm_z(zeta, N_k, n, q))


def _log_z_table(zeta: float, n: int, q: int) -> np.ndarray:
    table = np.zeros(n + 1)
    for size in range(1, n + 1):
        table[size] = _log_norm_z(zeta, size, n, q)
    return table


def _weights_from_counts(counts: np.ndarray, alpha: float, rng) -> np.ndarray:
    draws = rng.gamma(alpha + counts)
    return draws / draws.sum()


def sample_weights(z: np.ndarray, alpha: float, K: int, rng) -> np.ndarray:
    """Mixture weights from Dirichlet(alpha + n_1, ..., alpha + n_K), via
    normalized Gamma draws. ``z`` holds labels in 1..K (may be empty)."""
    z = np.asarray(z, dtype=np.int64)
    if z.size and (z.min() < 1 or z.max() > K):
        raise ValueError("labels must lie in 1..K")
    counts = np.bincount(z - 1, minlength=K) if z.size else np.zeros(K, dtype=np.int64)
    return _weights_from_counts(counts, alpha, rng)


def membership_log_weights(
    i: int,
    z: np.ndarray,
    d: np.ndarray,
    pi: np.ndarray,
    mus: np.ndarray,
    adjacency: np.ndarray,
    zeta0: float,
    zeta1: float,
    q: int,
) -> np.ndarray:
    """Unnormalized log full-conditional over the K candidate labels of point i.

    For candidate component k with N_k members among the other points,
    n_in + m_in same-component neighbor links, and Z the neighbor-choice
    normalizer:

        log pi_k + log d_k - (d_k + 1) log mu_i
        + (n_in + m_in) log(zeta1/zeta0)
        - log Z(N_k + 1) + N_k [log Z(N_k) - log Z(N_k + 1)]

    ``z`` holds 1-based labels; entry i is ignored.
    """
    z0 = np.asarray(z, dtype=np.int64) - 1
    nk = d.shape[0]
    n = z0.shape[0]
    counts = np.bincount(z0, minlength=nk)
    counts[z0[i]] -= 1
    out_mask = adjacency[i] == 1
    in_mask = adjacency[:, i] == 1
    nbr = np.bincount(z0[out_mask], minlength=nk) + np.bincount(
        z0[in_mask], minlength=nk
    )
    log_ratio = math.log(zeta1) - math.log(zeta0)
    logz = np.zeros(n + 1)
    needed = np.unique(np.concatenate([counts, counts + 1]))
    for size in needed:
        if size >= 1:
            logz[size] = _log_norm_z(zeta0, int(size), n, q)
    return (
        np.log(pi)
        + np.log(d)
        - (d + 1.0) * math.log(mus[i])
        + log_ratio * nbr
        - logz[counts + 1]
        + counts * (logz[counts] - logz[counts + 1])
    )


def membership_probabilities(
    i: int,
    state: SamplerState,
    mus: np.ndarray,
    adjacency: np.ndarray,
    config: HidalgoConfig,
) -> np.ndarray:
    """Normalized full-conditional label probabilities for point i."""
    logw = membership_log_weights(
        i,
        state.z,
        state.d,
        state.pi,
        mus,
        adjacency,
        zeta0=1.0 - config.xi,
        zeta1=config.xi,
        q=config.q,
    )
    w = np.exp(logw - logsumexp(logw))
    return w / w.sum()


def sample_membership(
    i: int,
    state: SamplerState,
    mus: np.ndarray,
    adjacency: np.ndarray,
    config: HidalgoConfig,
    rng,
) -> int:
    """One draw of the label of point i (1-based), by inverse CDF."""
    probs = membership_probabilities(i, state, mus, adjacency, config)
    u = rng.random()
    label = int(np.searchsorted(np.cumsum(probs), u * probs.sum(), side="right"))
    return min(label, probs.size - 1) + 1


def _draw_component_dim(n_k: int, s_k: float, config: HidalgoConfig, rng) -> float:
    """Dimension draw for one component given its size and sum of log ratios."""
    a_star = config.a0_d + n_k
    b_star = config.b0_d + s_k
    if config.prior_type is PriorType.CONJUGATE:
        return float(rng.gamma(a_star, 1.0 / b_star))
    if config.prior_type is PriorType.TRUNCATED:
        return trunc_gamma_ppf(rng.random(), a_star, b_star, float(config.D))
    # truncated with point mass at D: compare the two unnormalized posterior
    # masses in log space (the shared factor exp(-s_k) cancels)
    upper = float(config.D)
    log_w_cont = (
        math.log1p(-config.pi_mass)
        + log_trunc_gamma_norm(a_star, b_star, upper)
        - log_trunc_gamma_norm(config.a0_d, config.b0_d, upper)
    )
    log_w_point = math.log(config.pi_mass) + n_k * math.log(upper) - upper * s_k
    p_point = math.exp(log_w_point - np.logaddexp(log_w_point, log_w_cont))
    if rng.random() < p_point:
        return upper
    return trunc_gamma_ppf(rng.random(), a_star, b_star, upper)


def sample_d(k: int, z: np.ndarray, mus: np.ndarray, config: HidalgoConfig, rng) -> float:
    """Dimension draw for component k (1-based) given labels and ratios."""
    z = np.asarray(z, dtype=np.int64)
    members = z == k
    n_k = int(members.sum())
    s_k = float(np.log(mus[members]).sum()) if n_k else 0.0
    return _draw_component_dim(n_k, s_k, config, rng)


def _in_neighbor_csr(adjacency: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CSR lists of in-neighbors: for each j, the points that have j among
    their q nearest neighbors."""
    targets, sources = np.nonzero(adjacency.T)
    counts = np.zeros(adjacency.shape[0] + 1, dtype=np.int64)
    np.add.at(counts, targets + 1, 1)
    return np.cumsum(counts), sources.astype(np.int64)


def run_hidalgo(
    X=None,
    dist_mat: np.ndarray | None = None,
    config: HidalgoConfig | None = None,
    metric: "Metric | str" = Metric.EUCLIDEAN,
    verbose: bool = False,
) -> HidalgoChains:
    """Fit the mixture by Gibbs sampling and return the raw retained chains.

    Ratios and the q-adjacency matrix are computed internally from ``X`` (or
    a precomputed ``dist_mat``, which takes precedence). Labels are
    initialized uniformly at random, dimensions and weights from their
    priors; each sweep resamples weights, then every label in index order
    (sequential scan against the partially updated labels), then every
    component dimension. Identical config and seed give bit-identical chains
    for a fixed kernel backend.
    """
    config = HidalgoConfig() if config is None else config
    config.validate()
    ratios = compute_mus(
        X, dist_mat, metric=metric, n1=1, n2=2, with_adjacency=True, q=config.q
    )
    chains = _run_from_ratios(ratios, config, verbose=verbose)
    return chains


def _run_from_ratios(
    ratios: RatioSet, config: HidalgoConfig, verbose: bool = False
) -> HidalgoChains:
    start = time.perf_counter()
    mus = ratios.mus
    n = mus.size
    kdim = config.K
    log_mu = np.log(mus)
    _, nbr_cols = np.nonzero(ratios.adjacency)
    out_nbr = np.ascontiguousarray(nbr_cols.reshape(n, config.q), dtype=np.int64)
    in_indptr, in_index = _in_neighbor_csr(ratios.adjacency)
    zeta0 = 1.0 - config.xi
    log_z_table = _log_z_table(zeta0, n, config.q)
    log_zeta_ratio = math.log(config.xi) - math.log(zeta0)

    rng = np.random.default_rng(config.seed)
    z = rng.integers(0, kdim, size=n).astype(np.int64)
    counts = np.bincount(z, minlength=kdim).astype(np.int64)
    d = np.array([_draw_component_dim(0, 0.0, config, rng) for _ in range(kdim)])
    pi = _weights_from_counts(np.zeros(kdim, dtype=np.int64), config.alpha_dirichlet, rng)

    total = config.burn_in + config.nsim
    keep = config.nsim // config.thinning
    cluster_prob = np.empty((keep, kdim))
    membership = np.empty((keep, n), dtype=np.int64)
    id_raw = np.empty((keep, kdim))
    row = 0
    report_every = max(1, total // 10)
    for sweep in range(total):
        pi = _weights_from_counts(counts, config.alpha_dirichlet, rng)
        uniforms = rng.random(n)
        _kernels.gibbs_label_sweep(
            z,
            counts,
            d,
            np.log(pi),
            log_mu,
            out_nbr,
            in_indptr,
            in_index,
            log_z_table,
            log_zeta_ratio,
            uniforms,
        )
        s_k = np.bincount(z, weights=log_mu, minlength=kdim)
        for k in range(kdim):
            d[k] = _draw_component_dim(int(counts[k]), float(s_k[k]), config, rng)
        done = sweep - config.burn_in + 1
        if done >= 1 and done % config.thinning == 0:
            cluster_prob[row] = pi
            membership[row] = z + 1
            id_raw[row] = d
            row += 1
        if verbose and (sweep + 1) % report_every == 0:
            print(f"sweep {sweep + 1}/{total}", file=sys.stderr)

    elapsed = time.perf_counter() - start
    return HidalgoChains(
        cluster_prob=cluster_prob,
        membership_labels=membership,
        id_raw=id_raw,
        config=replace(config),
        elapsed=elapsed,
        n_obs=n,
        removed_duplicates=ratios.removed_duplicates,
    )


def report(chains: HidalgoChains) -> str:
    """Human-readable run summary."""
    cfg = chains.config
    prior_names = {
        PriorType.CONJUGATE: "Conjugate",
        PriorType.TRUNCATED: "Truncated",
        PriorType.TRUNCATED_POINTMASS: "Truncated_PointMass",
    }
    prior_line = (
        f"Prior d ~ Gamma({cfg.a0_d:g}, {cfg.b0_d:g}), "
        f"type = {prior_names[cfg.prior_type]}"
    )
    if cfg.prior_type is not PriorType.CONJUGATE:
        prior_line += f", D = {cfg.D}"
    return "\n".join(
        [
            "Model: Hidalgo",
            "Method: Bayesian Estimation",
            prior_line,
            f"Prior on mixture weights: Dirichlet({cfg.alpha_dirichlet:g}) "
            f"with {cfg.K} mixture components",
            "MCMC details:",
            f"Total iterations: {cfg.burn_in + cfg.nsim}, Burn in: {cfg.burn_in}, "
            f"Elapsed time: {chains.elapsed:.4f} secs",
        ]
    )
