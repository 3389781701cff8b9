"""Homogeneous intrinsic-dimension estimation from second-to-first NN ratios.

Three inference routes over the same Pareto(1, d) model for mu = r2/r1:
a no-intercept least-squares fit of the linearized CDF, the (unbiased)
maximum-likelihood estimator with its Inverse-Gamma interval, and conjugate
Gamma-posterior Bayes. All three trim a proportion of the largest ratios
first, since extreme ratios are the ones violating local homogeneity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import gammaincinv
from scipy.stats import t as student_t

from ._gamma import gamma_logpdf, gamma_quantile, invgamma_quantile


@dataclass
class TwoNNFit:
    """Point estimate plus interval for a homogeneous intrinsic dimension.

    ``alpha`` is the confidence level for linfit/mle and the credible mass
    for bayes. ``extras`` carries method-specific material (fitted points and
    slope SE for linfit; posterior shape/rate, mean/median/mode, and a density
    grid for bayes).
    """

    method: str
    estimate: float
    lower: float
    upper: float
    alpha: float
    c_trimmed: float
    n_original: int
    n_used: int
    extras: dict[str, Any] = field(default_factory=dict)


def trim(mus: np.ndarray, c_trimmed: float) -> np.ndarray:
    """Drop the floor(n * c_trimmed) largest ratios, keeping original order.

    Ties at the cutoff drop the higher-index occurrences (stable sort).
    """
    if not 0.0 <= c_trimmed < 1.0:
        raise ValueError(f"c_trimmed must be in [0,1), got {c_trimmed}")
    mus = np.asarray(mus, dtype=np.float64)
    n = mus.size
    # tiny epsilon so decimal-intent products like 10*0.3 do not floor to 2
    n_drop = int(math.floor(n * c_trimmed + 1e-9))
    if n_drop == 0:
        kept = mus.copy()
    else:
        order = np.argsort(mus, kind="stable")
        keep = np.sort(order[: n - n_drop])
        kept = mus[keep]
    if kept.size < 3:
        raise ValueError(
            f"trimming c={c_trimmed} leaves {kept.size} < 3 ratios"
        )
    return kept


def _check_mus(mus: np.ndarray) -> np.ndarray:
    mus = np.asarray(mus, dtype=np.float64)
    if not np.all(np.isfinite(mus)):
        raise ValueError("mu ratios must be finite")
    if np.any(mus < 1.0):
        raise ValueError("mu ratios must be >= 1")
    return mus


def twonn_linfit(
    mus: np.ndarray, alpha: float = 0.95, c_trimmed: float = 0.01
) -> TwoNNFit:
    """Least-squares estimate from the linearized Pareto CDF.

    The trimmed ratios are sorted ascending; with the plotting positions
    F_i = i / (n+1), the points x_i = log(mu_(i)), y_i = -log(1 - F_i) lie on
    a line through the origin with slope d. The interval is the no-intercept
    OLS slope CI at the given confidence level.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    mus = _check_mus(mus)
    kept = trim(mus, c_trimmed)
    if kept.min() == kept.max():
        raise ValueError("all ratios equal: slope of the linearized CDF is undefined")
    n = kept.size
    x = np.log(np.sort(kept))
    y = -np.log1p(-np.arange(1, n + 1) / (n + 1.0))
    sxx = float(x @ x)
    slope = float(x @ y) / sxx
    resid = y - slope * x
    se = math.sqrt(float(resid @ resid) / ((n - 1) * sxx))
    halfwidth = float(student_t.ppf(0.5 * (1.0 + alpha), n - 1)) * se
    return TwoNNFit(
        method="linfit",
        estimate=slope,
        lower=slope - halfwidth,
        upper=slope + halfwidth,
        alpha=alpha,
        c_trimmed=c_trimmed,
        n_original=mus.size,
        n_used=n,
        extras={"x": x, "y": y, "slope_se": se},
    )


def twonn_mle(
    mus: np.ndarray,
    alpha: float = 0.95,
    c_trimmed: float = 0.01,
    unbiased: bool = True,
) -> TwoNNFit:
    """Maximum-likelihood estimate (n-1)/sum(log mu) with exact CI.

    The interval divides the estimate by Inverse-Gamma(shape n, scale n-1)
    quantiles; with ``unbiased=False`` the numerator is n instead of n-1.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    mus = _check_mus(mus)
    kept = trim(mus, c_trimmed)
    n = kept.size
    log_sum = float(np.log(kept).sum())
    if log_sum == 0.0:
        raise ValueError("all ratios equal 1: likelihood has no maximizer")
    estimate = (n - 1.0) / log_sum if unbiased else n / log_sum
    lower = estimate / invgamma_quantile(0.5 * (1.0 + alpha), n, n - 1.0)
    upper = estimate / invgamma_quantile(0.5 * (1.0 - alpha), n, n - 1.0)
    return TwoNNFit(
        method="mle",
        estimate=estimate,
        lower=lower,
        upper=upper,
        alpha=alpha,
        c_trimmed=c_trimmed,
        n_original=mus.size,
        n_used=n,
        extras={"unbiased": unbiased, "log_sum": log_sum},
    )


def twonn_bayes(
    mus: np.ndarray,
    alpha: float = 0.95,
    a_d: float = 0.001,
    b_d: float = 0.001,
    c_trimmed: float = 0.01,
    plot_low: float | None = None,
    plot_upp: float | None = None,
    by: float | None = None,
) -> TwoNNFit:
    """Conjugate Bayes: Gamma(a_d, b_d) prior, Gamma(a_d+n, b_d+S) posterior.

    Returns the posterior mean as the point estimate with an equal-tailed
    credible interval of mass ``alpha``; extras carry mean/median/mode, the
    posterior shape/rate, and a prior/posterior density grid over
    [plot_low, plot_upp] with step ``by`` for plot emission.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if a_d <= 0.0 or b_d <= 0.0:
        raise ValueError("prior shape and rate must be positive")
    mus = _check_mus(mus)
    kept = trim(mus, c_trimmed)
    n = kept.size
    shape = a_d + n
    rate = b_d + float(np.log(kept).sum())
    mean = shape / rate
    median = gamma_quantile(0.5, shape, rate)
    mode = (shape - 1.0) / rate if shape > 1.0 else 0.0
    lower = gamma_quantile(0.5 * (1.0 - alpha), shape, rate)
    upper = gamma_quantile(0.5 * (1.0 + alpha), shape, rate)
    sd = math.sqrt(shape) / rate
    if plot_low is None:
        plot_low = max(mean - 5.0 * sd, 1e-3 * mean)
    if plot_upp is None:
        plot_upp = mean + 5.0 * sd
    if by is None:
        by = (plot_upp - plot_low) / 512.0
    if not (plot_low > 0.0 and plot_upp > plot_low and by > 0.0):
        raise ValueError("density grid needs 0 < plot_low < plot_upp and by > 0")
    grid = np.arange(plot_low, plot_upp + 0.5 * by, by)
    return TwoNNFit(
        method="bayes",
        estimate=mean,
        lower=lower,
        upper=upper,
        alpha=alpha,
        c_trimmed=c_trimmed,
        n_original=mus.size,
        n_used=n,
        extras={
            "shape": shape,
            "rate": rate,
            "mean": mean,
            "median": median,
            "mode": mode,
            "prior_shape": a_d,
            "prior_rate": b_d,
            "grid_d": grid,
            "grid_prior": np.exp(gamma_logpdf(grid, a_d, b_d)),
            "grid_posterior": np.exp(gamma_logpdf(grid, shape, rate)),
        },
    )


def _pipe_table(headers: list[str], values: list[float]) -> str:
    cells = [f"{v:.6f}" for v in values]
    widths = [max(len(h) + 1, len(c) + 1) for h, c in zip(headers, cells)]
    head = "|" + "|".join(h.rjust(w) for h, w in zip(headers, widths)) + "|"
    rule = "|" + "|".join("-" * (w - 1) + ":" for w in widths) + "|"
    body = "|" + "|".join(c.rjust(w) for c, w in zip(cells, widths)) + "|"
    return "\n".join([head, rule, body])


_METHOD_TITLES = {
    "linfit": "Least Square Estimation",
    "mle": "MLE",
    "bayes": "Bayesian Estimation",
}


def report(fit: TwoNNFit) -> str:
    """Human-readable block summarizing a fit."""
    lines = [
        "Model: TWO-NN",
        f"Method: {_METHOD_TITLES[fit.method]}",
        f"Sample size: {fit.n_original}, Obs. used: {fit.n_used}. "
        f"Trimming proportion: {fit.c_trimmed * 100:g}%",
    ]
    if fit.method == "bayes":
        ex = fit.extras
        lines += [
            f"Prior d ~ Gamma({ex['prior_shape']:g}, {ex['prior_rate']:g})",
            f"Credible interval mass: {fit.alpha:g}",
            "Posterior ID estimates:",
            "",
            _pipe_table(
                ["Lower Bound", "Mean", "Median", "Mode", "Upper Bound"],
                [fit.lower, ex["mean"], ex["median"], ex["mode"], fit.upper],
            ),
        ]
    else:
        lines += [
            f"ID estimates (confidence level: {fit.alpha:g})",
            "",
            _pipe_table(
                ["Lower Bound", "Estimate", "Upper Bound"],
                [fit.lower, fit.estimate, fit.upper],
            ),
        ]
    return "\n".join(lines)
