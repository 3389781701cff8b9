"""Gamma-family quantiles and truncated-Gamma helpers.

scipy's regularized incomplete gamma underflows to 0 deep in the lower tail
(P(a, x) for x << a), which the truncated priors can hit at large sample
sizes; ``log_gammainc_lower`` switches to the standard ascending series in
that regime so all mixture-weight arithmetic can stay in log space.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammainc, gammaincinv, gammaln


def gamma_quantile(p: float, shape: float, rate: float) -> float:
    """Quantile of Gamma(shape, rate)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0,1), got {p}")
    return float(gammaincinv(shape, p)) / rate


def gamma_logpdf(x, shape: float, rate: float):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return shape * math.log(rate) - gammaln(shape) + (shape - 1.0) * np.log(x) - rate * x


def invgamma_quantile(p: float, shape: float, scale: float) -> float:
    """Quantile of the Inverse-Gamma via q_IG(p; a, b) = b / q_Gamma(1-p; a, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must be in (0,1), got {p}")
    return scale / float(gammaincinv(shape, 1.0 - p))


def log_gammainc_lower(shape: float, x: float) -> float:
    """log of the regularized lower incomplete gamma P(shape, x), underflow-safe.

    Falls back to the ascending series x^a e^-x / Gamma(a+1) * sum_k prod_j x/(a+j)
    when the direct value underflows; the series converges fast in exactly that
    regime (x well below the shape).
    """
    if x <= 0.0:
        return -math.inf
    direct = float(gammainc(shape, x))
    if direct > 1e-290:
        return math.log(direct)
    total = 1.0
    term = 1.0
    j = 1.0
    while True:
        term *= x / (shape + j)
        total += term
        j += 1.0
        if term < total * 1e-18 or j > 10_000:
            break
    return shape * math.log(x) - x - float(gammaln(shape + 1.0)) + math.log(total)


def log_trunc_gamma_norm(shape: float, rate: float, upper: float) -> float:
    """log normalizing constant of Gamma(shape, rate) truncated to (0, upper]:
    log integral_0^upper x^(shape-1) e^(-rate x) dx."""
    return (
        float(gammaln(shape))
        - shape * math.log(rate)
        + log_gammainc_lower(shape, rate * upper)
    )


def trunc_gamma_ppf(p: float, shape: float, rate: float, upper: float) -> float:
    """Inverse CDF of Gamma(shape, rate) restricted to (0, upper].

    Maps the uniform level into [0, F(upper)] and inverts the incomplete
    gamma. When F(upper) underflows double precision, essentially all
    conditional mass hugs the upper bound and the density there is within
    rounding of a tilted exponential exp(-lam*(upper-x)); that inverse is
    used instead.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"level must be in [0,1], got {p}")
    mass = float(gammainc(shape, rate * upper))
    if mass > 1e-290:
        x = float(gammaincinv(shape, p * mass)) / rate
        return min(max(x, np.nextafter(0.0, 1.0)), upper)
    # F(upper) underflows only when the untruncated mode (shape-1)/rate sits
    # far above the bound, so the tilt rate below is strictly positive there.
    lam = (shape - 1.0) / upper - rate
    if lam <= 0.0:
        lam = 1.0 / upper
    x = upper + math.log(max(p, np.nextafter(0.0, 1.0))) / lam
    return min(max(x, np.nextafter(0.0, 1.0)), upper)
