"""Seeded synthetic benchmark datasets and the Pareto-ratio oracle sampler.

All generators use numpy's PCG64 stream, so reproduction is exact for a given
(seed, n) within this package and statistical across tools.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCloud

SWISSROLL_TRUE_ID = 2
HYPERCUBE_TRUE_ID = 5
GAUSSMIX_TRUE_IDS = {"A": 1, "B": 3, "C": 5}


def swissroll(n: int, seed: int) -> PointCloud:
    """n points on the swissroll surface (x cos x, y, x sin x), x,y ~ U(0,10)."""
    if n < 3:
        raise ValueError("n must be at least 3")
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 10.0, n)
    y = rng.uniform(0.0, 10.0, n)
    data = np.column_stack([x * np.cos(x), y, x * np.sin(x)])
    return PointCloud(data, ["V1", "V2", "V3"])


def hypercube(n: int, seed: int) -> PointCloud:
    """Uniform 5-cube embedded in 8 dimensions (three zero columns)."""
    if n < 3:
        raise ValueError("n must be at least 3")
    rng = np.random.default_rng(seed)
    data = np.zeros((n, 8))
    data[:, :5] = rng.uniform(size=(n, 5))
    return PointCloud(data, [f"V{j}" for j in range(1, 9)])


def gaussmix(n_per: int = 500, seed: int = 0) -> tuple[PointCloud, np.ndarray]:
    """Three stacked Gaussian components of heterogeneous dimension in R^5.

    Block A is the line (x, 3x, 0, 0, 0) with x ~ N(-5,1); block B is standard
    trivariate normal padded with zeros; block C is N(5, I_5). Returns the
    cloud plus the length-3*n_per label vector ("A", "B", "C").
    """
    if n_per < 1:
        raise ValueError("n_per must be positive")
    rng = np.random.default_rng(seed)
    a0 = rng.normal(-5.0, 1.0, n_per)
    block_a = np.column_stack([a0, 3.0 * a0, np.zeros((n_per, 3))])
    block_b = np.column_stack([rng.normal(size=(n_per, 3)), np.zeros((n_per, 2))])
    block_c = rng.normal(5.0, 1.0, size=(n_per, 5))
    data = np.vstack([block_a, block_b, block_c])
    labels = np.repeat(np.array(["A", "B", "C"]), n_per)
    return PointCloud(data, [f"V{j}" for j in range(1, 6)]), labels


def pareto_ratios(n: int, d: float, seed: int) -> np.ndarray:
    """Inverse-CDF Pareto(1, d) sample: mu = U^(-1/d), U ~ U(0,1)."""
    if d <= 0.0:
        raise ValueError("shape d must be positive")
    rng = np.random.default_rng(seed)
    return rng.random(n) ** (-1.0 / d)


@dataclass
class GeneratorSpec:
    """Declarative request for one synthetic dataset."""

    kind: str  # swissroll | hypercube | gaussmix | pareto
    n: int
    seed: int
    params: dict = field(default_factory=dict)


def generate(spec: GeneratorSpec) -> tuple[PointCloud | np.ndarray, np.ndarray | None]:
    """Dispatch a GeneratorSpec; returns (data, labels-or-None).

    For ``gaussmix`` the ``n`` field is the per-component size. ``pareto``
    returns the raw ratio vector and needs ``params={"d": ...}``.
    """
    kind = spec.kind.strip().lower()
    if kind == "swissroll":
        return swissroll(spec.n, spec.seed), None
    if kind == "hypercube":
        return hypercube(spec.n, spec.seed), None
    if kind == "gaussmix":
        return gaussmix(spec.n, spec.seed)
    if kind == "pareto":
        if "d" not in spec.params:
            raise ValueError("pareto generator needs params={'d': shape}")
        return pareto_ratios(spec.n, float(spec.params["d"]), spec.seed), None
    raise ValueError(f"unknown generator kind {spec.kind!r}")
