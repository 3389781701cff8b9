"""Intrinsic dimension estimation from nearest-neighbor distance ratios.

Homogeneous estimation (least-squares, MLE, conjugate Bayes over the
Pareto(1, d) ratio model) plus a heterogeneous Bayesian mixture fitted by
Gibbs sampling, with label-switching postprocessing and PSM clustering.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .geometry import (
    Metric,
    PointCloud,
    RatioSet,
    compute_mus,
    deduplicate,
    distance_matrix,
    knn,
    validate_distance_matrix,
)
from .twonn import TwoNNFit, trim, twonn_bayes, twonn_linfit, twonn_mle
from .hidalgo import (
    HidalgoChains,
    HidalgoConfig,
    PriorType,
    SamplerState,
    log_likelihood_term,
    membership_probabilities,
    neighborhood_norm_Z,
    run_hidalgo,
    sample_d,
    sample_membership,
    sample_weights,
)
from .posterior import (
    PosteriorSummary,
    cluster_from_psm,
    fix_label_switching,
    id_by_class,
    nn_distance_profile,
    posterior_similarity,
    postprocess,
    summarize_ids,
)
from .datasets import (
    GeneratorSpec,
    gaussmix,
    generate,
    hypercube,
    pareto_ratios,
    swissroll,
)

__all__ = [
    "Metric",
    "PointCloud",
    "RatioSet",
    "compute_mus",
    "deduplicate",
    "distance_matrix",
    "knn",
    "validate_distance_matrix",
    "TwoNNFit",
    "trim",
    "twonn_bayes",
    "twonn_linfit",
    "twonn_mle",
    "HidalgoChains",
    "HidalgoConfig",
    "PriorType",
    "SamplerState",
    "log_likelihood_term",
    "membership_probabilities",
    "neighborhood_norm_Z",
    "run_hidalgo",
    "sample_d",
    "sample_membership",
    "sample_weights",
    "PosteriorSummary",
    "cluster_from_psm",
    "fix_label_switching",
    "id_by_class",
    "nn_distance_profile",
    "posterior_similarity",
    "postprocess",
    "summarize_ids",
    "GeneratorSpec",
    "gaussmix",
    "generate",
    "hypercube",
    "pareto_ratios",
    "swissroll",
    "backend_name",
    "__version__",
]
