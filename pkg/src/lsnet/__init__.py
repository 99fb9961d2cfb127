"""Latent space models for undirected binary networks with edge covariates.

Fit logit(P_ij) = alpha_i + alpha_j + beta X_ij + <z_i, z_j> by projected
gradient descent, initialize it by lifted proximal gradient descent, singular
value thresholding or random draws, simulate ground-truth models, score the
estimates, and cluster nodes through the fitted latent vectors.
"""

from .model import (
    AdjacencyMatrix,
    CovariateMatrix,
    ParameterSet,
    assemble_theta,
    gradients,
    logit,
    neg_log_likelihood,
    sigmoid,
)
from .simulate import (
    GroundTruth,
    KernelSpec,
    generate_model,
    indicator_covariate,
    sample_adjacency,
)
from .fitting import FitConfig, FitDivergedError, FitTrace, fit, step_sizes
from .initializers import (
    InitConfig,
    gram_eigenvalues,
    init_lifted_pgd,
    init_random,
    init_usvt,
    initialize,
    psd_project,
)
from .metrics import (
    ErrorReport,
    estimate_lambda,
    estimate_m2,
    et_metric,
    misclustering_rate,
    procrustes_dist,
    relative_errors,
)
from .community import kmeans, lscd
from .experiments import ExperimentSpec, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix",
    "CovariateMatrix",
    "ParameterSet",
    "assemble_theta",
    "gradients",
    "logit",
    "neg_log_likelihood",
    "sigmoid",
    "GroundTruth",
    "KernelSpec",
    "generate_model",
    "indicator_covariate",
    "sample_adjacency",
    "FitConfig",
    "FitDivergedError",
    "FitTrace",
    "fit",
    "step_sizes",
    "InitConfig",
    "gram_eigenvalues",
    "init_lifted_pgd",
    "init_random",
    "init_usvt",
    "initialize",
    "psd_project",
    "ErrorReport",
    "estimate_lambda",
    "estimate_m2",
    "et_metric",
    "misclustering_rate",
    "procrustes_dist",
    "relative_errors",
    "kmeans",
    "lscd",
    "ExperimentSpec",
    "run_experiment",
    "__version__",
]
