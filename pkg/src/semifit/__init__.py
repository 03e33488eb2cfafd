"""semifit: an interpretable linear term plus a learned low-dimensional
kernel-smoothed residual surface, fitted by doubly robust estimating
equations.

The model is Y = x_int^T psi + r(x_uint^T gamma) + noise, where psi is kept
near easily-explained linear coefficients, gamma is a column-orthonormal
projection onto a few learned directions, and r is an unrestricted surface
estimated by kernel regression.
"""

from .core import (
    AChoice,
    Dataset,
    FitConfig,
    FittedModel,
    OptimizerSettings,
    Params,
    Standardizer,
    dataset_from_csv,
    validate_and_standardize,
)
from .benchmark import run_benchmark, split_indices
from .dimension import select_dimension, trace_correlation
from .errors import OptimizerStalled, SemifitError
from .estimator import (
    FreeVector,
    ObjectiveContext,
    a_function,
    dr_probe,
    estimating_residual,
    fit,
    load_model,
    objective,
    reparam_gamma,
    reparam_psi,
    save_model,
    standardized_truth,
)
from .initializers import ols_fit, phd_directions
from .kernel import nw_regress, silverman_bandwidth
from .metrics import projection_distance, rmse
from .prediction import decompose, predict
from .simulate import SimSpec, generate, true_r, true_surface

__version__ = "0.1.0"

__all__ = [
    "AChoice",
    "Dataset",
    "FitConfig",
    "FittedModel",
    "FreeVector",
    "ObjectiveContext",
    "OptimizerSettings",
    "OptimizerStalled",
    "Params",
    "SemifitError",
    "SimSpec",
    "Standardizer",
    "a_function",
    "dataset_from_csv",
    "decompose",
    "dr_probe",
    "estimating_residual",
    "fit",
    "generate",
    "load_model",
    "nw_regress",
    "objective",
    "ols_fit",
    "phd_directions",
    "predict",
    "projection_distance",
    "reparam_gamma",
    "reparam_psi",
    "rmse",
    "run_benchmark",
    "save_model",
    "select_dimension",
    "silverman_bandwidth",
    "split_indices",
    "standardized_truth",
    "trace_correlation",
    "true_r",
    "true_surface",
    "validate_and_standardize",
    "__version__",
]
