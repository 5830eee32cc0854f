"""Variance-based global sensitivity analysis with single- and
multi-fidelity polynomial chaos expansions on Smolyak sparse grids."""

from .mf import MfConfig, build_mf, build_mf_parts, correction_values
from .models import EvalCache, Model, ModelError, builtin_model, external_model
from .orthopoly import (
    GaussRule,
    Normal,
    PolyFamily,
    Uniform,
    VariableSpec,
    eval_poly,
    gauss_rule,
    norm_sq,
)
from .pce import Expansion, evaluate, evaluate_batch, mean, project, variance
from .sobol import SobolReport, ZeroVarianceError, all_indices, mc_sobol, subset_index, total_indices
from .sparse_grid import growth, level_terms, smolyak_grid, tensor_grid
from .study import (
    ConvergenceRow,
    SchemeSpec,
    decay_report,
    ishigami_analytic,
    prediction_error,
    run_convergence,
    similarity,
    sobol_errors,
)

__version__ = "0.1.0"

__all__ = [
    "MfConfig",
    "build_mf",
    "build_mf_parts",
    "correction_values",
    "EvalCache",
    "Model",
    "ModelError",
    "builtin_model",
    "external_model",
    "GaussRule",
    "Normal",
    "PolyFamily",
    "Uniform",
    "VariableSpec",
    "eval_poly",
    "gauss_rule",
    "norm_sq",
    "Expansion",
    "evaluate",
    "evaluate_batch",
    "mean",
    "project",
    "variance",
    "SobolReport",
    "ZeroVarianceError",
    "all_indices",
    "mc_sobol",
    "subset_index",
    "total_indices",
    "growth",
    "level_terms",
    "smolyak_grid",
    "tensor_grid",
    "ConvergenceRow",
    "SchemeSpec",
    "decay_report",
    "ishigami_analytic",
    "prediction_error",
    "run_convergence",
    "similarity",
    "sobol_errors",
]
