"""Varying-coefficient regional quantile regression with a KNN fused-Lasso
penalty: ADMM solver, BIC path selection, KNN-average prediction, synthetic
data generation, evaluation metrics, and an exact LP oracle for small
instances."""

from .admm import AdmmState, FitResult, beta_update, dual_update, fit
from .data import CoefMatrix, Dataset, SolverConfig, standardize, validate
from .graph import KnnGraph, apply_H, apply_Ht, build_knn_graph
from .loss import ObjectiveValue, check_loss, objective
from .metrics import mse, msd, pair_confusion
from .path import PathResult, bic, lambda_path
from .predict import CoefGrid, eval_grid, predict_coef, predict_quantile
from .prox import ProxResult, graph_fused_prox, prox_batch
from .simulate import SimSpec, generate, true_coef

__all__ = [
    "AdmmState", "CoefGrid", "CoefMatrix", "Dataset", "FitResult", "KnnGraph",
    "ObjectiveValue", "PathResult", "ProxResult", "SimSpec", "SolverConfig",
    "apply_H", "apply_Ht", "beta_update", "bic", "build_knn_graph",
    "check_loss", "dual_update", "eval_grid", "fit", "generate",
    "graph_fused_prox", "lambda_path", "mse", "msd", "objective",
    "pair_confusion", "predict_coef", "predict_quantile", "prox_batch",
    "standardize", "true_coef", "validate",
]
