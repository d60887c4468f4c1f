"""ADMM driver for the fused-lasso regional quantile objective.

The solver alternates a per-sample closed-form loss block, a per-covariate
graph fused prox, and a dual ascent step. The hot loop lives in a compiled
kernel; the block updates are also exposed as plain numpy functions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import admm_loop, prox_cd
from .data import CoefMatrix, Dataset, SolverConfig, validate
from .graph import KnnGraph, apply_H, apply_Ht
from .loss import ObjectiveValue, objective


def default_tolerance(y) -> float:
    return 1e-6 * (1.0 + float(np.abs(y).max()))


def default_fuse_eps(beta_values) -> float:
    return 1e-6 * (1.0 + float(np.abs(beta_values).max(initial=0.0)))


@dataclass(frozen=True)
class AdmmState:
    """Solver state after an iteration; all matrices are n-by-p."""

    beta: CoefMatrix
    z: CoefMatrix
    u: CoefMatrix
    iter: int
    primal_res: float
    dual_res: float


@dataclass(frozen=True)
class FitResult:
    beta_hat: CoefMatrix          # the consensus (z) copy at termination
    lam: float
    objective: ObjectiveValue
    converged: bool
    iters: int
    support: list                 # per covariate: edge ids with |H beta_j| > fuse_eps
    fuse_eps: float
    primal_res: float = 0.0
    dual_res: float = 0.0
    v: np.ndarray | None = None   # per-sample loss subgradients at termination
    w: np.ndarray | None = None   # (p, |E|) prox dual variables at termination
    zero_design_rows: int = 0
    state: tuple | None = field(default=None, repr=False)  # (B, Z, U, W), covariate-major

    @property
    def support_total(self) -> int:
        return sum(len(s) for s in self.support)


def beta_update(dataset: Dataset, z: CoefMatrix, u: CoefMatrix, eta: float) -> CoefMatrix:
    """Closed-form minimizer of the loss block, sample by sample.

    With w = z_i - u_i, g = x_i.w - y_i and s = x_i.x_i/eta, the optimal
    subgradient v_i of the check loss is tau_i-1, tau_i, or -g/s depending
    on which side of the interpolation interval g falls, and
    beta_i = w + v_i*x_i/eta. Rows with x_i = 0 return w unchanged.
    """
    X, y, tau = dataset.X, dataset.y, dataset.tau
    W = z.values - u.values
    g = (X * W).sum(axis=1) - y
    s = (X * X).sum(axis=1) / eta
    with np.errstate(divide="ignore", invalid="ignore"):
        v_mid = np.where(s > 0, -g / np.where(s > 0, s, 1.0), 0.0)
    v = np.where(g > (1.0 - tau) * s, tau - 1.0, np.where(g < -tau * s, tau, v_mid))
    v = np.where(s == 0, 0.0, v)
    return CoefMatrix(W + (v / eta)[:, None] * X)


def dual_update(u: CoefMatrix, beta: CoefMatrix, z: CoefMatrix, eta: float) -> CoefMatrix:
    """u <- u + eta*(beta - z)."""
    return CoefMatrix(u.values + eta * (beta.values - z.values))


def extract_support(graph: KnnGraph, beta_values, fuse_eps):
    """Edge indices with a fused difference above fuse_eps, per covariate."""
    return [
        np.flatnonzero(np.abs(apply_H(graph, beta_values[:, j])) > fuse_eps)
        for j in range(beta_values.shape[1])
    ]


def fit(dataset: Dataset, graph: KnnGraph, config: SolverConfig,
        warm_start: AdmmState | None = None) -> FitResult:
    """Solve the penalized objective at config.lam.

    The internal ADMM works on the unaveraged loss, so the penalty weight
    handed to the prox is n*lam; reported objectives use the averaged
    convention throughout. Starts from zero (or warm_start) and stops when
    both residuals drop below tolerance; non-convergence is reported via
    the converged flag, never raised.
    """
    validate(dataset)
    if not config.K < dataset.n:
        raise ValueError("K=%d must be < n=%d" % (config.K, dataset.n))
    n, p = dataset.n, dataset.p
    tol_p = config.tol_primal if config.tol_primal is not None else default_tolerance(dataset.y)
    tol_d = config.tol_dual if config.tol_dual is not None else default_tolerance(dataset.y)
    lam_int = dataset.n * config.lam

    if warm_start is None:
        B = np.zeros((p, n))
        Z = np.zeros((p, n))
        U = np.zeros((p, n))
        W = np.zeros((p, graph.n_edges))
    elif isinstance(warm_start, tuple):
        B, Z, U, W = (np.ascontiguousarray(a).copy() for a in warm_start)
    else:
        B = np.ascontiguousarray(warm_start.beta.values.T).copy()
        Z = np.ascontiguousarray(warm_start.z.values.T).copy()
        U = np.ascontiguousarray(warm_start.u.values.T).copy()
        W = np.zeros((p, graph.n_edges))
    v = np.zeros(n)
    X = np.ascontiguousarray(dataset.X)

    inner_floor = 0.1 * min(tol_p, tol_d)
    iters, primal, dual = admm_loop(
        X, dataset.y, dataset.tau, graph.edge_i, graph.edge_k,
        lam_int, config.eta, tol_p, tol_d, config.max_iter,
        B, Z, U, W, v, inner_floor, 0.02, 100_000,
    )
    converged = bool(primal <= tol_p and dual <= tol_d)
    # polish the reported z-copy: re-solve each prox subproblem to a tight
    # tolerance so fused differences in beta_hat are exact zeros rather than
    # loose-inner-iteration noise
    if lam_int > 0 and graph.n_edges > 0:
        gamma = lam_int / config.eta
        for j in range(p):
            b_col = B[j] + U[j]
            polish_tol = 1e-8 * (1.0 + float(np.abs(b_col).max()))
            Z[j], _, _ = prox_cd(graph.edge_i, graph.edge_k, b_col, W[j],
                                 gamma, polish_tol, 0.5 * polish_tol, 50_000)
    beta_hat = Z.T.copy()
    fuse_eps = config.fuse_eps if config.fuse_eps is not None else default_fuse_eps(beta_hat)
    support = extract_support(graph, beta_hat, fuse_eps)
    obj = objective(dataset, CoefMatrix(beta_hat), graph, config.lam)
    zero_rows = int(np.count_nonzero((dataset.X == 0).all(axis=1)))
    return FitResult(
        beta_hat=CoefMatrix(beta_hat), lam=config.lam, objective=obj,
        converged=converged, iters=int(iters), support=support, fuse_eps=fuse_eps,
        primal_res=float(primal), dual_res=float(dual), v=v, w=W,
        zero_design_rows=zero_rows, state=(B, Z, U, W),
    )


def state_from_fit(fit_result: FitResult, dataset: Dataset) -> AdmmState:
    """Rebuild a warm-start state from a finished fit (beta = z copy, u from v)."""
    # At convergence beta ~= z; the dual u is recoverable only approximately,
    # so restart from z for all three blocks and u from the stored duals.
    z = fit_result.beta_hat.values
    u = np.zeros_like(z)
    return AdmmState(beta=CoefMatrix(z.copy()), z=CoefMatrix(z.copy()),
                     u=CoefMatrix(u), iter=fit_result.iters,
                     primal_res=fit_result.primal_res, dual_res=fit_result.dual_res)


def kkt_certificate(dataset: Dataset, graph: KnnGraph, lam: float,
                    fit_result: FitResult) -> float:
    """Max stationarity violation of the averaged objective at the solution,
    assembled from the solver's subgradients v (projected onto the valid
    interval for the actual residual sign) and the prox duals w.
    """
    X, y, tau = dataset.X, dataset.y, dataset.tau
    beta = fit_result.beta_hat.values
    resid = y - (X * beta).sum(axis=1)
    v = fit_result.v.copy()
    # residuals below the solver's own noise floor cannot pin the subgradient
    # to an endpoint; treat them as interpolating
    eps = max(10.0 * (fit_result.primal_res + fit_result.dual_res),
              1e-9 * (1.0 + np.abs(y).max()))
    v = np.where(resid > eps, tau, np.where(resid < -eps, tau - 1.0,
                 np.clip(v, tau - 1.0, tau)))
    worst = 0.0
    for j in range(dataset.p):
        hw = apply_Ht(graph, np.clip(fit_result.w[j], -1.0, 1.0))
        g = -(v * X[:, j]) / dataset.n + lam * hw
        worst = max(worst, float(np.abs(g).max(initial=0.0)))
    return worst


def write_fit_csv(path, dataset: Dataset, fit_result: FitResult) -> None:
    """Long-format export: one row per (sample, covariate)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "t", "tau", "j", "beta"])
        beta = fit_result.beta_hat.values
        for i in range(dataset.n):
            for j in range(dataset.p):
                writer.writerow([
                    i + 1, "%.17g" % dataset.t[i], "%.17g" % dataset.tau[i],
                    j + 1, "%.17g" % beta[i, j],
                ])


def read_fit_csv(path, n, p) -> CoefMatrix:
    beta = np.full((n, p), np.nan)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            beta[int(row["i"]) - 1, int(row["j"]) - 1] = float(row["beta"])
    if np.isnan(beta).any():
        raise ValueError("%s: missing (i, j) entries" % path)
    return CoefMatrix(beta)


def write_manifest(path, fit_result: FitResult, config: SolverConfig) -> None:
    manifest = {
        "lambda": fit_result.lam,
        "eta": config.eta,
        "k": config.K,
        "iters": fit_result.iters,
        "converged": fit_result.converged,
        "loss": fit_result.objective.loss,
        "penalty": fit_result.objective.penalty,
        "support_total": fit_result.support_total,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
