"""Graph fused-lasso proximal operator: exact solver for
min_z (eta/2)||z - b||^2 + lam*||Hz||_1 over a KNN graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import prox_cd
from .graph import KnnGraph

DEFAULT_TOL = 1e-8
MAX_SWEEPS = 2_000_000


@dataclass(frozen=True)
class ProxResult:
    z: np.ndarray
    kkt_residual: float
    iterations: int


def graph_fused_prox(graph: KnnGraph, b, lam, eta=1.0, tol=DEFAULT_TOL,
                     warm_dual=None, max_sweeps=MAX_SWEEPS) -> ProxResult:
    """Minimize (eta/2)||z - b||^2 + lam*||Hz||_1.

    Solved by exact coordinate minimization on the box dual; z is recovered
    as b - (lam/eta)*H^T w, so stationarity holds by construction and the
    returned kkt_residual measures only the sign-consistency defect, bounded
    by tol*eta*(1 + ||b||_inf) on success.

    warm_dual (length |E|, entries in [-1, 1]) warm-starts the dual.
    """
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.shape[0] != graph.n_nodes:
        raise ValueError("b length %d != n_nodes %d" % (b.shape[0], graph.n_nodes))
    if not np.isfinite(b).all():
        raise ValueError("b contains non-finite values")
    if lam < 0 or eta <= 0 or tol <= 0:
        raise ValueError("need lam >= 0, eta > 0, tol > 0")
    if warm_dual is None:
        w = np.zeros(graph.n_edges)
    else:
        w = np.clip(np.asarray(warm_dual, dtype=np.float64), -1.0, 1.0)
    gamma = lam / eta
    scale = 1.0 + float(np.abs(b).max()) if b.size else 1.0
    tol_abs = tol * scale
    z, kkt_g, sweeps = prox_cd(graph.edge_i, graph.edge_k, b, w, gamma,
                               tol_abs, 0.5 * tol_abs, max_sweeps)
    return ProxResult(z=z, kkt_residual=eta * kkt_g, iterations=sweeps)


def prox_batch(graph: KnnGraph, B, lam, eta=1.0, tol=DEFAULT_TOL) -> np.ndarray:
    """Column-wise graph_fused_prox over an n-by-p matrix."""
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    out = np.empty_like(B)
    for j in range(B.shape[1]):
        out[:, j] = graph_fused_prox(graph, B[:, j], lam, eta, tol).z
    return out
