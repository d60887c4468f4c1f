"""Shared builders for the test suite."""

import numpy as np

from quantfuse.data import Dataset
from quantfuse.graph import KnnGraph, build_knn_graph


def random_instance(rng, n=10, p=2, K=2):
    """A small random dataset plus its KNN graph (column 1 is an intercept)."""
    t = rng.uniform(0.0, 1.0, n)
    tau = rng.uniform(0.05, 0.95, n)
    X = rng.standard_normal((n, p))
    X[:, 0] = 1.0
    y = 2.0 * rng.standard_normal(n)
    ds = Dataset(y=y, X=X, t=t, tau=tau)
    return ds, build_knn_graph(ds.points, K)


def random_graph(rng, n, K=None):
    pts = rng.uniform(0.0, 1.0, (n, 2))
    if K is None:
        K = int(rng.integers(1, min(5, n - 1) + 1))
    return build_knn_graph(pts, K)


def dense_H(graph: KnnGraph) -> np.ndarray:
    """The oriented incidence matrix as a dense |E| x n array."""
    H = np.zeros((graph.n_edges, graph.n_nodes))
    H[np.arange(graph.n_edges), graph.edge_i] = 1.0
    H[np.arange(graph.n_edges), graph.edge_k] = -1.0
    return H


def cvxpy_prox(graph, b, lam, eta=1.0):
    """Independent QP solve of min_z (eta/2)||z-b||^2 + lam*||Hz||_1."""
    import cvxpy as cp

    z = cp.Variable(graph.n_nodes)
    H = dense_H(graph)
    obj = 0.5 * eta * cp.sum_squares(z - np.asarray(b)) + lam * cp.norm1(H @ z)
    cp.Problem(cp.Minimize(obj)).solve(
        solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12,
        tol_feas=1e-12)
    return np.asarray(z.value)
