"""Exact LP solver for the penalized objective on small instances.

The piecewise-linear objective admits an exact linear-programming
reformulation: residuals and edge differences are split into nonnegative
parts, and a dense two-phase simplex with Bland's anti-cycling rule solves
it. Test-harness only; desk-scale instances.
"""

from __future__ import annotations

import numpy as np

from .data import CoefMatrix, Dataset
from .graph import KnnGraph

PIVOT_TOL = 1e-9
SIZE_GUARD = 5000


class SimplexError(RuntimeError):
    pass


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _simplex_phase(T, basis, c, tol, max_pivots):
    """Minimize c over the current tableau; Bland's rule throughout."""
    m, ncols = T.shape
    nv = ncols - 1
    for _ in range(max_pivots):
        cb = c[basis]
        reduced = c - cb @ T[:, :nv]
        in_basis = set(basis.tolist())
        entering = -1
        for j in range(nv):
            if reduced[j] < -tol and j not in in_basis:
                entering = j
                break
        if entering < 0:
            return
        # ratio test; ties broken by smallest basis index (Bland)
        best_ratio = np.inf
        best_row = -1
        for i in range(m):
            a = T[i, entering]
            if a > tol:
                ratio = T[i, -1] / a
                if ratio < best_ratio - tol or (
                    abs(ratio - best_ratio) <= tol
                    and (best_row < 0 or basis[i] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            raise SimplexError("unbounded LP")
        _pivot(T, basis, best_row, entering)
    raise SimplexError("pivot limit exceeded")


def simplex_solve(A, b, c, tol=PIVOT_TOL, max_pivots=200_000):
    """Solve min c.x s.t. Ax = b, x >= 0 by the two-phase dense simplex.

    Returns (x, optimum). Raises SimplexError on infeasible/unbounded input.
    """
    A = np.asarray(A, dtype=np.float64).copy()
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    m, nv = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    # phase 1: artificial basis
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = np.arange(nv, nv + m)
    c1 = np.concatenate([np.zeros(nv), np.ones(m)])
    _simplex_phase(T, basis, c1, tol, max_pivots)
    if float(c1[basis] @ T[:, -1]) > 1e-7:
        raise SimplexError("infeasible LP")
    # drive artificials out of the basis or drop redundant rows
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= nv:
            pivot_col = -1
            for j in range(nv):
                if abs(T[i, j]) > tol:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(T, basis, i, pivot_col)
            else:
                keep[i] = False
    T = np.hstack([T[keep][:, :nv], T[keep][:, -1:]])
    basis = basis[keep]
    c2 = np.asarray(c, dtype=np.float64)
    _simplex_phase(T, basis, c2, tol, max_pivots)
    x = np.zeros(nv)
    x[basis] = T[:, -1]
    return x, float(c2 @ x)


def build_lp(dataset: Dataset, graph: KnnGraph, lam: float):
    """Assemble the split-variable LP for the penalized objective.

    Variable layout: [beta+ (np), beta- (np), r+ (n), r- (n), e+ (p|E|),
    e- (p|E|)], beta block ordered covariate-major (j*n + i).
    """
    n, p, E = dataset.n, dataset.p, graph.n_edges
    nfree = n * p
    if nfree + 2 * n + 2 * p * E > SIZE_GUARD:
        raise ValueError(
            "instance too large for the LP oracle: %d variables"
            % (nfree + 2 * n + 2 * p * E)
        )
    nv = 2 * nfree + 2 * n + 2 * p * E
    off_bm = nfree
    off_rp = 2 * nfree
    off_rm = off_rp + n
    off_ep = off_rm + n
    off_em = off_ep + p * E
    m_rows = n + p * E
    A = np.zeros((m_rows, nv))
    b = np.zeros(m_rows)
    for i in range(n):
        for j in range(p):
            A[i, j * n + i] = dataset.X[i, j]
            A[i, off_bm + j * n + i] = -dataset.X[i, j]
        A[i, off_rp + i] = 1.0
        A[i, off_rm + i] = -1.0
        b[i] = dataset.y[i]
    for j in range(p):
        for m in range(E):
            row = n + j * E + m
            i_m, k_m = graph.edge_i[m], graph.edge_k[m]
            A[row, j * n + i_m] += 1.0
            A[row, j * n + k_m] -= 1.0
            A[row, off_bm + j * n + i_m] -= 1.0
            A[row, off_bm + j * n + k_m] += 1.0
            A[row, off_ep + j * E + m] = -1.0
            A[row, off_em + j * E + m] = 1.0
    c = np.zeros(nv)
    c[off_rp:off_rm] = dataset.tau / n
    c[off_rm:off_ep] = (1.0 - dataset.tau) / n
    c[off_ep:] = lam
    return A, b, c


def lp_solve(dataset: Dataset, graph: KnnGraph, lam: float):
    """Exact optimum of the penalized objective. Returns (CoefMatrix, optimum)."""
    A, b, c = build_lp(dataset, graph, lam)
    x, optimum = simplex_solve(A, b, c)
    n, p = dataset.n, dataset.p
    nfree = n * p
    beta = (x[:nfree] - x[nfree:2 * nfree]).reshape(p, n).T
    return CoefMatrix(beta), optimum


def complementarity_residual(dataset: Dataset, graph: KnnGraph, x) -> float:
    """Max componentwise product of the split pairs at a vertex solution."""
    n, p, E = dataset.n, dataset.p, graph.n_edges
    nfree = n * p
    off_rp = 2 * nfree
    rp = x[off_rp:off_rp + n]
    rm = x[off_rp + n:off_rp + 2 * n]
    ep = x[off_rp + 2 * n:off_rp + 2 * n + p * E]
    em = x[off_rp + 2 * n + p * E:]
    res = float(np.max(rp * rm, initial=0.0))
    if p * E:
        res = max(res, float(np.max(ep * em, initial=0.0)))
    return res
