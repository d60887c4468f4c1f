"""Compiled numerical kernels: dual coordinate descent for the graph fused
prox and the ADMM iteration loop.

All kernels are single-threaded and run a fixed deterministic sweep order,
so results are bit-identical across runs and worker-count settings.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def kkt_residual_gamma(ei, ek, z, w, gamma, zero_thr, n):
    """Residual gamma * ||H^T (w* - w)||_inf, where w* pins the sign of each
    non-fused edge difference and keeps w on fused edges."""
    g = np.zeros(n)
    for m in range(ei.shape[0]):
        hz = z[ei[m]] - z[ek[m]]
        if hz > zero_thr:
            ws = 1.0
        elif hz < -zero_thr:
            ws = -1.0
        else:
            ws = w[m]
        dm = ws - w[m]
        if dm != 0.0:
            g[ei[m]] += dm
            g[ek[m]] -= dm
    r = 0.0
    for i in range(n):
        a = abs(g[i])
        if a > r:
            r = a
    return gamma * r


@njit(cache=True)
def prox_cd(ei, ek, b, w, gamma, tol_abs, zero_thr, max_sweeps):
    """Solve min_z 0.5*||z - b||^2 + gamma*||Hz||_1 by exact coordinate
    minimization on the box-constrained dual, warm-started from w (modified
    in place, entries in [-1, 1]).

    Returns (z, kkt_residual, sweeps); the residual is in the scale
    gamma*||H^T(w* - w)||_inf and the solve stops once it is <= tol_abs.
    """
    n = b.shape[0]
    E = ei.shape[0]
    z = b.copy()
    if gamma == 0.0 or E == 0:
        for m in range(E):
            w[m] = 0.0
        return z, 0.0, 0
    for m in range(E):
        gw = gamma * w[m]
        z[ei[m]] -= gw
        z[ek[m]] += gw
    half_inv_gamma = 0.5 / gamma
    sweeps = 0
    kkt = kkt_residual_gamma(ei, ek, z, w, gamma, zero_thr, n)
    while kkt > tol_abs and sweeps < max_sweeps:
        for _ in range(8):
            if sweeps >= max_sweeps:
                break
            max_move = 0.0
            for m in range(E):
                i = ei[m]
                k = ek[m]
                t = w[m] + (z[i] - z[k]) * half_inv_gamma
                if t > 1.0:
                    t = 1.0
                elif t < -1.0:
                    t = -1.0
                d = t - w[m]
                if d != 0.0:
                    w[m] = t
                    gd = gamma * d
                    z[i] -= gd
                    z[k] += gd
                    ad = abs(gd)
                    if ad > max_move:
                        max_move = ad
            sweeps += 1
            if max_move <= 0.05 * tol_abs:
                break
        kkt = kkt_residual_gamma(ei, ek, z, w, gamma, zero_thr, n)
    return z, kkt, sweeps


@njit(cache=True)
def admm_loop(X, y, tau, ei, ek, lam_int, eta, tol_primal, tol_dual, max_iter,
              B, Z, U, W, v, inner_floor, inner_frac, max_inner_sweeps):
    """Run the three-block ADMM iteration until both residuals fall below
    their tolerances or max_iter is reached.

    B, Z, U are (p, n) state matrices (covariate-major), W the (p, |E|) prox
    dual variables, v the per-sample loss subgradients; all are updated in
    place so callers can warm-start. lam_int is the penalty weight on the
    *unaveraged* loss scale. Returns (iters, primal_res, dual_res).
    """
    n = y.shape[0]
    p = X.shape[1]
    gamma = lam_int / eta
    primal = 1e300
    dual = 1e300
    it = 0
    b_col = np.empty(n)
    while it < max_iter:
        it += 1
        # beta block: per-sample closed form from the loss KKT cases
        for i in range(n):
            s = 0.0
            g = -y[i]
            for j in range(p):
                wij = Z[j, i] - U[j, i]
                g += X[i, j] * wij
                s += X[i, j] * X[i, j]
            s /= eta
            if s == 0.0:
                vi = 0.0
            elif g > (1.0 - tau[i]) * s:
                vi = tau[i] - 1.0
            elif g < -tau[i] * s:
                vi = tau[i]
            else:
                vi = -g / s
            v[i] = vi
            for j in range(p):
                B[j, i] = (Z[j, i] - U[j, i]) + vi * X[i, j] / eta
        # z block: fused prox per covariate, warm-started dual CD
        res_prev = primal if primal > dual else dual
        tol_in = inner_frac * res_prev
        if tol_in < inner_floor:
            tol_in = inner_floor
        zero_thr = 0.5 * tol_in
        dual = 0.0
        for j in range(p):
            for i in range(n):
                b_col[i] = B[j, i] + U[j, i]
            zj, _, _ = prox_cd(ei, ek, b_col, W[j], gamma, tol_in, zero_thr,
                               max_inner_sweeps)
            for i in range(n):
                dz = abs(zj[i] - Z[j, i])
                if eta * dz > dual:
                    dual = eta * dz
                Z[j, i] = zj[i]
        # dual ascent and primal residual
        primal = 0.0
        for j in range(p):
            for i in range(n):
                r = B[j, i] - Z[j, i]
                U[j, i] += eta * r
                ar = abs(r)
                if ar > primal:
                    primal = ar
        if primal <= tol_primal and dual <= tol_dual:
            break
        if not (np.isfinite(primal) and np.isfinite(dual)):
            break
    return it, primal, dual
