"""KNN-average evaluation of fitted coefficient surfaces at new (t, tau) points."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .graph import knn_indices


@dataclass(frozen=True)
class CoefGrid:
    """Coefficient surface on a (t, tau) product grid, shape (|t|, |tau|, p)."""

    t_grid: np.ndarray
    tau_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t_grid", np.asarray(self.t_grid, dtype=np.float64))
        object.__setattr__(self, "tau_grid", np.asarray(self.tau_grid, dtype=np.float64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def default_grids():
    """The 100-by-90 evaluation grid: t = 0.01k, tau = 0.05 + 0.01l."""
    t_grid = 0.01 * np.arange(1, 101)
    tau_grid = 0.05 + 0.01 * np.arange(1, 91)
    return t_grid, tau_grid


def predict_coef(beta_hat, train_points, query, K, axis_weights=(1.0, 1.0)) -> np.ndarray:
    """Mean coefficient row over the K training points nearest to the query.

    Uses the same metric and lower-index tie-break as the training graph.
    """
    beta = np.atleast_2d(np.asarray(beta_hat, dtype=np.float64))
    pts = np.asarray(train_points, dtype=np.float64)
    if pts.shape[0] == 0:
        raise ValueError("empty training set")
    if K > pts.shape[0]:
        raise ValueError("K=%d exceeds number of training points %d" % (K, pts.shape[0]))
    idx = knn_indices(pts, np.asarray(query, dtype=np.float64)[None, :], K,
                      axis_weights=axis_weights)[0]
    return beta[idx].mean(axis=0)


def predict_quantile(beta_hat, train_points, x, query, K, axis_weights=(1.0, 1.0)) -> float:
    """Predicted conditional quantile x . beta_hat(t, tau)."""
    x = np.asarray(x, dtype=np.float64)
    coef = predict_coef(beta_hat, train_points, query, K, axis_weights)
    if x.shape[0] != coef.shape[0]:
        raise ValueError("x length %d != p %d" % (x.shape[0], coef.shape[0]))
    return float(x @ coef)


def eval_grid(beta_hat, train_points, t_grid, tau_grid, K,
              axis_weights=(1.0, 1.0), chunk=2048) -> CoefGrid:
    """Evaluate predict_coef on the full (t, tau) product grid."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    tau_grid = np.asarray(tau_grid, dtype=np.float64)
    if t_grid.size == 0 or tau_grid.size == 0:
        raise ValueError("empty evaluation grid")
    beta = np.atleast_2d(np.asarray(beta_hat, dtype=np.float64))
    pts = np.asarray(train_points, dtype=np.float64)
    tt, ss = np.meshgrid(t_grid, tau_grid, indexing="ij")
    queries = np.column_stack([tt.ravel(), ss.ravel()])
    out = np.empty((queries.shape[0], beta.shape[1]))
    for start in range(0, queries.shape[0], chunk):
        q = queries[start:start + chunk]
        idx = knn_indices(pts, q, K, axis_weights=axis_weights)
        out[start:start + chunk] = beta[idx].mean(axis=1)
    return CoefGrid(t_grid=t_grid, tau_grid=tau_grid,
                    values=out.reshape(t_grid.size, tau_grid.size, beta.shape[1]))


def write_grid_csv(path, grid: CoefGrid) -> None:
    """Export schema ``t,tau,j,beta_hat`` (1-based j), consumed by the plot tool."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "tau", "j", "beta_hat"])
        for a, t in enumerate(grid.t_grid):
            for b, tau in enumerate(grid.tau_grid):
                for j in range(grid.values.shape[2]):
                    writer.writerow(["%.17g" % t, "%.17g" % tau, j + 1,
                                     "%.17g" % grid.values[a, b, j]])


def read_grid_csv(path) -> CoefGrid:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((float(row["t"]), float(row["tau"]), int(row["j"]),
                         float(row["beta_hat"])))
    if not rows:
        raise ValueError("%s: empty grid" % path)
    t_grid = np.unique([r[0] for r in rows])
    tau_grid = np.unique([r[1] for r in rows])
    p = max(r[2] for r in rows)
    values = np.full((t_grid.size, tau_grid.size, p), np.nan)
    ti = {v: i for i, v in enumerate(t_grid)}
    si = {v: i for i, v in enumerate(tau_grid)}
    for t, tau, j, v in rows:
        values[ti[t], si[tau], j - 1] = v
    if np.isnan(values).any():
        raise ValueError("%s: incomplete grid" % path)
    return CoefGrid(t_grid=t_grid, tau_grid=tau_grid, values=values)
