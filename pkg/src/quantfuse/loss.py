"""Check loss and the penalized empirical objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CoefMatrix, Dataset
from .graph import KnnGraph, apply_H


@dataclass(frozen=True)
class ObjectiveValue:
    loss: float      # (1/n) sum of check losses
    penalty: float   # lam * sum_j ||H beta_j||_1

    @property
    def total(self) -> float:
        return self.loss + self.penalty


def check_loss(u, tau):
    """Quantile check loss rho_tau(u) = u * (tau - 1{u < 0}).

    Accepts scalars or arrays; tau must lie in (0, 1). At u=0 the value is 0
    and the subgradient is the interval [tau-1, tau].
    """
    tau_arr = np.asarray(tau, dtype=np.float64)
    if np.any((tau_arr <= 0) | (tau_arr >= 1)):
        raise ValueError("tau must lie in (0, 1)")
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u >= 0, tau_arr * u, (tau_arr - 1.0) * u)
    return float(out) if out.ndim == 0 else out


def total_check_loss(dataset: Dataset, beta: CoefMatrix) -> float:
    """Unaveraged sum of check losses of the residuals y - rowwise fit."""
    resid = dataset.y - (dataset.X * beta.values).sum(axis=1)
    return float(np.sum(check_loss(resid, dataset.tau)))


def objective(dataset: Dataset, beta: CoefMatrix, graph: KnnGraph, lam: float) -> ObjectiveValue:
    """Averaged check loss plus lam times the l1 norm of all edge differences."""
    if beta.values.shape != (dataset.n, dataset.p):
        raise ValueError(
            "coefficient shape %s does not match dataset (%d, %d)"
            % (beta.values.shape, dataset.n, dataset.p)
        )
    loss = total_check_loss(dataset, beta) / dataset.n
    penalty = lam * sum(
        float(np.abs(apply_H(graph, beta.values[:, j])).sum()) for j in range(dataset.p)
    )
    return ObjectiveValue(loss=loss, penalty=penalty)
