"""Evaluation metrics: MSE, pairwise cluster confusion, and grid MSD."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import CoefMatrix
from .predict import CoefGrid


@dataclass(frozen=True)
class PairConfusion:
    """Pairwise cluster agreement between an estimated and a true column.

    A pair (i, i') is a positive when the two entries differ. Ratios with an
    empty denominator are None with the matching defined flag False.
    """

    precision: float | None
    recall: float | None
    tnr: float | None
    npv: float | None

    @property
    def defined(self):
        return {
            "precision": self.precision is not None,
            "recall": self.recall is not None,
            "tnr": self.tnr is not None,
            "npv": self.npv is not None,
        }


def mse(est: CoefMatrix, truth: CoefMatrix) -> float:
    """(1/n) * sum of squared entrywise errors (summed over covariates)."""
    if est.values.shape != truth.values.shape:
        raise ValueError(
            "shape mismatch: %s vs %s" % (est.values.shape, truth.values.shape)
        )
    diff = est.values - truth.values
    return float((diff ** 2).sum() / est.values.shape[0])


def cluster_labels(col, zero_eps) -> np.ndarray:
    """Single-linkage labels on a 1-d column: sorted entries whose gap
    exceeds zero_eps start a new cluster."""
    col = np.asarray(col, dtype=np.float64)
    order = np.argsort(col, kind="stable")
    sorted_vals = col[order]
    breaks = np.diff(sorted_vals) > zero_eps
    sorted_labels = np.concatenate([[0], np.cumsum(breaks)])
    labels = np.empty(col.shape[0], dtype=np.int64)
    labels[order] = sorted_labels
    return labels


def _pairs_within(labels) -> int:
    _, counts = np.unique(labels, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def pair_confusion(est_col, truth_col, zero_eps) -> PairConfusion:
    """Confusion rates over all unordered sample pairs, computed implicitly
    through cluster sizes (no pair enumeration).

    The estimate column is clustered at tolerance zero_eps (solver noise);
    the truth column at exact equality.
    """
    est_col = np.asarray(est_col, dtype=np.float64)
    truth_col = np.asarray(truth_col, dtype=np.float64)
    if est_col.shape != truth_col.shape:
        raise ValueError("length mismatch: %d vs %d" % (est_col.size, truth_col.size))
    if zero_eps <= 0:
        raise ValueError("zero_eps must be positive")
    n = est_col.shape[0]
    lab_t = cluster_labels(truth_col, 0.0)
    lab_e = cluster_labels(est_col, zero_eps)
    total = n * (n - 1) // 2
    eq_t = _pairs_within(lab_t)                     # |S^c|
    eq_e = _pairs_within(lab_e)                     # |S_hat^c|
    eq_both = _pairs_within(lab_t * (lab_e.max() + 1) + lab_e)  # |S^c ∩ S_hat^c|
    s = total - eq_t
    s_hat = total - eq_e
    inter = total - eq_t - eq_e + eq_both           # |S ∩ S_hat|
    return PairConfusion(
        precision=inter / s_hat if s_hat else None,
        recall=inter / s if s else None,
        tnr=eq_both / eq_t if eq_t else None,
        npv=eq_both / eq_e if eq_e else None,
    )


def pair_confusion_bruteforce(est_col, truth_col, zero_eps) -> PairConfusion:
    """O(n^2) oracle: enumerate every unordered pair explicitly."""
    est_col = np.asarray(est_col, dtype=np.float64)
    truth_col = np.asarray(truth_col, dtype=np.float64)
    n = est_col.shape[0]
    lab_t = cluster_labels(truth_col, 0.0)
    lab_e = cluster_labels(est_col, zero_eps)
    s = s_hat = inter = neg_both = 0
    for i in range(n):
        for k in range(i + 1, n):
            dt = lab_t[i] != lab_t[k]
            de = lab_e[i] != lab_e[k]
            s += dt
            s_hat += de
            inter += dt and de
            neg_both += (not dt) and (not de)
    total = n * (n - 1) // 2
    return PairConfusion(
        precision=inter / s_hat if s_hat else None,
        recall=inter / s if s else None,
        tnr=neg_both / (total - s) if total - s else None,
        npv=neg_both / (total - s_hat) if total - s_hat else None,
    )


def msd(grid_a: CoefGrid, grid_b: CoefGrid) -> float:
    """Mean squared difference of two coefficient surfaces on the same grid."""
    if grid_a.values.shape != grid_b.values.shape:
        raise ValueError(
            "grid mismatch: %s vs %s" % (grid_a.values.shape, grid_b.values.shape)
        )
    if not (np.array_equal(grid_a.t_grid, grid_b.t_grid)
            and np.array_equal(grid_a.tau_grid, grid_b.tau_grid)):
        raise ValueError("grids evaluated at different (t, tau) points")
    return float(((grid_a.values - grid_b.values) ** 2).mean())


def write_metrics_csv(path, confusions, mse_value) -> None:
    """Per-covariate confusion rows plus the global mse repeated per row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "precision", "recall", "tnr", "npv", "defined", "mse"])
        for j, c in enumerate(confusions, start=1):
            flags = c.defined
            defined = ";".join(k for k in ("precision", "recall", "tnr", "npv") if flags[k])
            writer.writerow([
                j,
                "" if c.precision is None else "%.17g" % c.precision,
                "" if c.recall is None else "%.17g" % c.recall,
                "" if c.tnr is None else "%.17g" % c.tnr,
                "" if c.npv is None else "%.17g" % c.npv,
                defined,
                "%.17g" % mse_value,
            ])
