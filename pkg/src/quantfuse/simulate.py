"""Synthetic varying-random-coefficient generator with known ground truth."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import CoefMatrix, Dataset

GRID19_LEVELS = 0.05 * np.arange(1, 20)


@dataclass(frozen=True)
class SimSpec:
    """Generator settings. Covariates 1..7 carry signal (column 1 is the
    intercept), columns 8..d are pure noise; d must be at least 9.

    quantile_mode "random" draws one level per sample from delta;
    "grid19" replicates every sample across the 19 levels 0.05..0.95.
    """

    n: int
    d: int = 9
    seed: int = 0
    quantile_mode: str = "random"
    delta: tuple[float, float] = (0.05, 0.95)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.d < 9:
            raise ValueError("d must be >= 9 (signal columns 1..7 plus nulls)")
        if self.quantile_mode not in ("random", "grid19"):
            raise ValueError("quantile_mode must be 'random' or 'grid19'")


def true_coef(j, t, tau):
    """Ground-truth coefficient surface for covariate j (1-based).

    1: 1; 2: -7; 3: 10+2sin(2*pi*t); 4: 3+2*tau; 5: 5*1{tau>0.5};
    6: 5*1{t>0.5}; 7: 3t+3tau; 8+: 0.
    """
    j = int(j)
    if j < 1:
        raise ValueError("covariate index must be >= 1, got %d" % j)
    t = np.asarray(t, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if j == 1:
        out = np.ones(np.broadcast(t, tau).shape)
    elif j == 2:
        out = np.full(np.broadcast(t, tau).shape, -7.0)
    elif j == 3:
        out = 10.0 + 2.0 * np.sin(2.0 * np.pi * t) + 0.0 * tau
    elif j == 4:
        out = 3.0 + 2.0 * tau + 0.0 * t
    elif j == 5:
        out = 5.0 * (tau > 0.5) + 0.0 * t
    elif j == 6:
        out = 5.0 * (t > 0.5) + 0.0 * tau
    elif j == 7:
        out = 3.0 * t + 3.0 * tau
    else:
        out = np.zeros(np.broadcast(t, tau).shape)
    return float(out) if out.ndim == 0 else out


def truth_matrix(t, tau, d) -> CoefMatrix:
    """true_coef evaluated at each (t_i, tau_i), all d covariates."""
    t = np.asarray(t, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    return CoefMatrix(np.column_stack([true_coef(j, t, tau) for j in range(1, d + 1)]))


def generate(spec: SimSpec):
    """Draw a dataset from the random-coefficient model and its truth matrix.

    The response is built directly from the model equation with a uniform
    driver U_i; no additive noise term is added beyond the random
    coefficients (the monotone dependence on U is what makes the tau-quantile
    of y equal the truth surface at tau). Same seed, same bytes.
    """
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n, spec.d
    t = rng.uniform(0.0, 1.0, n)
    U = rng.uniform(0.0, 1.0, n)
    X = np.empty((n, d))
    X[:, 0] = 1.0
    X[:, 1] = rng.standard_normal(n)
    X[:, 2] = rng.uniform(0.0, 1.0, n)
    X[:, 3] = rng.binomial(1, 0.5, n).astype(np.float64)
    X[:, 4] = rng.binomial(1, 0.5, n).astype(np.float64)
    X[:, 5] = rng.uniform(0.0, 1.0, n)
    X[:, 6] = rng.uniform(0.0, 1.0, n)
    if d > 7:
        X[:, 7:] = rng.standard_normal((n, d - 7))
    y = (
        1.0
        - 7.0 * X[:, 1]
        + (10.0 + 2.0 * np.sin(2.0 * np.pi * t)) * X[:, 2]
        + (3.0 + 2.0 * U) * X[:, 3]
        + 5.0 * (U > 0.5) * X[:, 4]
        + 5.0 * (t > 0.5) * X[:, 5]
        + 3.0 * (U + t) * X[:, 6]
    )
    if spec.quantile_mode == "random":
        tau = rng.uniform(spec.delta[0], spec.delta[1], n)
    else:
        reps = GRID19_LEVELS.size
        tau = np.tile(GRID19_LEVELS, n)
        t = np.repeat(t, reps)
        y = np.repeat(y, reps)
        X = np.repeat(X, reps, axis=0)
    dataset = Dataset(y=y, X=X, t=t, tau=tau, delta=spec.delta)
    return dataset, truth_matrix(t, tau, d)


def redraw_tau(dataset: Dataset, d, seed):
    """New quantile levels over the same samples; returns (dataset, truth)."""
    rng = np.random.default_rng(seed)
    tau = rng.uniform(dataset.delta[0], dataset.delta[1], dataset.n)
    new = Dataset(y=dataset.y, X=dataset.X, t=dataset.t, tau=tau, delta=dataset.delta)
    return new, truth_matrix(new.t, tau, d)


def write_truth_csv(path, truth: CoefMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "beta_true"])
        for i in range(truth.n):
            for j in range(truth.p):
                writer.writerow([i + 1, j + 1, "%.17g" % truth.values[i, j]])


def read_truth_csv(path) -> CoefMatrix:
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            entries.append((int(row["i"]), int(row["j"]), float(row["beta_true"])))
    if not entries:
        raise ValueError("%s: empty truth file" % path)
    n = max(e[0] for e in entries)
    p = max(e[1] for e in entries)
    values = np.full((n, p), np.nan)
    for i, j, v in entries:
        values[i - 1, j - 1] = v
    if np.isnan(values).any():
        raise ValueError("%s: missing (i, j) entries" % path)
    return CoefMatrix(values)
