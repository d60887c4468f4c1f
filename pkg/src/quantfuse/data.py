"""Core data containers: samples, coefficient matrices, solver configuration."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np


class ValidationError(ValueError):
    """Raised when a dataset or configuration violates its invariants."""


@dataclass(frozen=True)
class Dataset:
    """A sample of n observations for the varying-coefficient quantile model.

    y[i] is the response, X[i, :] the p covariates, t[i] in [0, 1] the index
    value (e.g. rescaled age) and tau[i] in (0, 1) the per-sample quantile
    level. ``delta`` records the quantile interval the levels were drawn
    from; it is metadata only and is not enforced row by row.
    """

    y: np.ndarray
    X: np.ndarray
    t: np.ndarray
    tau: np.ndarray
    delta: tuple[float, float] = (0.05, 0.95)

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64).ravel())
        object.__setattr__(self, "X", np.atleast_2d(np.asarray(self.X, dtype=np.float64)))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=np.float64).ravel())
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=np.float64).ravel())

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def points(self) -> np.ndarray:
        """The (t, tau) node coordinates, shape (n, 2)."""
        return np.column_stack([self.t, self.tau])


@dataclass(frozen=True)
class CoefMatrix:
    """Per-sample coefficient values, entry (i, j) = beta_j(t_i, tau_i)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=np.float64)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for the fused-lasso quantile solver.

    lam is the penalty weight on edge differences, K the neighbor count of
    the graph, eta the ADMM step size. fuse_eps is the threshold below which
    a fused difference counts as zero; tolerances default to a scale-aware
    value chosen at fit time when left as None.
    """

    lam: float = 0.1
    K: int = 5
    eta: float = 1.0
    max_iter: int = 5000
    tol_primal: float | None = None
    tol_dual: float | None = None
    fuse_eps: float | None = None
    seed: int = 0
    axis_weights: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError("lam must be nonnegative, got %r" % (self.lam,))
        if self.K < 1:
            raise ValidationError("K must be a positive integer, got %r" % (self.K,))
        if self.eta <= 0:
            raise ValidationError("eta must be positive, got %r" % (self.eta,))
        if self.max_iter < 1:
            raise ValidationError("max_iter must be positive")
        for name in ("tol_primal", "tol_dual", "fuse_eps"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValidationError("%s must be positive, got %r" % (name, v))

    def with_lam(self, lam: float) -> "SolverConfig":
        return replace(self, lam=lam)


def validate(dataset: Dataset) -> None:
    """Check all Dataset invariants; raise ValidationError naming the offender.

    Idempotent and side-effect free.
    """
    n = dataset.y.shape[0]
    if n < 1:
        raise ValidationError("dataset is empty (n=0)")
    for name in ("X", "t", "tau"):
        arr = getattr(dataset, name)
        if arr.shape[0] != n:
            raise ValidationError(
                "dimension mismatch: field %r has %d rows but y has %d"
                % (name, arr.shape[0], n)
            )
    for name in ("y", "X", "t", "tau"):
        arr = getattr(dataset, name)
        bad = ~np.isfinite(arr)
        if bad.any():
            idx = np.argwhere(bad)[0]
            if arr.ndim == 2:
                raise ValidationError(
                    "non-finite value in %r at row %d, col %d" % (name, idx[0], idx[1])
                )
            raise ValidationError("non-finite value in %r at index %d" % (name, idx[0]))
    out_t = (dataset.t < 0.0) | (dataset.t > 1.0)
    if out_t.any():
        i = int(np.argmax(out_t))
        raise ValidationError("t out of range [0, 1] at index %d: %g" % (i, dataset.t[i]))
    out_tau = (dataset.tau <= 0.0) | (dataset.tau >= 1.0)
    if out_tau.any():
        i = int(np.argmax(out_tau))
        raise ValidationError(
            "quantile level out of open interval (0, 1) at index %d: %g" % (i, dataset.tau[i])
        )


def standardize(dataset: Dataset, columns=None) -> Dataset:
    """Return a copy with the selected covariate columns scaled to mean 0, sd 1.

    Explicit opt-in; nothing is rescaled silently. Columns with zero variance
    are centered only.
    """
    X = dataset.X.copy()
    cols = range(X.shape[1]) if columns is None else columns
    for j in cols:
        mu = X[:, j].mean()
        sd = X[:, j].std()
        X[:, j] = (X[:, j] - mu) / (sd if sd > 0 else 1.0)
    return replace(dataset, X=X)


class CsvFormatError(ValueError):
    """Raised for malformed CSV input; message names the file and line."""


def read_dataset_csv(path, rng=None, delta=(0.05, 0.95)) -> Dataset:
    """Read a dataset from CSV with header ``y,t,tau,x1,...,xp``.

    The tau column may be absent, in which case levels are drawn uniformly
    from ``delta`` using ``rng`` (required then).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("%s: empty file" % path)
        header = [h.strip() for h in header]
        has_tau = "tau" in header
        expected = ["y", "t"] + (["tau"] if has_tau else [])
        if header[: len(expected)] != expected:
            raise CsvFormatError(
                "%s, line 1: expected header starting with %s, got %s"
                % (path, ",".join(expected), ",".join(header))
            )
        x_names = header[len(expected):]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    "%s, line %d: expected %d fields, got %d"
                    % (path, lineno, len(header), len(row))
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise CsvFormatError("%s, line %d: %s" % (path, lineno, exc))
    if not rows:
        raise CsvFormatError("%s: no data rows" % path)
    arr = np.asarray(rows, dtype=np.float64)
    y = arr[:, 0]
    t = arr[:, 1]
    if has_tau:
        tau = arr[:, 2]
        X = arr[:, 3:]
    else:
        if rng is None:
            raise CsvFormatError(
                "%s: no tau column and no generator supplied to draw quantile levels" % path
            )
        tau = rng.uniform(delta[0], delta[1], size=arr.shape[0])
        X = arr[:, 2:]
    if X.shape[1] != len(x_names):
        raise CsvFormatError("%s: covariate column count mismatch" % path)
    return Dataset(y=y, X=X, t=t, tau=tau, delta=delta)


def write_dataset_csv(path, dataset: Dataset) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "t", "tau"] + ["x%d" % (j + 1) for j in range(dataset.p)])
        for i in range(dataset.n):
            writer.writerow(
                ["%.17g" % dataset.y[i], "%.17g" % dataset.t[i], "%.17g" % dataset.tau[i]]
                + ["%.17g" % v for v in dataset.X[i]]
            )
