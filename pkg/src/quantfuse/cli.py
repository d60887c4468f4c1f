"""Command-line front door: simulate, fit, path, predict, grid, eval.

Exit codes: 0 success, 1 validation/input error, 2 solver did not converge
(outputs are still written, flagged in the manifest).
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import admm, metrics, path as path_mod, predict as predict_mod, simulate as sim
from .data import (CsvFormatError, Dataset, SolverConfig, ValidationError,
                   read_dataset_csv, write_dataset_csv)
from .graph import build_knn_graph, write_edges_csv
from .simulate import read_truth_csv, write_truth_csv


def _read_config_file(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CsvFormatError("%s, line %d: expected key=value" % (path, lineno))
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args):
    """Fill argparse None values from the optional key=value config file."""
    if getattr(args, "config", None):
        cfg = _read_config_file(args.config)
        for key, value in cfg.items():
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    return args


def _opt(args, name, cast, default):
    v = getattr(args, name, None)
    return default if v is None else cast(v)


def _load_data(args):
    seed = _opt(args, "seed", int, 0)
    rng = np.random.default_rng(seed)
    return read_dataset_csv(args.data, rng=rng)


def _solver_config(args, lam=0.0):
    return SolverConfig(
        lam=lam,
        K=_opt(args, "k", int, 5),
        eta=_opt(args, "eta", float, 1.0),
        max_iter=_opt(args, "max_iter", int, 5000),
        tol_primal=_opt(args, "tol_primal", float, None),
        tol_dual=_opt(args, "tol_dual", float, None),
        fuse_eps=_opt(args, "fuse_eps", float, None),
        seed=_opt(args, "seed", int, 0),
    )


def cmd_simulate(args):
    spec = sim.SimSpec(
        n=int(args.n), d=_opt(args, "d", int, 9), seed=_opt(args, "seed", int, 0),
        quantile_mode=_opt(args, "quantile_mode", str, "random"),
    )
    dataset, truth = sim.generate(spec)
    write_dataset_csv(args.out, dataset)
    if args.truth:
        write_truth_csv(args.truth, truth)
    print("simulate: wrote %d rows, %d covariates to %s" % (dataset.n, dataset.p, args.out))
    return 0


def cmd_fit(args):
    dataset = _load_data(args)
    config = _solver_config(args, lam=float(args.lam))
    graph = build_knn_graph(dataset.points, config.K)
    result = admm.fit(dataset, graph, config)
    admm.write_fit_csv(args.out, dataset, result)
    if args.manifest:
        admm.write_manifest(args.manifest, result, config)
    if args.edges:
        write_edges_csv(args.edges, graph)
    print("fit: lambda=%g iters=%d converged=%s objective=%.6g support=%d"
          % (result.lam, result.iters, result.converged,
             result.objective.total, result.support_total))
    return 0 if result.converged else 2


def cmd_path(args):
    dataset = _load_data(args)
    config = _solver_config(args)
    graph = build_knn_graph(dataset.points, config.K)
    result = path_mod.lambda_path(
        dataset, graph, config,
        n_lambda=_opt(args, "n_lambda", int, path_mod.DEFAULT_N_LAMBDA),
        lambda_min_ratio=_opt(args, "lambda_min_ratio", float, path_mod.DEFAULT_MIN_RATIO),
    )
    path_mod.write_path_csv(args.out, result)
    best = result.best
    if args.best_fit:
        admm.write_fit_csv(args.best_fit, dataset, best)
    if args.manifest:
        admm.write_manifest(args.manifest, best, config.with_lam(best.lam))
    print("path: %d fits, selected lambda=%g (bic=%.6g)"
          % (len(result.fits), result.lambdas[result.selected],
             result.bics[result.selected]))
    return 0 if all(f.converged for f in result.fits) else 2


def _read_query_csv(p):
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[:2] != ["t", "tau"]:
            raise CsvFormatError("%s, line 1: expected header t,tau[,x1,...]" % p)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise CsvFormatError("%s, line %d: %s" % (p, lineno, exc))
    arr = np.asarray(rows, dtype=np.float64)
    return arr[:, :2], (arr[:, 2:] if arr.shape[1] > 2 else None)


def cmd_predict(args):
    dataset = _load_data(args)
    beta = admm.read_fit_csv(args.fit, dataset.n, dataset.p).values
    K = _opt(args, "k", int, 5)
    queries, xs = _read_query_csv(args.query)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if xs is None:
            writer.writerow(["t", "tau", "j", "beta_hat"])
            for q in queries:
                coef = predict_mod.predict_coef(beta, dataset.points, q, K)
                for j, v in enumerate(coef, start=1):
                    writer.writerow(["%.17g" % q[0], "%.17g" % q[1], j, "%.17g" % v])
        else:
            writer.writerow(["t", "tau", "yhat"])
            for q, x in zip(queries, xs):
                yhat = predict_mod.predict_quantile(beta, dataset.points, x, q, K)
                writer.writerow(["%.17g" % q[0], "%.17g" % q[1], "%.17g" % yhat])
    print("predict: wrote %d queries to %s" % (queries.shape[0], args.out))
    return 0


def cmd_grid(args):
    dataset = _load_data(args)
    beta = admm.read_fit_csv(args.fit, dataset.n, dataset.p).values
    K = _opt(args, "k", int, 5)
    t_steps = _opt(args, "t_steps", int, 100)
    tau_lo = _opt(args, "tau_lo", float, 0.05)
    tau_hi = _opt(args, "tau_hi", float, 0.95)
    tau_steps = _opt(args, "tau_steps", int, 90)
    t_grid = np.arange(1, t_steps + 1) / t_steps
    tau_grid = tau_lo + (tau_hi - tau_lo) * np.arange(1, tau_steps + 1) / tau_steps
    grid = predict_mod.eval_grid(beta, dataset.points, t_grid, tau_grid, K)
    predict_mod.write_grid_csv(args.out, grid)
    print("grid: wrote %dx%dx%d surface to %s"
          % (t_grid.size, tau_grid.size, dataset.p, args.out))
    return 0


def cmd_eval(args):
    truth = read_truth_csv(args.truth)
    est = admm.read_fit_csv(args.fit, truth.n, truth.p)
    mse_value = metrics.mse(est, truth)
    confusions = []
    for j in range(truth.p):
        col = est.values[:, j]
        eps = _opt(args, "zero_eps", float, 0.0) or \
            admm.default_fuse_eps(col)
        confusions.append(metrics.pair_confusion(col, truth.values[:, j], eps))
    metrics.write_metrics_csv(args.out, confusions, mse_value)
    print("eval: mse=%.6g, wrote %s" % (mse_value, args.out))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quantfuse",
        description="Varying-coefficient regional quantile regression "
                    "with a KNN fused-Lasso penalty",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="plain key=value file; flags override it")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (numerics are unaffected)")

    p = sub.add_parser("simulate", help="generate synthetic data with known truth")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--quantile-mode", dest="quantile_mode",
                   choices=["random", "grid19"], default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None)
    p.set_defaults(func=cmd_simulate)

    def solver_flags(p):
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        p.add_argument("--tol-primal", dest="tol_primal", type=float, default=None)
        p.add_argument("--tol-dual", dest="tol_dual", type=float, default=None)
        p.add_argument("--fuse-eps", dest="fuse_eps", type=float, default=None)

    p = sub.add_parser("fit", help="solve at a single penalty value")
    common(p)
    solver_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--edges", default=None, help="debug edge-list CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", help="penalty path with BIC selection")
    common(p)
    solver_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--n-lambda", dest="n_lambda", type=int, default=None)
    p.add_argument("--lambda-min-ratio", dest="lambda_min_ratio",
                   type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--best-fit", dest="best_fit", default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("predict", help="KNN-average prediction at new points")
    common(p)
    p.add_argument("--fit", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="evaluate the coefficient surface on a grid")
    common(p)
    p.add_argument("--fit", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t-steps", dest="t_steps", type=int, default=None)
    p.add_argument("--tau-lo", dest="tau_lo", type=float, default=None)
    p.add_argument("--tau-hi", dest="tau_hi", type=float, default=None)
    p.add_argument("--tau-steps", dest="tau_steps", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("eval", help="metrics against a truth file")
    common(p)
    p.add_argument("--fit", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--zero-eps", dest="zero_eps", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        return args.func(args)
    except (ValidationError, CsvFormatError, FileNotFoundError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
