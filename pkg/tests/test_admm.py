import numpy as np
import pytest

from helpers import random_instance
from quantfuse import oracle
from quantfuse.admm import (beta_update, default_fuse_eps, dual_update, fit,
                            kkt_certificate, read_fit_csv, write_fit_csv,
                            write_manifest)
from quantfuse.data import CoefMatrix, Dataset, SolverConfig
from quantfuse.graph import apply_H, build_knn_graph
from quantfuse.loss import objective, total_check_loss


def scalar_case(w):
    """p=1, x=1, y=0, tau=0.5, eta=1; z-u = w."""
    ds = Dataset(y=np.array([0.0]), X=np.array([[1.0]]),
                 t=np.array([0.5]), tau=np.array([0.5]))
    z = CoefMatrix(np.array([[w]]))
    u = CoefMatrix(np.array([[0.0]]))
    return beta_update(ds, z, u, 1.0).values[0, 0]


class TestBetaUpdate:
    def test_case_residual_negative(self):
        # g = 2 > (1-tau)s = 0.5 -> v = tau-1
        assert scalar_case(2.0) == pytest.approx(1.5)

    def test_case_interpolating(self):
        # g = 0.2 in [-0.5, 0.5] -> residual driven to zero
        assert scalar_case(0.2) == pytest.approx(0.0)

    def test_case_residual_positive(self):
        # g = -2 < -tau*s = -0.5 -> v = tau
        assert scalar_case(-2.0) == pytest.approx(-1.5)

    def test_grid_oracle(self):
        # the closed form must minimize the per-sample augmented objective
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(2)
            y = float(rng.standard_normal())
            tau = float(rng.uniform(0.1, 0.9))
            eta = float(rng.uniform(0.5, 2.0))
            w = rng.standard_normal(2)
            ds = Dataset(y=[y], X=x[None, :], t=[0.5], tau=[tau])
            beta = beta_update(ds, CoefMatrix(w[None, :]),
                               CoefMatrix(np.zeros((1, 2))), eta).values[0]

            def aug(b):
                r = y - x @ b
                return (r * tau if r >= 0 else r * (tau - 1.0)) \
                    + 0.5 * eta * np.sum((b - w) ** 2)

            base = aug(beta)
            for _ in range(60):
                trial = beta + 0.1 * rng.standard_normal(2)
                assert base <= aug(trial) + 1e-9

    def test_zero_design_row_returns_w(self):
        ds = Dataset(y=np.array([3.0]), X=np.array([[0.0, 0.0]]),
                     t=[0.5], tau=[0.5])
        z = CoefMatrix(np.array([[1.0, -2.0]]))
        u = CoefMatrix(np.zeros((1, 2)))
        np.testing.assert_array_equal(beta_update(ds, z, u, 1.0).values, [[1.0, -2.0]])


class TestDualUpdate:
    def test_no_gap_no_change(self):
        u = CoefMatrix(np.array([[1.0]]))
        b = CoefMatrix(np.array([[2.0]]))
        np.testing.assert_array_equal(dual_update(u, b, b, 1.0).values, [[1.0]])

    def test_unit_step(self):
        u = CoefMatrix(np.zeros((2, 1)))
        beta = CoefMatrix(np.array([[1.0], [2.0]]))
        z = CoefMatrix(np.zeros((2, 1)))
        np.testing.assert_array_equal(dual_update(u, beta, z, 1.0).values, beta.values)

    def test_fractional_step(self):
        u = CoefMatrix(np.array([[1.0]]))
        beta = CoefMatrix(np.array([[2.0]]))
        z = CoefMatrix(np.array([[0.0]]))
        assert dual_update(u, beta, z, 0.5).values[0, 0] == pytest.approx(2.0)


class TestFit:
    def test_fusion_limit(self):
        rng = np.random.default_rng(1)
        ds, g = random_instance(rng, n=10, p=2, K=2)
        res = fit(ds, g, SolverConfig(lam=1e6, K=2))
        worst = max(np.abs(apply_H(g, res.beta_hat.values[:, j])).max()
                    for j in range(2))
        assert worst <= 1e-4
        assert res.support_total == 0

    def test_lambda_zero_intercept_interpolates(self):
        rng = np.random.default_rng(2)
        n = 8
        ds = Dataset(y=rng.standard_normal(n), X=np.ones((n, 1)),
                     t=rng.uniform(0, 1, n), tau=rng.uniform(0.1, 0.9, n))
        g = build_knn_graph(ds.points, 2)
        res = fit(ds, g, SolverConfig(lam=0.0, K=2))
        assert total_check_loss(ds, res.beta_hat) <= 1e-8

    @pytest.mark.parametrize("lam", [0.0, 0.1, 0.4, 1.0])
    def test_lp_oracle_gap(self, lam):
        rng = np.random.default_rng(12)
        ds, g = random_instance(rng, n=12, p=2, K=2)
        res = fit(ds, g, SolverConfig(lam=lam, K=2))
        _, opt = oracle.lp_solve(ds, g, lam)
        assert objective(ds, res.beta_hat, g, lam).total <= opt + 1e-5

    def test_kkt_certificate_small(self):
        rng = np.random.default_rng(5)
        ds, g = random_instance(rng, n=10, p=2, K=2)
        res = fit(ds, g, SolverConfig(lam=0.2, K=2))
        assert kkt_certificate(ds, g, 0.2, res) <= 1e-4

    def test_primal_residual_definition(self):
        rng = np.random.default_rng(6)
        ds, g = random_instance(rng, n=10, p=2, K=2)
        cfg = SolverConfig(lam=0.3, K=2)
        res = fit(ds, g, cfg)
        assert res.converged
        assert res.primal_res <= 1e-6 * (1.0 + np.abs(ds.y).max())

    def test_determinism(self):
        rng = np.random.default_rng(7)
        ds, g = random_instance(rng, n=15, p=2, K=3)
        cfg = SolverConfig(lam=0.25, K=3)
        a = fit(ds, g, cfg)
        b = fit(ds, g, cfg)
        np.testing.assert_array_equal(a.beta_hat.values, b.beta_hat.values)
        assert a.iters == b.iters

    def test_warm_start_restarts_fast(self):
        rng = np.random.default_rng(8)
        ds, g = random_instance(rng, n=12, p=2, K=2)
        cfg = SolverConfig(lam=0.3, K=2)
        first = fit(ds, g, cfg)
        again = fit(ds, g, cfg, warm_start=first.state)
        assert again.iters <= 2
        # solutions agree at the solver's own tolerance scale
        np.testing.assert_allclose(again.beta_hat.values, first.beta_hat.values,
                                   atol=1e-4)

    def test_non_convergence_flagged_not_raised(self):
        rng = np.random.default_rng(9)
        ds, g = random_instance(rng, n=20, p=2, K=2)
        res = fit(ds, g, SolverConfig(lam=0.05, K=2, max_iter=1))
        assert not res.converged
        assert np.isfinite(res.beta_hat.values).all()

    def test_support_matches_beta(self):
        rng = np.random.default_rng(10)
        ds, g = random_instance(rng, n=12, p=2, K=2)
        res = fit(ds, g, SolverConfig(lam=0.1, K=2))
        for j, s in enumerate(res.support):
            diffs = np.abs(apply_H(g, res.beta_hat.values[:, j]))
            np.testing.assert_array_equal(np.flatnonzero(diffs > res.fuse_eps), s)

    def test_zero_design_rows_counted(self):
        ds = Dataset(y=np.array([1.0, 2.0, 3.0]),
                     X=np.array([[1.0], [0.0], [1.0]]),
                     t=np.array([0.1, 0.5, 0.9]), tau=np.full(3, 0.5))
        g = build_knn_graph(ds.points, 1)
        res = fit(ds, g, SolverConfig(lam=0.1, K=1))
        assert res.zero_design_rows == 1

    def test_k_too_large(self):
        rng = np.random.default_rng(11)
        ds, g = random_instance(rng, n=5, p=1, K=2)
        with pytest.raises(ValueError):
            fit(ds, g, SolverConfig(lam=0.1, K=5))


class TestIo:
    def test_fit_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        ds, g = random_instance(rng, n=6, p=2, K=2)
        res = fit(ds, g, SolverConfig(lam=0.2, K=2))
        path = tmp_path / "fit.csv"
        write_fit_csv(path, ds, res)
        back = read_fit_csv(path, ds.n, ds.p)
        np.testing.assert_array_equal(back.values, res.beta_hat.values)

    def test_manifest_keys(self, tmp_path):
        import json
        rng = np.random.default_rng(4)
        ds, g = random_instance(rng, n=6, p=2, K=2)
        cfg = SolverConfig(lam=0.2, K=2)
        res = fit(ds, g, cfg)
        path = tmp_path / "run.json"
        write_manifest(path, res, cfg)
        manifest = json.loads(path.read_text())
        assert set(manifest) == {"lambda", "eta", "k", "iters", "converged",
                                 "loss", "penalty", "support_total"}
        assert manifest["lambda"] == 0.2


def test_default_fuse_eps_scale():
    assert default_fuse_eps(np.array([[0.0]])) == pytest.approx(1e-6)
    assert default_fuse_eps(np.array([[9.0]])) == pytest.approx(1e-5)
