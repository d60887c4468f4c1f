import numpy as np
import pytest

from quantfuse.data import (CsvFormatError, Dataset, SolverConfig,
                            ValidationError, read_dataset_csv, standardize,
                            validate, write_dataset_csv)


def small_dataset(**overrides):
    fields = dict(
        y=np.array([0.0, 1.0]),
        X=np.array([[1.0], [1.0]]),
        t=np.array([0.2, 0.8]),
        tau=np.array([0.3, 0.7]),
    )
    fields.update(overrides)
    return Dataset(**fields)


class TestValidate:
    def test_valid_dataset_passes(self):
        validate(small_dataset())

    def test_idempotent(self):
        ds = small_dataset()
        validate(ds)
        validate(ds)  # no state, no surprises on repeat

    def test_tau_zero_rejected(self):
        ds = small_dataset(tau=np.array([0.0, 0.7]))
        with pytest.raises(ValidationError, match="open interval"):
            validate(ds)

    def test_tau_one_rejected(self):
        ds = small_dataset(tau=np.array([0.3, 1.0]))
        with pytest.raises(ValidationError, match="index 1"):
            validate(ds)

    def test_t_out_of_range(self):
        ds = small_dataset(t=np.array([0.2, 1.5]))
        with pytest.raises(ValidationError, match=r"t out of range.*index 1"):
            validate(ds)

    def test_nan_in_X_names_position(self):
        X = np.ones((3, 2))
        X[1, 1] = np.nan
        ds = Dataset(y=np.zeros(3), X=X, t=np.full(3, 0.5), tau=np.full(3, 0.5))
        with pytest.raises(ValidationError, match="row 1, col 1"):
            validate(ds)

    def test_inf_in_y(self):
        ds = small_dataset(y=np.array([np.inf, 1.0]))
        with pytest.raises(ValidationError, match="'y'"):
            validate(ds)

    def test_dimension_mismatch_names_field(self):
        ds = small_dataset(t=np.array([0.2, 0.8, 0.5]))
        with pytest.raises(ValidationError, match="'t'"):
            validate(ds)

    def test_empty_dataset(self):
        ds = Dataset(y=np.empty(0), X=np.empty((0, 1)), t=np.empty(0), tau=np.empty(0))
        with pytest.raises(ValidationError, match="empty"):
            validate(ds)


class TestDatasetProperties:
    def test_shapes(self):
        ds = small_dataset()
        assert ds.n == 2
        assert ds.p == 1
        assert ds.points.shape == (2, 2)
        np.testing.assert_array_equal(ds.points[:, 0], ds.t)
        np.testing.assert_array_equal(ds.points[:, 1], ds.tau)

    def test_default_delta(self):
        assert small_dataset().delta == (0.05, 0.95)


class TestSolverConfig:
    def test_defaults_valid(self):
        cfg = SolverConfig()
        assert cfg.eta == 1.0
        assert cfg.K == 5

    @pytest.mark.parametrize("kwargs", [
        dict(lam=-0.1), dict(K=0), dict(eta=0.0), dict(max_iter=0),
        dict(tol_primal=-1e-6), dict(tol_dual=0.0), dict(fuse_eps=-1.0),
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValidationError):
            SolverConfig(**kwargs)

    def test_with_lam(self):
        cfg = SolverConfig(lam=0.1, K=3)
        cfg2 = cfg.with_lam(0.7)
        assert cfg2.lam == 0.7
        assert cfg2.K == 3
        assert cfg.lam == 0.1


class TestStandardize:
    def test_mean_zero_sd_one(self):
        rng = np.random.default_rng(0)
        X = rng.normal(5.0, 3.0, (200, 2))
        ds = Dataset(y=np.zeros(200), X=X, t=np.full(200, 0.5), tau=np.full(200, 0.5))
        out = standardize(ds)
        assert np.allclose(out.X.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(out.X.std(axis=0), 1.0, atol=1e-12)

    def test_constant_column_centered_only(self):
        X = np.column_stack([np.full(5, 3.0), np.arange(5.0)])
        ds = Dataset(y=np.zeros(5), X=X, t=np.full(5, 0.5), tau=np.full(5, 0.5))
        out = standardize(ds, columns=[0])
        assert np.allclose(out.X[:, 0], 0.0)
        np.testing.assert_array_equal(out.X[:, 1], X[:, 1])

    def test_original_untouched(self):
        ds = small_dataset()
        before = ds.X.copy()
        standardize(ds)
        np.testing.assert_array_equal(ds.X, before)


class TestCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        ds = Dataset(y=rng.normal(size=7), X=rng.normal(size=(7, 3)),
                     t=rng.uniform(0, 1, 7), tau=rng.uniform(0.05, 0.95, 7))
        path = tmp_path / "data.csv"
        write_dataset_csv(path, ds)
        back = read_dataset_csv(path)
        np.testing.assert_array_equal(back.y, ds.y)
        np.testing.assert_array_equal(back.X, ds.X)
        np.testing.assert_array_equal(back.t, ds.t)
        np.testing.assert_array_equal(back.tau, ds.tau)

    def test_missing_tau_column_drawn(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("y,t,x1\n1.0,0.5,2.0\n2.0,0.6,3.0\n")
        ds = read_dataset_csv(path, rng=np.random.default_rng(0))
        assert ds.p == 1
        assert np.all((ds.tau > 0.05) & (ds.tau < 0.95))

    def test_missing_tau_without_rng_errors(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("y,t,x1\n1.0,0.5,2.0\n")
        with pytest.raises(CsvFormatError, match="tau"):
            read_dataset_csv(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(CsvFormatError, match="line 1"):
            read_dataset_csv(path)

    def test_field_count_mismatch_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("y,t,tau,x1\n1.0,0.5,0.5,2.0\n1.0,0.5\n")
        with pytest.raises(CsvFormatError, match="line 3"):
            read_dataset_csv(path)

    def test_non_numeric_names_line(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("y,t,tau,x1\n1.0,0.5,oops,2.0\n")
        with pytest.raises(CsvFormatError, match="line 2"):
            read_dataset_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("")
        with pytest.raises(CsvFormatError, match="empty"):
            read_dataset_csv(path)
