import math

import numpy as np
import pytest

from fairpath.errors import DataError
from fairpath.stats import (
    BINARY,
    CONTINUOUS,
    Dataset,
    RidgeFallbackWarning,
    bic_local_score,
    correlation_matrix,
    fisher_z_test,
    logistic_fit,
    ols_fit,
    partial_correlation,
    _sigmoid,
)


def cont_dataset(*cols, names=None):
    arr = np.column_stack(cols)
    names = names or tuple(f"c{i}" for i in range(arr.shape[1]))
    return Dataset(arr, names, (CONTINUOUS,) * arr.shape[1])


class TestDataset:
    def test_binary_values_enforced(self):
        with pytest.raises(DataError, match="outside"):
            Dataset(np.array([[0.0], [2.0]]), ("b",), (BINARY,))

    def test_nan_rejected(self):
        with pytest.raises(DataError, match="NaN"):
            Dataset(np.array([[np.nan]]), ("a",), (CONTINUOUS,))

    def test_duplicate_names_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            Dataset(np.zeros((3, 2)), ("a", "a"), (CONTINUOUS,) * 2)

    def test_named_lookup_normalizes(self):
        ds = cont_dataset(np.arange(4.0), names=("Serum_Sodium",))
        assert ds.index("serum sodium") == 0


class TestCorrelationMatrix:
    def test_duplicated_column(self):
        x = np.random.default_rng(0).normal(size=50)
        corr = correlation_matrix(cont_dataset(x, x.copy()))
        assert corr[0, 1] == pytest.approx(1.0)

    def test_independent_columns_small_r(self):
        rng = np.random.default_rng(1)
        ds = cont_dataset(rng.normal(size=10000), rng.normal(size=10000))
        assert abs(correlation_matrix(ds)[0, 1]) < 0.05

    def test_anticorrelated_pair(self):
        x = np.linspace(-2, 2, 40)
        corr = correlation_matrix(cont_dataset(x, -x))
        assert corr[0, 1] == pytest.approx(-1.0)

    def test_zero_variance_names_column(self):
        ds = cont_dataset(np.arange(5.0), np.ones(5), names=("ok", "flat"))
        with pytest.raises(DataError, match="flat"):
            correlation_matrix(ds)

    def test_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(2)
        ds = cont_dataset(*(rng.normal(size=200) for _ in range(4)))
        corr = correlation_matrix(ds)
        assert np.abs(corr - corr.T).max() < 1e-12
        assert np.allclose(np.diag(corr), 1.0)


class TestPartialCorrelation:
    def test_empty_set_equals_raw_entry(self):
        rng = np.random.default_rng(3)
        ds = cont_dataset(*(rng.normal(size=300) for _ in range(3)))
        corr = correlation_matrix(ds)
        assert partial_correlation(corr, 0, 2, []) == corr[0, 2]

    def test_chain_partials_out(self):
        # x -> z -> y with unit coefficients: pcorr(x, y | z) ~ 0
        rng = np.random.default_rng(4)
        x = rng.normal(size=10000)
        z = x + rng.normal(size=10000)
        y = z + rng.normal(size=10000)
        corr = correlation_matrix(cont_dataset(x, z, y))
        assert abs(partial_correlation(corr, 0, 2, [1])) < 0.02

    def test_collider_induces_dependence(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=10000)
        y = rng.normal(size=10000)
        z = x + y + rng.normal(size=10000)
        corr = correlation_matrix(cont_dataset(x, y, z))
        assert abs(corr[0, 1]) < 0.05  # marginally near-independent
        assert abs(partial_correlation(corr, 0, 1, [2])) > 0.2

    def test_collinear_conditioning_set(self):
        x = np.random.default_rng(6).normal(size=100)
        y = np.random.default_rng(7).normal(size=100)
        corr = correlation_matrix(cont_dataset(x, y, x.copy(), x.copy()))
        with pytest.raises(DataError, match="collinear"):
            partial_correlation(corr, 0, 1, [2, 3])

    def test_clamped_to_open_interval(self):
        x = np.random.default_rng(8).normal(size=80)
        corr = correlation_matrix(cont_dataset(x, x.copy()))
        r = partial_correlation(corr, 0, 1, [])
        assert abs(r) <= 1.0 - 1e-12


class TestFisherZ:
    def test_zero_correlation_independent(self):
        ds = cont_dataset(np.array([1.0, 2.0, 3.0, 4.0, 5.0]),
                          np.array([2.0, 1.0, 3.0, 5.0, 4.0]))
        corr = correlation_matrix(ds)
        corr[0, 1] = corr[1, 0] = 0.0
        res = fisher_z_test(ds, 0, 1, [], alpha=0.05, corr=corr)
        assert res.p_value == pytest.approx(1.0)
        assert res.independent

    def test_hand_computed_statistic(self):
        # r = 0.5, n = 103, no conditioning: statistic = 10 * atanh(0.5)
        rng = np.random.default_rng(9)
        ds = cont_dataset(rng.normal(size=103), rng.normal(size=103))
        corr = np.array([[1.0, 0.5], [0.5, 1.0]])
        res = fisher_z_test(ds, 0, 1, [], alpha=0.05, corr=corr)
        assert res.statistic == pytest.approx(10 * 0.5 * math.log(3.0), abs=1e-4)
        assert res.statistic == pytest.approx(5.493, abs=1e-3)
        assert res.p_value < 1e-7
        assert not res.independent

    def test_alpha_boundary_flip(self):
        # two-sided 5% point: statistic 1.95996 <-> p = 0.05
        rng = np.random.default_rng(10)
        n = 103
        ds = cont_dataset(rng.normal(size=n), rng.normal(size=n))
        stat_target = 1.959963984540054
        r = math.tanh(stat_target / math.sqrt(n - 3))
        corr = np.array([[1.0, r], [r, 1.0]])
        res = fisher_z_test(ds, 0, 1, [], alpha=0.05, corr=corr)
        assert res.p_value == pytest.approx(0.05, abs=1e-9)
        assert not res.independent  # p > alpha is strict
        r_smaller = math.tanh((stat_target - 1e-6) / math.sqrt(n - 3))
        corr = np.array([[1.0, r_smaller], [r_smaller, 1.0]])
        assert fisher_z_test(ds, 0, 1, [], alpha=0.05, corr=corr).independent

    def test_clamp_boundary_p_zero(self):
        x = np.random.default_rng(11).normal(size=50)
        ds = cont_dataset(x, x.copy())
        res = fisher_z_test(ds, 0, 1, [], alpha=0.05)
        assert res.p_value == 0.0
        assert not res.independent

    def test_symmetric_in_i_j(self):
        rng = np.random.default_rng(12)
        ds = cont_dataset(*(rng.normal(size=400) for _ in range(4)))
        a = fisher_z_test(ds, 0, 3, [1, 2], alpha=0.05)
        b = fisher_z_test(ds, 3, 0, [1, 2], alpha=0.05)
        assert abs(a.p_value - b.p_value) < 1e-12

    def test_degrees_of_freedom_guard(self):
        rng = np.random.default_rng(13)
        ds = cont_dataset(*(rng.normal(size=5) for _ in range(4)))
        with pytest.raises(DataError, match="Fisher-Z"):
            fisher_z_test(ds, 0, 1, [2, 3], alpha=0.05)


class TestBic:
    def test_no_parents_is_variance_term(self):
        rng = np.random.default_rng(14)
        y = rng.normal(size=500)
        ds = cont_dataset(y)
        expected = -500 * math.log(y.var())
        assert bic_local_score(ds, 0, []) == pytest.approx(expected, rel=1e-9)

    def test_noiseless_fit_floored(self):
        x = np.linspace(0, 1, 100)
        ds = cont_dataset(x, 2 * x)
        score = bic_local_score(ds, 1, [0])
        assert score == pytest.approx(-100 * math.log(1e-12) - math.log(100))

    def test_irrelevant_parent_penalized(self):
        rng = np.random.default_rng(15)
        n = 1000
        x = rng.normal(size=n)
        y = x + rng.normal(size=n)
        junk = rng.normal(size=n)
        ds = cont_dataset(x, y, junk)
        assert bic_local_score(ds, 1, [0]) > bic_local_score(ds, 1, [0, 2])

    def test_decomposable_total_invariant_to_order(self):
        rng = np.random.default_rng(16)
        ds = cont_dataset(*(rng.normal(size=200) for _ in range(4)))
        parents = {0: [], 1: [0], 2: [0, 1], 3: [2]}
        orders = [(0, 1, 2, 3), (3, 2, 1, 0), (2, 0, 3, 1)]
        totals = [
            sum(bic_local_score(ds, v, parents[v]) for v in order)
            for order in orders
        ]
        assert totals[0] == pytest.approx(totals[1], abs=1e-9)
        assert totals[0] == pytest.approx(totals[2], abs=1e-9)

    def test_singular_design_warns_and_scores(self):
        x = np.random.default_rng(17).normal(size=120)
        ds = cont_dataset(x, x.copy(), x + 1e-3 * np.arange(120))
        with pytest.warns(RidgeFallbackWarning):
            score = bic_local_score(ds, 2, [0, 1])
        assert np.isfinite(score)


class TestOls:
    def test_exact_line(self):
        x = np.linspace(-1, 3, 50)
        ds = cont_dataset(x, 3 * x + 1)
        fit = ols_fit(ds, 1, [0])
        assert fit.coefficients[0] == pytest.approx(3.0, abs=1e-10)
        assert fit.intercept == pytest.approx(1.0, abs=1e-10)
        assert fit.residual_variance == pytest.approx(0.0, abs=1e-18)

    def test_two_predictors_simulation(self):
        rng = np.random.default_rng(18)
        n = 5000
        x1, x2 = rng.normal(size=n), rng.normal(size=n)
        y = x1 + x2 + rng.normal(scale=0.1, size=n)
        fit = ols_fit(cont_dataset(x1, x2, y), 2, [0, 1])
        assert np.abs(fit.coefficients - 1.0).max() < 0.02

    def test_zero_predictors_returns_mean(self):
        y = np.array([1.0, 2.0, 6.0, 7.0])
        fit = ols_fit(cont_dataset(y), 0, [])
        assert fit.intercept == pytest.approx(y.mean())

    def test_rank_deficient_names_columns(self):
        x = np.random.default_rng(19).normal(size=30)
        ds = cont_dataset(x, x.copy(), names=("a", "dup"))
        ds = Dataset(np.column_stack([x, x, x + 1]), ("a", "dup", "y"),
                     (CONTINUOUS,) * 3)
        with pytest.raises(DataError, match="dependent columns"):
            ols_fit(ds, "y", ["a", "dup"])

    def test_predictions_reconstruct_target(self):
        rng = np.random.default_rng(20)
        n = 300
        X = rng.normal(size=(n, 3))
        y = X @ [1.0, -2.0, 0.5] + rng.normal(size=n)
        ds = Dataset(np.column_stack([X, y]), ("a", "b", "c", "y"),
                     (CONTINUOUS,) * 4)
        fit = ols_fit(ds, "y", ["a", "b", "c"])
        pred = fit.predict(X)
        resid = y - pred
        rel = np.abs((pred + resid) - y).max() / np.abs(y).max()
        assert rel < 1e-9


class TestLogistic:
    def test_intercept_only_closed_form(self):
        y = np.array([1.0, 1.0, 1.0, 0.0])
        ds = Dataset(y[:, None], ("y",), (BINARY,))
        fit = logistic_fit(ds, "y", [])
        assert fit.intercept == pytest.approx(math.log(3.0))
        assert fit.converged

    def test_simulation_recovers_coefficient(self):
        rng = np.random.default_rng(21)
        n = 20000
        x = rng.normal(size=n)
        p = 1 / (1 + np.exp(-1.5 * x))
        y = (rng.uniform(size=n) < p).astype(float)
        ds = Dataset(np.column_stack([x, y]), ("x", "y"),
                     (CONTINUOUS, BINARY))
        fit = logistic_fit(ds, "y", ["x"])
        assert fit.converged
        assert fit.coefficients[0] == pytest.approx(1.5, abs=0.1)

    def test_separation_flagged(self):
        x = np.concatenate([np.linspace(-0.2, -0.1, 10), np.linspace(0.1, 0.2, 10)])
        y = (x > 0).astype(float)
        ds = Dataset(np.column_stack([x, y]), ("x", "y"),
                     (CONTINUOUS, BINARY))
        fit = logistic_fit(ds, "y", ["x"])
        assert not fit.converged
        assert "separation" in fit.note

    def test_single_class_rejected(self):
        ds = Dataset(np.column_stack([np.arange(4.0), np.ones(4)]),
                     ("x", "y"), (CONTINUOUS, BINARY))
        with pytest.raises(DataError, match="single-class"):
            logistic_fit(ds, "y", ["x"])

    def test_gradient_vanishes_at_solution(self):
        rng = np.random.default_rng(22)
        n = 2000
        X = rng.normal(size=(n, 2))
        p = 1 / (1 + np.exp(-(0.3 + X @ [0.8, -0.5])))
        y = (rng.uniform(size=n) < p).astype(float)
        ds = Dataset(np.column_stack([X, y]), ("a", "b", "y"),
                     (CONTINUOUS, CONTINUOUS, BINARY))
        fit = logistic_fit(ds, "y", ["a", "b"])
        assert fit.converged

        beta = np.concatenate([[fit.intercept], fit.coefficients])

        def loglik(b):
            eta = np.column_stack([np.ones(n), X]) @ b
            return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

        # analytic gradient of the log-likelihood at the fit
        mu = _sigmoid(np.column_stack([np.ones(n), X]) @ beta)
        grad = np.column_stack([np.ones(n), X]).T @ (y - mu)
        assert np.abs(grad).max() < 1e-6
        # and it matches finite differences
        eps = 1e-6
        for k in range(3):
            bp, bm = beta.copy(), beta.copy()
            bp[k] += eps
            bm[k] -= eps
            fd = (loglik(bp) - loglik(bm)) / (2 * eps)
            assert fd == pytest.approx(grad[k], abs=5e-3)
