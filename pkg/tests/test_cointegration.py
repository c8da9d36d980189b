"""Two-step cointegration testing, cross-checked against statsmodels.coint."""

from __future__ import annotations

import numpy as np
import pytest
from statsmodels.tsa.stattools import coint

from regimevar.cointegration import (
    CointegrationReport,
    classify,
    engle_granger,
    engle_granger_each_against_rest,
    static_ols,
)
from regimevar.exceptions import DataError, EstimationError


def random_walk(T, seed):
    return np.cumsum(np.random.default_rng(seed).standard_normal(T))


class TestStaticOls:
    def test_exact_fit(self):
        x = np.linspace(1.0, 9.0, 40)
        coef, resid, se = static_ols(2.0 * x, x[:, None], include_constant=True)
        assert coef[0] == pytest.approx(2.0, abs=1e-12)
        assert np.abs(resid).max() < 1e-12

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(123)
        x = rng.standard_normal(100)
        y = x + 0.5 * rng.standard_normal(100)
        coef, resid, se = static_ols(y, x[:, None], include_constant=True)
        # independent oracle: solve the normal equations directly
        X = np.column_stack([x, np.ones(100)])
        oracle = np.linalg.solve(X.T @ X, X.T @ y)
        np.testing.assert_allclose(coef, oracle, atol=1e-10)
        assert abs(coef[0] - 1.0) < 3 * se[0]

    def test_duplicated_column_names_offender(self):
        x = np.random.default_rng(0).standard_normal(50)
        X = np.column_stack([x, x])
        with pytest.raises(EstimationError, match="dup"):
            static_ols(x, X, column_names=("orig", "dup"))

    def test_residuals_orthogonal_to_regressors(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((80, 3))
        y = X @ np.array([1.0, -2.0, 0.5]) + rng.standard_normal(80)
        _, resid, _ = static_ols(y, X, include_constant=True)
        for j in range(3):
            inner = abs(float(resid @ X[:, j]))
            assert inner < 1e-8 * np.linalg.norm(resid) * np.linalg.norm(X[:, j])
        assert abs(resid.mean()) < 1e-8 * resid.std()


class TestEngleGranger:
    def test_matches_statsmodels_fixed_lag(self):
        rng = np.random.default_rng(8)
        x = np.cumsum(rng.standard_normal(200))
        y = x + rng.standard_normal(200)
        ours = engle_granger(y, x, max_lags=2, lag_selection="fixed")
        stat, p, _ = coint(y, x, trend="c", maxlag=2, autolag=None)
        assert ours.tau == pytest.approx(stat, abs=1e-8)
        assert ours.p_value == pytest.approx(p, abs=1e-4)

    def test_cointegrated_pair_rejects_often(self):
        hits = 0
        for s in range(100):
            rng = np.random.default_rng(s)
            x = np.cumsum(rng.standard_normal(200))
            y = x + rng.standard_normal(200)
            hits += engle_granger(y, x).p_value < 0.05
        assert hits >= 80

    def test_independent_walks_rarely_reject(self):
        hits = 0
        for s in range(100):
            x = random_walk(200, seed=2 * s)
            y = random_walk(200, seed=2 * s + 1)
            hits += engle_granger(y, x).p_value < 0.05
        assert hits <= 10

    def test_scale_invariance_of_tau(self):
        rng = np.random.default_rng(31)
        x = np.cumsum(rng.standard_normal(150))
        y = x + rng.standard_normal(150)
        base = engle_granger(y, x, max_lags=1, lag_selection="fixed").tau
        for scale in (0.01, 3.7, 1250.0):
            scaled = engle_granger(scale * y, x, max_lags=1, lag_selection="fixed").tau
            assert scaled == pytest.approx(base, abs=1e-9)

    def test_too_few_observations(self):
        with pytest.raises(DataError, match="20"):
            engle_granger(np.arange(10.0), np.arange(10.0) ** 2)

    def test_many_regressors_bracket_with_warning(self):
        rng = np.random.default_rng(77)
        X = np.cumsum(rng.standard_normal((120, 7)), axis=0)
        y = np.cumsum(rng.standard_normal(120))
        rep = engle_granger(y, X)
        assert rep.p_interval is not None
        assert rep.warning is not None and "bracket" in rep.warning

    def test_each_against_rest_layout(self):
        rng = np.random.default_rng(9)
        series = {f"v{i}": np.cumsum(rng.standard_normal(90)) for i in range(4)}
        reports = engle_granger_each_against_rest(series)
        assert [r.dependent for r in reports] == sorted(series)
        for r in reports:
            assert r.dependent not in r.regressors
            assert len(r.regressors) == 3


class TestClassification:
    def _report(self, tau, p):
        return CointegrationReport(
            dependent="y", regressors=("x",), tau=tau, p_value=p, p_interval=None,
            residuals=np.zeros(30), ols_coefficients=np.zeros(2), lags_used=0,
            observations=30, deterministic="constant",
        )

    def test_strong_rejection_is_one_percent(self):
        # tau -9.02 with p 0.0009 classifies as cointegrated at 1%
        assert classify(self._report(-9.02, 0.0009)) == "cointegrated at 1%"

    def test_weak_statistic_not_cointegrated(self):
        # tau -3.51 with p 0.81 classifies as not cointegrated
        assert classify(self._report(-3.51, 0.81)) == "not cointegrated"

    @pytest.mark.parametrize("alpha", [0.01, 0.05, 0.10])
    def test_threshold_behavior(self, alpha):
        below = self._report(-5.0, alpha - 1e-9)
        at = self._report(-5.0, alpha)
        assert below.cointegrated_at(alpha)
        assert not at.cointegrated_at(alpha)
