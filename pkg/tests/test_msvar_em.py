"""EM estimation: oracle equivalence, recovery, monotonicity, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from regimevar.exceptions import ConfigError, EstimationError
from regimevar.msvar.estimate import em_fit, loglikelihood, ols_var_fit
from regimevar.msvar.model import (
    ModelSpec,
    MsVarParameters,
    SwitchingMask,
    TransitionMatrix,
)
from regimevar.msvar.simulate import simulate

from conftest import best_regime_permutation, make_regime


@pytest.fixture(scope="module")
def k1_setup():
    spec = ModelSpec(
        endogenous=("a", "b"),
        exogenous=("d",),
        n_regimes=1,
        switching=SwitchingMask(False, False, False, False),
    )
    reg = make_regime(
        [0.5, -0.2],
        np.array([[0.3, 0.05], [0.0, 0.2]]),
        0.3 * np.eye(2),
        exog=np.array([[0.3], [0.1]]),
    )
    params = MsVarParameters(spec=spec, regimes=(reg,),
                             transition=TransitionMatrix(np.ones((1, 1))))
    exog = (np.random.default_rng(3).random((300, 1)) > 0.8).astype(float)
    ds, _ = simulate(params, T=300, exog_path=exog, seed=11, burn_in=30)
    return spec, ds


class TestK1Equivalence:
    def test_em_matches_ols(self, k1_setup):
        spec, ds = k1_setup
        em = em_fit(spec, ds, compute_se=False)
        ols = ols_var_fit(spec, ds)
        assert np.abs(em.regimes[0].intercept - ols.regimes[0].intercept).max() < 1e-6
        assert np.abs(em.regimes[0].lag_matrices - ols.regimes[0].lag_matrices).max() < 1e-6
        assert np.abs(em.regimes[0].exog_coeffs - ols.regimes[0].exog_coeffs).max() < 1e-6
        assert np.abs(em.regimes[0].covariance - ols.regimes[0].covariance).max() < 1e-6

    def test_ols_requires_single_regime(self, k1_setup):
        _, ds = k1_setup
        spec2 = ModelSpec(endogenous=("a", "b"), exogenous=("d",), n_regimes=2)
        with pytest.raises(ConfigError, match="n_regimes"):
            ols_var_fit(spec2, ds)

    def test_loglikelihood_agrees(self, k1_setup):
        spec, ds = k1_setup
        em = em_fit(spec, ds, compute_se=False)
        assert loglikelihood(em.parameters, ds) == pytest.approx(em.em_trace[-1], abs=1e-12)


class TestRecovery:
    def test_two_regime_recovery(self, two_regime_setup):
        truth = two_regime_setup
        ds, _ = simulate(truth, T=400, seed=7, burn_in=20)
        fit = em_fit(truth.spec, ds, n_restarts=4, seed=1)
        true_c = np.array([r.intercept for r in truth.regimes])
        est_c = np.array([r.intercept for r in fit.regimes])
        perm = best_regime_permutation(est_c, true_c)
        assert np.abs(est_c[perm] - true_c).max() < 0.3
        P_est = fit.transition.matrix[np.ix_(perm, perm)]
        assert np.abs(P_est - truth.transition.matrix).max() < 0.1
        se = fit.standard_errors["intercept"][perm]
        assert np.all(np.abs(est_c[perm] - true_c) <= 4 * se)

    def test_em_trace_monotone(self, two_regime_setup):
        ds, _ = simulate(two_regime_setup, T=300, seed=9, burn_in=20)
        fit = em_fit(two_regime_setup.spec, ds, n_restarts=3, seed=2, compute_se=False)
        diffs = np.diff(fit.em_trace)
        assert diffs.size == 0 or diffs.min() >= -1e-8

    def test_same_seed_identical_estimates(self, two_regime_setup):
        ds, _ = simulate(two_regime_setup, T=250, seed=13, burn_in=20)
        a = em_fit(two_regime_setup.spec, ds, n_restarts=3, seed=5, compute_se=False)
        b = em_fit(two_regime_setup.spec, ds, n_restarts=3, seed=5, compute_se=False)
        for ra, rb in zip(a.regimes, b.regimes):
            assert ra.intercept.tobytes() == rb.intercept.tobytes()
            assert ra.covariance.tobytes() == rb.covariance.tobytes()
        assert a.transition.matrix.tobytes() == b.transition.matrix.tobytes()
        assert a.log_likelihood == b.log_likelihood

    def test_switching_covariance_only(self):
        spec = ModelSpec(
            endogenous=("a",),
            n_regimes=2,
            switching=SwitchingMask(intercept=False, lag_matrices=False,
                                    exog_coefficients=False, covariance=True),
        )
        regimes = (
            make_regime([0.0], np.array([[0.3]]), np.array([[0.2]])),
            make_regime([0.0], np.array([[0.3]]), np.array([[6.0]])),
        )
        truth = MsVarParameters(
            spec=spec, regimes=regimes,
            transition=TransitionMatrix(np.array([[0.95, 0.05], [0.05, 0.95]])),
        )
        ds, _ = simulate(truth, T=600, seed=21, burn_in=30)
        fit = em_fit(spec, ds, n_restarts=4, seed=3, compute_se=False)
        vars_est = sorted(float(r.covariance[0, 0]) for r in fit.regimes)
        assert vars_est[0] == pytest.approx(0.2, rel=0.5)
        assert vars_est[1] == pytest.approx(6.0, rel=0.5)


class TestInvariants:
    def test_permutation_equivariance(self, two_regime_setup):
        ds, _ = simulate(two_regime_setup, T=200, seed=17, burn_in=10)
        base = loglikelihood(two_regime_setup, ds)
        P = two_regime_setup.transition.matrix
        swapped = MsVarParameters(
            spec=two_regime_setup.spec,
            regimes=(two_regime_setup.regimes[1], two_regime_setup.regimes[0]),
            transition=TransitionMatrix(P[np.ix_([1, 0], [1, 0])]),
            initial_distribution=two_regime_setup.initial_law()[[1, 0]],
        )
        assert loglikelihood(swapped, ds) == pytest.approx(base, abs=1e-12)

    def test_probability_rows_in_results(self, two_regime_setup):
        ds, _ = simulate(two_regime_setup, T=250, seed=23, burn_in=10)
        fit = em_fit(two_regime_setup.spec, ds, n_restarts=2, seed=6, compute_se=False)
        np.testing.assert_allclose(fit.smoothed_probs.sum(axis=1), 1.0, atol=1e-10)
        np.testing.assert_allclose(fit.filtered_probs.sum(axis=1), 1.0, atol=1e-10)
        np.testing.assert_allclose(fit.transition.matrix.sum(axis=1), 1.0, atol=1e-12)

    def test_likelihood_consistency_multi_regime(self, two_regime_setup):
        ds, _ = simulate(two_regime_setup, T=250, seed=29, burn_in=10)
        fit = em_fit(two_regime_setup.spec, ds, n_restarts=3, seed=9, compute_se=False)
        assert loglikelihood(fit.parameters, ds) == pytest.approx(fit.em_trace[-1], abs=1e-9)
        assert fit.log_likelihood == fit.em_trace[-1]

    def test_chronological_labeling(self, two_regime_setup):
        # near-absorbing chain starting in the high-mean regime: the regime
        # that is modal earliest must be labeled 0
        params = MsVarParameters(
            spec=two_regime_setup.spec,
            regimes=(two_regime_setup.regimes[1], two_regime_setup.regimes[0]),
            transition=TransitionMatrix(np.array([[0.99, 0.01], [0.0, 1.0]])),
            initial_distribution=np.array([1.0, 0.0]),
        )
        ds, path = simulate(params, T=300, seed=31)
        assert path[0] == 0 and path[-1] == 1  # chain actually switched
        fit = em_fit(two_regime_setup.spec, ds, n_restarts=4, seed=8, compute_se=False)
        modal = np.argmax(fit.smoothed_probs, axis=1)
        assert modal[0] == 0
        first_modal_1 = int(np.argmax(modal == 1))
        assert first_modal_1 > 0

    def test_identifiability_floor(self):
        spec = ModelSpec(
            endogenous=tuple(f"v{i}" for i in range(6)),
            n_regimes=3,
            switching=SwitchingMask(True, True, False, True),
        )
        reg = make_regime(np.zeros(6), np.zeros((6, 6)), np.eye(6))
        params = MsVarParameters(
            spec=ModelSpec(endogenous=spec.endogenous, n_regimes=1,
                           switching=SwitchingMask(False, False, False, False)),
            regimes=(reg,),
            transition=TransitionMatrix(np.ones((1, 1))),
        )
        ds, _ = simulate(params, T=20, seed=2)
        with pytest.raises(EstimationError, match="floor"):
            em_fit(spec, ds, n_restarts=1, seed=0)

    def test_spec_dataset_name_mismatch(self, two_regime_setup):
        ds, _ = simulate(two_regime_setup, T=100, seed=3)
        other = ModelSpec(endogenous=("x", "y"), n_regimes=2)
        with pytest.raises(ConfigError, match="match"):
            em_fit(other, ds)


class TestHigherLagOrder:
    def setup_params(self):
        spec = ModelSpec(
            endogenous=("a", "b"), n_regimes=1, lag_order=2,
            switching=SwitchingMask(False, False, False, False),
        )
        lags = np.stack([
            np.array([[0.4, 0.1], [0.0, 0.3]]),
            np.array([[0.15, 0.0], [0.05, 0.1]]),
        ])
        reg = make_regime([0.3, -0.1], lags, 0.4 * np.eye(2))
        return MsVarParameters(spec=spec, regimes=(reg,),
                               transition=TransitionMatrix(np.ones((1, 1))))

    def test_k1_equivalence_with_two_lags(self):
        truth = self.setup_params()
        ds, _ = simulate(truth, T=400, seed=41, burn_in=50)
        em = em_fit(truth.spec, ds, compute_se=False)
        ols = ols_var_fit(truth.spec, ds)
        assert np.abs(em.regimes[0].lag_matrices - ols.regimes[0].lag_matrices).max() < 1e-6
        assert ds.effective_T == 398

    def test_recovers_both_lag_matrices(self):
        truth = self.setup_params()
        ds, _ = simulate(truth, T=2000, seed=43, burn_in=100)
        fit = ols_var_fit(truth.spec, ds)
        gap = np.abs(fit.regimes[0].lag_matrices - truth.regimes[0].lag_matrices).max()
        assert gap < 0.1
