"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

from itertools import permutations

import numpy as np
import pytest

from regimevar.msvar.model import (
    EstimatedMsVar,
    ModelSpec,
    MsVarParameters,
    RegimeParameterSet,
    SwitchingMask,
    TransitionMatrix,
)


def make_regime(intercept, lag, cov, exog=None) -> RegimeParameterSet:
    intercept = np.atleast_1d(np.asarray(intercept, dtype=float))
    n = intercept.shape[0]
    if exog is None:
        exog = np.zeros((n, 0))
    return RegimeParameterSet(
        intercept=intercept,
        lag_matrices=np.asarray(lag, dtype=float),
        exog_coeffs=np.asarray(exog, dtype=float),
        covariance=np.asarray(cov, dtype=float),
    )


def wrap_estimated(spec: ModelSpec, regimes, transition, T: int = 8) -> EstimatedMsVar:
    """Minimal EstimatedMsVar around known parameters, for analysis tests."""
    K = spec.n_regimes
    probs = np.full((T, K), 1.0 / K)
    return EstimatedMsVar(
        spec=spec,
        regimes=tuple(regimes),
        transition=TransitionMatrix(np.asarray(transition, dtype=float)),
        initial_distribution=np.full(K, 1.0 / K),
        smoothed_probs=probs,
        filtered_probs=probs,
        log_likelihood=0.0,
        em_trace=(0.0,),
        converged=True,
        restarts_used=1,
    )


def best_regime_permutation(estimated_intercepts, true_intercepts):
    """Permutation of estimated regimes minimizing intercept distance to truth."""
    est = np.asarray(estimated_intercepts, dtype=float)
    true = np.asarray(true_intercepts, dtype=float)
    K = est.shape[0]
    best, best_d = None, np.inf
    for perm in permutations(range(K)):
        d = float(np.sum((est[list(perm)] - true) ** 2))
        if d < best_d:
            best, best_d = list(perm), d
    return best


@pytest.fixture
def two_regime_setup():
    """Well-separated 2-variable, 2-regime model with common lag matrix."""
    spec = ModelSpec(
        endogenous=("a", "b"),
        n_regimes=2,
        switching=SwitchingMask(
            intercept=True, lag_matrices=False, exog_coefficients=False, covariance=True
        ),
    )
    A = np.array([[0.3, 0.05], [0.0, 0.2]])
    regimes = (
        make_regime([0.0, 0.0], A, 0.25 * np.eye(2)),
        make_regime([4.0, -4.0], A, 0.5 * np.eye(2)),
    )
    transition = TransitionMatrix(np.array([[0.95, 0.05], [0.05, 0.95]]))
    return MsVarParameters(spec=spec, regimes=regimes, transition=transition)
