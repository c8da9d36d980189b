"""Hamilton filter and Kim smoother, computed in log space throughout.

The filter alternates predict (prior times transition) and update (times the
regime-conditional Gaussian density of the VAR innovation), accumulating the
log-likelihood from the per-period normalization constants.  The smoother
runs the standard backward recursion and also returns the pairwise regime
probabilities the EM M-step needs.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.linalg import solve_triangular

from regimevar.exceptions import EstimationError
from regimevar.panel import ModelDataset
from regimevar.msvar._kernels import filter_kernel, smoother_kernel
from regimevar.msvar.model import (
    FilterOutput,
    MsVarParameters,
    TransitionMatrix,
    regression_arrays,
)

__all__ = ["conditional_loglikelihoods", "hamilton_filter", "kim_smoother", "filter_arrays"]

_LOG_2PI = math.log(2.0 * math.pi)


def conditional_loglikelihoods(
    params: MsVarParameters, Y_eff: np.ndarray, Z: np.ndarray, X: np.ndarray
) -> np.ndarray:
    """Per-period Gaussian log density of the VAR innovation under each regime."""
    T, n = Y_eff.shape
    K = params.spec.n_regimes
    out = np.empty((T, K))
    for k, reg in enumerate(params.regimes):
        resid = Y_eff - reg.intercept
        p = reg.n_lags
        for l in range(p):
            resid = resid - Z[:, l * n: (l + 1) * n] @ reg.lag_matrices[l].T
        if reg.n_exog:
            resid = resid - X @ reg.exog_coeffs.T
        try:
            L = np.linalg.cholesky(reg.covariance)
        except np.linalg.LinAlgError as exc:
            raise EstimationError(f"regime {k} covariance is not positive definite") from exc
        white = solve_triangular(L, resid.T, lower=True, check_finite=False)
        with np.errstate(over="ignore"):  # inf quad form means log density -inf
            quad = np.sum(white * white, axis=0)
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        out[:, k] = -0.5 * (n * _LOG_2PI + logdet + quad)
    return out


def filter_arrays(
    logf: np.ndarray, transition: np.ndarray, initial_distribution: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Core forward recursion on precomputed log densities.

    Densities arrive in log space and are exponentiated only after the
    per-period max is subtracted, so no raw-density product can underflow.
    Returns (filtered (T,K), predicted (T,K), per-period log-likelihood (T,)).
    Raises when every regime density underflows at some period.
    """
    logf = np.ascontiguousarray(logf, dtype=float)
    P = np.ascontiguousarray(transition, dtype=float)
    rho = np.ascontiguousarray(initial_distribution, dtype=float).reshape(logf.shape[1])
    filtered, predicted, loglik, bad_t = filter_kernel(logf, P, rho)
    if bad_t >= 0:
        raise EstimationError(
            f"all regime densities underflowed at period {bad_t}; "
            f"model cannot explain y[{bad_t}]"
        )
    return filtered, predicted, loglik


def hamilton_filter(
    params: MsVarParameters,
    data: ModelDataset,
    initial_distribution: np.ndarray | None = None,
) -> FilterOutput:
    """Forward recursion over the dataset's effective sample."""
    Y_eff, Z, X = regression_arrays(data, params.spec.lag_order)
    logf = conditional_loglikelihoods(params, Y_eff, Z, X)
    if initial_distribution is None:
        initial_distribution = params.initial_law()
    filtered, predicted, loglik = filter_arrays(
        logf, params.transition.matrix, initial_distribution
    )
    return FilterOutput(
        filtered_probs=filtered,
        predicted_probs=predicted,
        log_likelihood=float(loglik.sum()),
        conditional_logliks=logf,
        per_period_loglik=loglik,
    )


def kim_smoother(
    filter_output: FilterOutput, transition: TransitionMatrix
) -> tuple[np.ndarray, np.ndarray]:
    """Backward recursion refining filtered into smoothed probabilities.

    Returns (smoothed (T,K), pairwise (T-1,K,K)) where pairwise[t, i, j] is
    Pr(S_t = i, S_{t+1} = j | all data).  Summing pairwise over j recovers the
    smoothed marginal at t; summing over i recovers it at t+1.
    """
    filtered = np.ascontiguousarray(filter_output.filtered_probs, dtype=float)
    predicted = np.ascontiguousarray(filter_output.predicted_probs, dtype=float)
    P = np.ascontiguousarray(transition.matrix, dtype=float)
    smoothed, pairwise, flag = smoother_kernel(filtered, predicted, P)
    if flag < 0:
        raise EstimationError("smoother degenerated to zero probability mass")
    if flag == 1:
        warnings.warn(
            "predicted probabilities were floored at 1e-300 in the Kim smoother",
            RuntimeWarning,
            stacklevel=2,
        )
    return smoothed, pairwise
