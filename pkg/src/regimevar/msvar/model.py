"""Model specification and parameter containers for the switching VAR.

Conventions: the VAR equation for regime k is

    y_t = c_k + sum_l A_k[l] y_{t-l} + B_k x_t + e_t,   e_t ~ N(0, Sigma_k)

with row-stochastic transition matrix P, P[i, j] = Pr(regime j at t | regime
i at t-1).  A switching mask marks which parameter blocks vary by regime;
common blocks are stored identically in every regime's parameter set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from regimevar.exceptions import ConfigError, DataError, EstimationError
from regimevar.panel import ModelDataset

__all__ = [
    "SwitchingMask",
    "ModelSpec",
    "RegimeParameterSet",
    "TransitionMatrix",
    "MsVarParameters",
    "FilterOutput",
    "EstimatedMsVar",
    "companion_matrix",
    "regression_arrays",
]

PROB_ROW_TOL = 1e-10
TRANSITION_ROW_TOL = 1e-12


@dataclass(frozen=True)
class SwitchingMask:
    """True marks a block as regime-switching, False as common."""

    intercept: bool = True
    lag_matrices: bool = False
    exog_coefficients: bool = True
    covariance: bool = True

    def any_switching(self) -> bool:
        return self.intercept or self.lag_matrices or self.exog_coefficients or self.covariance

    @classmethod
    def from_dict(cls, d: Mapping) -> "SwitchingMask":
        known = {"intercept", "lag_matrices", "exog_coefficients", "covariance"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown switching mask keys {sorted(unknown)}")
        return cls(**{k: bool(v) for k, v in d.items()})


@dataclass(frozen=True)
class ModelSpec:
    endogenous: tuple[str, ...]
    exogenous: tuple[str, ...] = ()
    lag_order: int = 1
    n_regimes: int = 3
    switching: SwitchingMask = field(default_factory=SwitchingMask)
    identification_ordering: tuple[str, ...] = ()
    include_intercept: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "endogenous", tuple(self.endogenous))
        object.__setattr__(self, "exogenous", tuple(self.exogenous))
        object.__setattr__(self, "identification_ordering", tuple(self.identification_ordering))
        if len(self.endogenous) < 1:
            raise ConfigError("need at least one endogenous variable")
        if len(set(self.endogenous)) != len(self.endogenous):
            raise ConfigError("duplicate endogenous variable names")
        if self.lag_order < 1:
            raise ConfigError(f"lag_order must be >= 1, got {self.lag_order}")
        if self.n_regimes < 1:
            raise ConfigError(f"n_regimes must be >= 1, got {self.n_regimes}")
        if self.n_regimes > 1 and not self.switching.any_switching():
            raise ConfigError("at least one block must switch when n_regimes > 1")
        if self.identification_ordering:
            if sorted(self.identification_ordering) != sorted(self.endogenous):
                raise ConfigError(
                    "identification_ordering must be a permutation of the endogenous names"
                )
        else:
            object.__setattr__(self, "identification_ordering", tuple(self.endogenous))

    @property
    def n_vars(self) -> int:
        return len(self.endogenous)

    @property
    def n_exog(self) -> int:
        return len(self.exogenous)


def _frozen_array(value, shape: tuple[int, ...], what: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.shape != shape:
        raise ConfigError(f"{what}: expected shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ConfigError(f"{what}: contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RegimeParameterSet:
    """Per-regime intercept, lag matrices, exogenous coefficients, covariance."""

    intercept: np.ndarray        # (n,)
    lag_matrices: np.ndarray     # (p, n, n)
    exog_coeffs: np.ndarray      # (n, m)
    covariance: np.ndarray       # (n, n), symmetric positive definite

    def __post_init__(self) -> None:
        inter = np.atleast_1d(np.array(self.intercept, dtype=float))
        n = inter.shape[0]
        lags = np.array(self.lag_matrices, dtype=float)
        if lags.ndim == 2:
            lags = lags[None, :, :]
        exog = np.array(self.exog_coeffs, dtype=float)
        if exog.ndim == 1:
            exog = exog.reshape(n, -1) if exog.size else np.zeros((n, 0))
        cov = np.array(self.covariance, dtype=float)
        object.__setattr__(self, "intercept", _frozen_array(inter, (n,), "intercept"))
        object.__setattr__(
            self, "lag_matrices", _frozen_array(lags, (lags.shape[0], n, n), "lag_matrices")
        )
        object.__setattr__(self, "exog_coeffs", _frozen_array(exog, (n, exog.shape[1]), "exog_coeffs"))
        if cov.shape != (n, n):
            raise ConfigError(f"covariance: expected shape {(n, n)}, got {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-12 * max(1.0, float(np.abs(cov).max()))):
            raise ConfigError("covariance must be symmetric")
        min_eig = float(np.linalg.eigvalsh(cov).min())
        if min_eig <= 0:
            raise ConfigError(f"covariance must be positive definite (min eigenvalue {min_eig:g})")
        object.__setattr__(self, "covariance", _frozen_array(cov, (n, n), "covariance"))

    @property
    def n_vars(self) -> int:
        return self.intercept.shape[0]

    @property
    def n_lags(self) -> int:
        return self.lag_matrices.shape[0]

    @property
    def n_exog(self) -> int:
        return self.exog_coeffs.shape[1]


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic K x K matrix; P[i, j] = Pr(move from regime i to j)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        P = np.array(self.matrix, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ConfigError(f"transition matrix must be square, got shape {P.shape}")
        if np.any(P < -TRANSITION_ROW_TOL) or np.any(P > 1 + TRANSITION_ROW_TOL):
            raise ConfigError("transition probabilities must lie in [0, 1]")
        row_sums = P.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > TRANSITION_ROW_TOL):
            raise ConfigError(f"transition rows must sum to 1 within {TRANSITION_ROW_TOL}")
        P.setflags(write=False)
        object.__setattr__(self, "matrix", P)

    @property
    def n_regimes(self) -> int:
        return self.matrix.shape[0]

    def stationary_distribution(self) -> np.ndarray:
        """Ergodic distribution: left eigenvector of P at eigenvalue 1."""
        K = self.n_regimes
        if K == 1:
            return np.ones(1)
        A = np.vstack([self.matrix.T - np.eye(K), np.ones((1, K))])
        b = np.zeros(K + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        pi = np.clip(pi, 0.0, None)
        total = pi.sum()
        if total <= 0:
            return np.full(K, 1.0 / K)
        return pi / total


@dataclass(frozen=True)
class MsVarParameters:
    """Full parameter bundle: spec, per-regime parameters, transition, initial law."""

    spec: ModelSpec
    regimes: tuple[RegimeParameterSet, ...]
    transition: TransitionMatrix
    initial_distribution: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "regimes", tuple(self.regimes))
        if len(self.regimes) != self.spec.n_regimes:
            raise ConfigError(
                f"{len(self.regimes)} regime parameter sets for n_regimes={self.spec.n_regimes}"
            )
        if self.transition.n_regimes != self.spec.n_regimes:
            raise ConfigError("transition matrix size does not match n_regimes")
        n, p, m = self.spec.n_vars, self.spec.lag_order, self.spec.n_exog
        for k, reg in enumerate(self.regimes):
            if reg.n_vars != n or reg.n_lags != p or reg.n_exog != m:
                raise ConfigError(
                    f"regime {k} parameter shapes (n={reg.n_vars}, p={reg.n_lags}, m={reg.n_exog}) "
                    f"do not match spec (n={n}, p={p}, m={m})"
                )
        if self.initial_distribution is not None:
            rho = np.array(self.initial_distribution, dtype=float)
            if rho.shape != (self.spec.n_regimes,):
                raise ConfigError(f"initial distribution must have shape ({self.spec.n_regimes},)")
            if np.any(rho < 0) or abs(float(rho.sum()) - 1.0) > 1e-9:
                raise ConfigError("initial distribution must be a probability vector")
            rho.setflags(write=False)
            object.__setattr__(self, "initial_distribution", rho)

    def initial_law(self) -> np.ndarray:
        if self.initial_distribution is not None:
            return self.initial_distribution
        return self.transition.stationary_distribution()


def _check_prob_rows(arr: np.ndarray, what: str, tol: float = PROB_ROW_TOL) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if np.any(np.abs(arr.sum(axis=1) - 1.0) > tol):
        worst = float(np.abs(arr.sum(axis=1) - 1.0).max())
        raise EstimationError(f"{what}: probability rows deviate from 1 by {worst:g}")
    return arr


@dataclass(frozen=True)
class FilterOutput:
    """Hamilton-filter outputs; all probability rows sum to one."""

    filtered_probs: np.ndarray        # (T, K)
    predicted_probs: np.ndarray       # (T, K)
    log_likelihood: float
    conditional_logliks: np.ndarray   # (T, K) per-regime log densities
    per_period_loglik: np.ndarray     # (T,)

    def __post_init__(self) -> None:
        filt = _check_prob_rows(self.filtered_probs, "filtered_probs")
        pred = _check_prob_rows(self.predicted_probs, "predicted_probs")
        if not np.isfinite(self.log_likelihood):
            raise EstimationError("non-finite log-likelihood")
        for name, value in (("filtered_probs", filt), ("predicted_probs", pred)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_obs(self) -> int:
        return self.filtered_probs.shape[0]


@dataclass(frozen=True)
class EstimatedMsVar:
    """Estimation result: parameters, regime probabilities, and EM diagnostics."""

    spec: ModelSpec
    regimes: tuple[RegimeParameterSet, ...]
    transition: TransitionMatrix
    initial_distribution: np.ndarray
    smoothed_probs: np.ndarray
    filtered_probs: np.ndarray
    log_likelihood: float
    em_trace: tuple[float, ...]
    converged: bool
    restarts_used: int
    standard_errors: dict[str, np.ndarray] | None = None
    se_method: str = "opg-numerical (approximate)"

    def __post_init__(self) -> None:
        object.__setattr__(self, "regimes", tuple(self.regimes))
        sm = _check_prob_rows(self.smoothed_probs, "smoothed_probs")
        fp = _check_prob_rows(self.filtered_probs, "filtered_probs")
        sm.setflags(write=False)
        fp.setflags(write=False)
        object.__setattr__(self, "smoothed_probs", sm)
        object.__setattr__(self, "filtered_probs", fp)
        trace = tuple(float(v) for v in self.em_trace)
        diffs = np.diff(trace)
        if diffs.size and float(diffs.min()) < -1e-8:
            raise EstimationError(
                f"EM trace decreased by {-float(diffs.min()):g}, beyond the 1e-8 slack"
            )
        object.__setattr__(self, "em_trace", trace)
        rho = np.array(self.initial_distribution, dtype=float)
        rho.setflags(write=False)
        object.__setattr__(self, "initial_distribution", rho)

    @property
    def parameters(self) -> MsVarParameters:
        return MsVarParameters(
            spec=self.spec,
            regimes=self.regimes,
            transition=self.transition,
            initial_distribution=self.initial_distribution,
        )

    @property
    def n_regimes(self) -> int:
        return self.spec.n_regimes


def companion_matrix(lag_matrices: np.ndarray) -> np.ndarray:
    """Stack (p, n, n) lag matrices into the (np, np) companion form."""
    lags = np.asarray(lag_matrices, dtype=float)
    if lags.ndim == 2:
        lags = lags[None, :, :]
    p, n, _ = lags.shape
    F = np.zeros((n * p, n * p))
    F[:n, :] = np.concatenate([lags[l] for l in range(p)], axis=1)
    if p > 1:
        F[n:, :-n] = np.eye(n * (p - 1))
    return F


def regression_arrays(dataset: ModelDataset, lag_order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Transform a dataset into (Y_eff, Z, X): response rows, stacked lags, exog.

    Row t of Z is [y_{t-1}, ..., y_{t-p}] concatenated; the first ``lag_order``
    rows of the raw data are consumed as presample.
    """
    Y = np.asarray(dataset.Y, dtype=float)
    T_rows = Y.shape[0]
    if T_rows <= lag_order:
        raise DataError(f"dataset has {T_rows} rows; need more than lag order {lag_order}")
    Y_eff = Y[lag_order:]
    Z = np.column_stack([Y[lag_order - l: T_rows - l] for l in range(1, lag_order + 1)])
    X = np.asarray(dataset.X_exog, dtype=float)[lag_order:]
    return Y_eff, Z, X
