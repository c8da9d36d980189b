"""Residual-based two-step cointegration testing.

Stage one is a static OLS of the dependent series on the regressors (QR
factorization, never normal equations); stage two applies a Dickey-Fuller
regression without deterministic terms to the residuals.  The tau p-value
comes from the MacKinnon cointegration surfaces indexed by the number of
integrated series; beyond six regressors only a bracketing interval is
available and the report carries a warning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from regimevar.exceptions import DataError, EstimationError
from regimevar.mackinnon import MAX_POLY_N, dickey_fuller_pvalue
from regimevar.panel import Series
from regimevar.unitroot import _adf_tstat, _as_array, _check_deterministic, _select_lags, default_max_lags

__all__ = ["CointegrationReport", "static_ols", "engle_granger", "classify"]

MIN_OBSERVATIONS = 20

ALPHA_LEVELS = (0.01, 0.05, 0.10)


@dataclass(frozen=True)
class CointegrationReport:
    dependent: str
    regressors: tuple[str, ...]
    tau: float
    p_value: float
    p_interval: tuple[float, float] | None
    residuals: np.ndarray
    ols_coefficients: np.ndarray
    lags_used: int
    observations: int
    deterministic: str
    warning: str | None = None

    def cointegrated_at(self, alpha: float) -> bool:
        return self.p_value < alpha


def classify(report: CointegrationReport) -> str:
    """Human-readable verdict at the conventional significance levels."""
    for alpha in ALPHA_LEVELS:
        if report.cointegrated_at(alpha):
            return f"cointegrated at {int(alpha * 100)}%"
    return "not cointegrated"


def static_ols(
    y, X, include_constant: bool = True, column_names: tuple[str, ...] | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First-stage regression; returns (coefficients, residuals, standard errors).

    The constant, when included, is the last coefficient.  Rank deficiency is
    reported with the name (or index) of the offending column.
    """
    y = _as_array(y)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    T, k = X.shape
    if T != y.shape[0]:
        raise DataError(f"y has {y.shape[0]} rows but X has {T}")
    if T <= k + 1:
        raise DataError(f"need more than {k + 1} observations for {k} regressors, got {T}")
    names = tuple(column_names) if column_names is not None else tuple(f"x{i}" for i in range(k))
    if len(names) != k:
        raise DataError(f"{len(names)} column names for {k} columns")
    design = np.column_stack([X, np.ones(T)]) if include_constant else X

    Q, R = np.linalg.qr(design)
    diag = np.abs(np.diag(R))
    scale = np.linalg.norm(design, axis=0)
    scale[scale == 0] = 1.0
    bad = np.nonzero(diag < 1e-10 * scale)[0]
    if bad.size:
        j = int(bad[0])
        label = names[j] if j < k else "constant"
        raise EstimationError(f"rank-deficient design: column {label!r} is collinear")
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - design @ coef
    sigma2 = float(resid @ resid) / (T - design.shape[1])
    Rinv = np.linalg.solve(R, np.eye(design.shape[1]))
    se = np.sqrt(sigma2 * np.sum(Rinv * Rinv, axis=1))
    return coef, resid, se


def engle_granger(
    y,
    X,
    deterministic: str = "constant",
    max_lags: int | None = None,
    lag_selection: str = "bic",
    dependent_name: str = "y",
    regressor_names: tuple[str, ...] | None = None,
) -> CointegrationReport:
    """Two-step residual cointegration test.

    ``deterministic`` describes the static regression ("none" drops its
    constant); the residual Dickey-Fuller regression never carries
    deterministic terms because residuals are mean zero by construction.
    """
    _check_deterministic(deterministic)
    if deterministic == "constant+trend":
        raise DataError("trend case not supported in the static regression")
    y = _as_array(y)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if y.shape[0] < MIN_OBSERVATIONS:
        raise DataError(
            f"cointegration test needs at least {MIN_OBSERVATIONS} observations, got {y.shape[0]}"
        )
    names = tuple(regressor_names) if regressor_names is not None else tuple(
        f"x{i}" for i in range(X.shape[1])
    )
    include_constant = deterministic == "constant"
    coef, resid, _ = static_ols(y, X, include_constant=include_constant, column_names=names)

    if max_lags is None:
        max_lags = default_max_lags(resid.shape[0])
    if lag_selection == "fixed":
        k = max_lags
    else:
        k = _select_lags(resid, "none", max_lags, lag_selection)
    tau, used_obs, _, _ = _adf_tstat(resid, "none", k)

    n_i1 = X.shape[1] + 1
    pres = dickey_fuller_pvalue(tau, deterministic, n_i1=n_i1, nobs=used_obs)
    warning = None
    if pres.bracketed:
        warning = (
            f"{X.shape[1]} regressors exceed the {MAX_POLY_N - 1}-regressor p-value surface; "
            f"p-value interpolated from critical values, bracket {pres.interval}"
        )
    return CointegrationReport(
        dependent=dependent_name,
        regressors=names,
        tau=tau,
        p_value=pres.p,
        p_interval=pres.interval,
        residuals=resid,
        ols_coefficients=coef,
        lags_used=k,
        observations=used_obs,
        deterministic=deterministic,
        warning=warning,
    )


def engle_granger_each_against_rest(
    panel_series: dict[str, Series] | dict[str, np.ndarray],
    deterministic: str = "constant",
    max_lags: int | None = None,
    lag_selection: str = "bic",
) -> list[CointegrationReport]:
    """Default table mode: one row per variable, regressed on the remaining ones.

    The regressor set per row is an explicit assumption, recorded in each
    report's ``regressors`` field.
    """
    names = sorted(panel_series)
    arrays = {m: _as_array(panel_series[m]) for m in names}
    lengths = {a.shape[0] for a in arrays.values()}
    if len(lengths) != 1:
        raise DataError(f"all series must share one length, got {sorted(lengths)}")
    reports = []
    for dep in names:
        regs = tuple(m for m in names if m != dep)
        X = np.column_stack([arrays[m] for m in regs])
        reports.append(
            engle_granger(
                arrays[dep],
                X,
                deterministic=deterministic,
                max_lags=max_lags,
                lag_selection=lag_selection,
                dependent_name=dep,
                regressor_names=regs,
            )
        )
    return reports
