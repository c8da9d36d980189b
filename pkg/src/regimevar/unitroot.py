"""Unit-root tests and their panel combinations.

ADF: t-ratio on the lagged level in the augmented regression
``dy_t = det + gamma*y_{t-1} + sum phi_i dy_{t-i} + e_t`` with BIC/AIC/fixed
lag selection.  PP: Z-tau with a Bartlett-kernel Newey-West long-run
variance.  Fisher: -2*sum(log p) against chi-square(2N).  IPS: standardized
mean t-ratio whose null moments come from a seeded Monte Carlo at the
observed sample size, cached per configuration.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2, norm

from regimevar.exceptions import ConfigError, DataError, EstimationError
from regimevar.mackinnon import dickey_fuller_pvalue
from regimevar.panel import Series, SeriesTransformPlan, TimeSeriesPanel, difference

__all__ = [
    "UnitRootReport",
    "CombinedReport",
    "StationarityTable",
    "adf_test",
    "pp_test",
    "fisher_combine",
    "ips_test",
    "stationarity_pipeline",
    "default_max_lags",
    "default_bandwidth",
]

DETERMINISTIC_CHOICES = ("none", "constant", "constant+trend")
P_FLOOR = 1e-8  # applied before Fisher combination to avoid log divergence

NOT_COMPUTED_METHODS = ("Levin, Lin & Chu t*", "Breitung t-stat")


@dataclass(frozen=True)
class UnitRootReport:
    test_name: str
    deterministic: str
    statistic: float
    p_value: float
    lags_used: int
    observations: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise EstimationError(f"p-value {self.p_value} outside [0, 1]")
        if self.observations <= 0 or self.lags_used < 0:
            raise EstimationError("invalid sample bookkeeping in unit-root report")


@dataclass(frozen=True)
class CombinedReport:
    method: str
    statistic: float
    p_value: float
    cross_sections: int
    observations: int
    per_series: tuple[UnitRootReport, ...] = field(repr=False, default=())

    def __post_init__(self) -> None:
        if self.per_series and self.cross_sections != len(self.per_series):
            raise EstimationError("cross_sections must equal the number of per-series reports")


def default_max_lags(nobs: int) -> int:
    return int(math.floor(12.0 * (nobs / 100.0) ** 0.25))


def default_bandwidth(nobs: int) -> int:
    return int(math.floor(4.0 * (nobs / 100.0) ** (2.0 / 9.0)))


def _as_array(series) -> np.ndarray:
    if isinstance(series, Series):
        return series.to_array()
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"expected 1-d series, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DataError("series contains missing or non-finite values")
    return arr


def _check_deterministic(deterministic: str) -> str:
    if deterministic not in DETERMINISTIC_CHOICES:
        raise ConfigError(
            f"unknown deterministic spec {deterministic!r}; expected one of {DETERMINISTIC_CHOICES}"
        )
    return deterministic


def _ols(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """OLS via QR; returns (coef, se, resid, sigma2). Raises on rank deficiency."""
    T, p = X.shape
    if T <= p:
        raise DataError(f"regression needs more rows ({T}) than columns ({p})")
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    if np.any(diag < 1e-10 * scale):
        bad = int(np.argmin(diag / scale))
        raise EstimationError(f"singular regression: design column {bad} is collinear or constant")
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    sigma2 = ssr / (T - p)
    scale = float(y @ y) + np.finfo(float).tiny
    if not np.isfinite(sigma2) or ssr <= 1e-24 * scale:
        raise EstimationError("singular regression: residual variance is numerically zero")
    Rinv = np.linalg.solve(R, np.eye(p))
    xtx_inv_diag = np.sum(Rinv * Rinv, axis=1)
    se = np.sqrt(sigma2 * xtx_inv_diag)
    return coef, se, resid, sigma2


def _adf_design(y: np.ndarray, deterministic: str, k: int, start: int):
    """Rows i = start..N-2 of the augmented DF regression with k diff lags.

    Column 0 is the lagged level; diff lags follow; deterministic terms last.
    """
    dy = np.diff(y)
    n_full = dy.shape[0]
    rows = np.arange(start, n_full)
    response = dy[rows]
    cols = [y[rows]]
    for j in range(1, k + 1):
        cols.append(dy[rows - j])
    if deterministic in ("constant", "constant+trend"):
        cols.append(np.ones(rows.shape[0]))
    if deterministic == "constant+trend":
        cols.append(rows.astype(float))
    return response, np.column_stack(cols)


def _adf_tstat(y: np.ndarray, deterministic: str, k: int) -> tuple[float, int, np.ndarray, float]:
    response, X = _adf_design(y, deterministic, k, start=k)
    coef, se, resid, sigma2 = _ols(response, X)
    return float(coef[0] / se[0]), response.shape[0], resid, float(se[0])


def _select_lags(y: np.ndarray, deterministic: str, max_lags: int, criterion: str) -> int:
    """Pick the diff-lag count minimizing AIC/BIC on a common sample."""
    best_ic = np.inf
    best_k = 0
    for k in range(max_lags + 1):
        response, X = _adf_design(y, deterministic, k, start=max_lags)
        try:
            _, _, resid, _ = _ols(response, X)
        except EstimationError:
            continue
        T = response.shape[0]
        ssr = float(resid @ resid)
        if ssr <= 0:
            ssr = np.finfo(float).tiny
        penalty = 2.0 if criterion == "aic" else math.log(T)
        ic = T * math.log(ssr / T) + penalty * X.shape[1]
        if ic < best_ic:
            best_ic = ic
            best_k = k
    if not np.isfinite(best_ic):
        raise EstimationError("lag selection failed: every candidate regression was singular")
    return best_k


def adf_test(
    series,
    deterministic: str = "constant",
    max_lags: int | None = None,
    lag_selection: str = "bic",
) -> UnitRootReport:
    """Augmented Dickey-Fuller test with MacKinnon response-surface p-value."""
    _check_deterministic(deterministic)
    if lag_selection not in ("fixed", "aic", "bic"):
        raise ConfigError(f"lag_selection must be fixed/aic/bic, got {lag_selection!r}")
    y = _as_array(series)
    nobs = y.shape[0]
    if max_lags is None:
        max_lags = default_max_lags(nobs)
    if max_lags < 0:
        raise ConfigError(f"max_lags must be >= 0, got {max_lags}")
    if nobs < max_lags + 10:
        raise DataError(f"series too short for ADF: length {nobs} < max_lags {max_lags} + 10")

    if lag_selection == "fixed":
        k = max_lags
    else:
        k = _select_lags(y, deterministic, max_lags, lag_selection)
    stat, used_obs, _, _ = _adf_tstat(y, deterministic, k)
    p = dickey_fuller_pvalue(stat, deterministic, n_i1=1, nobs=used_obs).p
    return UnitRootReport(
        test_name="ADF",
        deterministic=deterministic,
        statistic=stat,
        p_value=p,
        lags_used=k,
        observations=used_obs,
    )


def pp_test(series, deterministic: str = "constant", bandwidth: int | None = None) -> UnitRootReport:
    """Phillips-Perron Z-tau test (Bartlett-kernel long-run variance)."""
    _check_deterministic(deterministic)
    y = _as_array(series)
    nobs = y.shape[0]
    if bandwidth is None:
        bandwidth = default_bandwidth(nobs)
    if bandwidth < 0:
        raise ConfigError(f"bandwidth must be >= 0, got {bandwidth}")
    if nobs < 10:
        raise DataError(f"series too short for PP: length {nobs}")

    response, X = _adf_design(y, deterministic, k=0, start=0)
    coef, se, resid, sigma2 = _ols(response, X)
    n = response.shape[0]
    if bandwidth >= n:
        raise DataError(f"bandwidth {bandwidth} must be below the regression sample size {n}")
    tstat = float(coef[0] / se[0])
    gamma0 = float(resid @ resid) / n
    lam2 = gamma0
    for j in range(1, bandwidth + 1):
        cov_j = float(resid[j:] @ resid[:-j]) / n
        lam2 += 2.0 * (1.0 - j / (bandwidth + 1.0)) * cov_j
    if lam2 <= 0:
        raise EstimationError("nonpositive long-run variance estimate in PP test")
    s = math.sqrt(sigma2)
    z_tau = math.sqrt(gamma0 / lam2) * tstat - (lam2 - gamma0) * n * float(se[0]) / (
        2.0 * math.sqrt(lam2) * s
    )
    p = dickey_fuller_pvalue(z_tau, deterministic, n_i1=1, nobs=n).p
    return UnitRootReport(
        test_name="PP",
        deterministic=deterministic,
        statistic=z_tau,
        p_value=p,
        lags_used=bandwidth,
        observations=n,
    )


def fisher_combine(reports: list[UnitRootReport] | tuple[UnitRootReport, ...]) -> CombinedReport:
    """Fisher chi-square combination: -2*sum(log p_i) with 2N df."""
    if not reports:
        raise DataError("fisher_combine needs at least one report")
    for r in reports:
        if r.p_value == 0.0:
            raise EstimationError(
                "p-value of exactly 0 diverges under the log; floor p-values before combining"
            )
        if not 0.0 < r.p_value <= 1.0:
            raise EstimationError(f"p-value {r.p_value} outside (0, 1]")
    stat = -2.0 * sum(math.log(r.p_value) for r in reports)
    dof = 2 * len(reports)
    p = float(chi2.sf(stat, dof))
    method = f"Fisher-{reports[0].test_name}" if len({r.test_name for r in reports}) == 1 else "Fisher"
    return CombinedReport(
        method=method,
        statistic=stat,
        p_value=p,
        cross_sections=len(reports),
        observations=sum(r.observations for r in reports),
        per_series=tuple(reports),
    )


_IPS_MOMENT_CACHE: dict[tuple, tuple[float, float]] = {}
_IPS_CACHE_LOCK = threading.Lock()
IPS_MOMENT_SEED = 20240811
IPS_MOMENT_SIMS = 2000


def _ips_null_moments(
    nobs: int,
    deterministic: str,
    max_lags: int,
    lag_selection: str,
    n_sims: int,
    seed: int,
    allow_simulation: bool,
) -> tuple[float, float]:
    """Mean and variance of the ADF t-ratio under a pure random walk.

    Simulated once per configuration and cached; safe for concurrent reads
    with single-writer population.
    """
    key = (nobs, deterministic, max_lags, lag_selection, n_sims, seed)
    with _IPS_CACHE_LOCK:
        if key in _IPS_MOMENT_CACHE:
            return _IPS_MOMENT_CACHE[key]
    if not allow_simulation:
        raise EstimationError(
            f"IPS null moments for T={nobs}, deterministic={deterministic!r} are not cached "
            "and simulation is disabled"
        )
    rng = np.random.default_rng(seed)
    stats = np.empty(n_sims)
    for i in range(n_sims):
        walk = np.cumsum(rng.standard_normal(nobs))
        if lag_selection == "fixed":
            k = max_lags
        else:
            k = _select_lags(walk, deterministic, max_lags, lag_selection)
        stats[i], _, _, _ = _adf_tstat(walk, deterministic, k)
    moments = (float(np.mean(stats)), float(np.var(stats, ddof=1)))
    with _IPS_CACHE_LOCK:
        _IPS_MOMENT_CACHE.setdefault(key, moments)
    return moments


def ips_test(
    series_list,
    deterministic: str = "constant",
    max_lags: int | None = None,
    lag_selection: str = "bic",
    seed: int = IPS_MOMENT_SEED,
    n_sims: int = IPS_MOMENT_SIMS,
    allow_simulation: bool = True,
) -> CombinedReport:
    """Im-Pesaran-Shin W statistic from the mean of per-series ADF t-ratios."""
    _check_deterministic(deterministic)
    arrays = [_as_array(s) for s in series_list]
    if len(arrays) < 2:
        raise DataError(f"IPS needs at least 2 series, got {len(arrays)}")
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) != 1:
        raise DataError(f"IPS requires equal series lengths after trimming, got {sorted(lengths)}")
    nobs = lengths.pop()
    if max_lags is None:
        max_lags = default_max_lags(nobs)

    reports = [
        adf_test(a, deterministic=deterministic, max_lags=max_lags, lag_selection=lag_selection)
        for a in arrays
    ]
    tbar = float(np.mean([r.statistic for r in reports]))
    mean_t, var_t = _ips_null_moments(
        nobs, deterministic, max_lags, lag_selection, n_sims, seed, allow_simulation
    )
    if var_t <= 0:
        raise EstimationError("degenerate simulated variance for IPS null moments")
    n_series = len(arrays)
    w_stat = math.sqrt(n_series) * (tbar - mean_t) / math.sqrt(var_t)
    p = float(norm.cdf(w_stat))
    return CombinedReport(
        method="IPS",
        statistic=w_stat,
        p_value=p,
        cross_sections=n_series,
        observations=sum(r.observations for r in reports),
        per_series=tuple(reports),
    )


@dataclass(frozen=True)
class StationarityTable:
    """Combined test blocks at level and after one further first difference."""

    country_id: str
    level: tuple[CombinedReport, ...]
    first_difference: tuple[CombinedReport, ...]


def _floored(report: UnitRootReport) -> UnitRootReport:
    if report.p_value >= P_FLOOR:
        return report
    return UnitRootReport(
        test_name=report.test_name,
        deterministic=report.deterministic,
        statistic=report.statistic,
        p_value=P_FLOOR,
        lags_used=report.lags_used,
        observations=report.observations,
    )


def _combined_block(
    arrays: list[np.ndarray],
    deterministic: str,
    max_lags: int | None,
    lag_selection: str,
    bandwidth: int | None,
    seed: int,
) -> tuple[CombinedReport, ...]:
    adf_reports = [
        _floored(adf_test(a, deterministic=deterministic, max_lags=max_lags, lag_selection=lag_selection))
        for a in arrays
    ]
    pp_reports = [_floored(pp_test(a, deterministic=deterministic, bandwidth=bandwidth)) for a in arrays]
    return (
        fisher_combine(adf_reports),
        fisher_combine(pp_reports),
        ips_test(
            arrays,
            deterministic=deterministic,
            max_lags=max_lags,
            lag_selection=lag_selection,
            seed=seed,
        ),
    )


def stationarity_pipeline(
    panel: TimeSeriesPanel,
    plan: SeriesTransformPlan,
    deterministic: str = "constant",
    max_lags: int | None = None,
    lag_selection: str = "bic",
    bandwidth: int | None = None,
    seed: int = IPS_MOMENT_SEED,
) -> StationarityTable:
    """Run the combined unit-root block at level and at first difference."""
    transformed = plan.apply(panel)
    names = sorted(transformed.series)
    if not names:
        raise DataError(f"panel {panel.country_id!r} has no series")
    level_arrays = [transformed.series[m].to_array() for m in names]
    diff_arrays = [difference(transformed.series[m], 1).to_array() for m in names]
    return StationarityTable(
        country_id=panel.country_id,
        level=_combined_block(level_arrays, deterministic, max_lags, lag_selection, bandwidth, seed),
        first_difference=_combined_block(
            diff_arrays, deterministic, max_lags, lag_selection, bandwidth, seed
        ),
    )
