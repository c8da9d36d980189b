"""Post-estimation analytics: regime dating, impulse responses, variance
decomposition, and the cross-country comparison tables.

Identification is recursive (Cholesky) under an explicit variable ordering;
the ordering travels with every result so no table can be read without
knowing it.  Regime-conditional IRFs hold the regime fixed across horizons;
the "ergodic" variant averages per-regime surfaces under the transition
matrix's stationary distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from regimevar.exceptions import ConfigError
from regimevar.msvar.model import EstimatedMsVar, companion_matrix

__all__ = [
    "RegimeEpisode",
    "RegimeChronology",
    "IrfSurface",
    "FevdTable",
    "ComparisonTable",
    "regime_dates",
    "irf",
    "fevd",
    "covid_shock_table",
    "fiscal_impact_table",
]

DEFAULT_HOUSEHOLD_VARIABLES = ("hc", "hdi", "impc", "mpc")
DEFAULT_FISCAL_VARIABLES = ("cgd", "exp", "rev", "sub")


@dataclass(frozen=True)
class RegimeEpisode:
    regime: int
    start_year: int
    end_year: int
    mean_probability: float


@dataclass(frozen=True)
class RegimeChronology:
    years: tuple[int, ...]
    modal_regime: tuple[int, ...]
    episodes: tuple[RegimeEpisode, ...]


@dataclass(frozen=True)
class IrfSurface:
    regime: int | str                 # regime index or "ergodic"
    shock_variable: str
    responses: np.ndarray             # (H+1, n)
    ordering: tuple[str, ...]
    variable_names: tuple[str, ...]
    non_decaying: bool
    shock_size: float = 1.0           # in standard deviations of the shock

    @property
    def horizon(self) -> int:
        return self.responses.shape[0] - 1


@dataclass(frozen=True)
class FevdTable:
    regime: int
    shares: np.ndarray                # (H, n, n): [horizon, response var, shock]
    forecast_std_errors: np.ndarray   # (H, n)
    ordering: tuple[str, ...]
    variable_names: tuple[str, ...]


@dataclass(frozen=True)
class ComparisonTable:
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


def regime_dates(model: EstimatedMsVar, year_index: Sequence[int]) -> RegimeChronology:
    """Modal regime per period, merged into contiguous episodes."""
    probs = model.smoothed_probs
    years = tuple(int(y) for y in year_index)
    if len(years) != probs.shape[0]:
        raise ConfigError(
            f"year index has {len(years)} entries for {probs.shape[0]} smoothed periods"
        )
    modal = np.argmax(probs, axis=1)
    episodes = []
    start = 0
    for t in range(1, len(years) + 1):
        if t == len(years) or modal[t] != modal[start]:
            block = probs[start:t, modal[start]]
            episodes.append(
                RegimeEpisode(
                    regime=int(modal[start]),
                    start_year=years[start],
                    end_year=years[t - 1],
                    mean_probability=float(block.mean()),
                )
            )
            start = t
    return RegimeChronology(
        years=years,
        modal_regime=tuple(int(v) for v in modal),
        episodes=tuple(episodes),
    )


def _ordering_indices(model: EstimatedMsVar, ordering: Sequence[str] | None) -> np.ndarray:
    names = model.spec.endogenous
    ordering = tuple(ordering) if ordering is not None else model.spec.identification_ordering
    if sorted(ordering) != sorted(names):
        raise ConfigError(f"ordering {ordering} is not a permutation of {names}")
    return np.array([names.index(v) for v in ordering], dtype=int), ordering


def _impact_matrix(covariance: np.ndarray, ord_idx: np.ndarray) -> np.ndarray:
    """Cholesky factor under the ordering, mapped back to original coordinates.

    Column j (original index of the j-th shock) holds the one-standard-
    deviation impact vector of that shock.
    """
    sigma_perm = covariance[np.ix_(ord_idx, ord_idx)]
    L = np.linalg.cholesky(sigma_perm)
    n = covariance.shape[0]
    B = np.zeros((n, n))
    B[np.ix_(ord_idx, ord_idx)] = L
    return B


def _regime_irf_matrix(model: EstimatedMsVar, regime: int, horizon: int, ord_idx: np.ndarray):
    """All-shock responses: (H+1, n, n) array indexed [h, response, shock]."""
    reg = model.regimes[regime]
    n = model.spec.n_vars
    B = _impact_matrix(reg.covariance, ord_idx)
    F = companion_matrix(reg.lag_matrices)
    spectral_radius = float(np.abs(np.linalg.eigvals(F)).max())
    out = np.empty((horizon + 1, n, n))
    state = np.zeros((F.shape[0], n))
    state[:n] = B
    out[0] = B
    for h in range(1, horizon + 1):
        state = F @ state
        out[h] = state[:n]
    return out, spectral_radius


def irf(
    model: EstimatedMsVar,
    regime: int | str,
    shock_variable: str,
    horizon: int,
    ordering: Sequence[str] | None = None,
) -> IrfSurface:
    """Regime-conditional impulse responses to a one-SD orthogonalized shock."""
    if horizon < 0:
        raise ConfigError(f"horizon must be >= 0, got {horizon}")
    names = model.spec.endogenous
    if shock_variable not in names:
        raise ConfigError(f"unknown shock variable {shock_variable!r}; endogenous: {names}")
    ord_idx, ordering_used = _ordering_indices(model, ordering)
    shock_col = names.index(shock_variable)

    if regime == "ergodic":
        weights = model.transition.stationary_distribution()
        responses = np.zeros((horizon + 1, len(names)))
        non_decaying = False
        for k in range(model.n_regimes):
            mats, sr = _regime_irf_matrix(model, k, horizon, ord_idx)
            responses += weights[k] * mats[:, :, shock_col]
            non_decaying = non_decaying or sr >= 1.0
    else:
        regime = int(regime)
        if not 0 <= regime < model.n_regimes:
            raise ConfigError(f"regime {regime} out of range for K={model.n_regimes}")
        mats, sr = _regime_irf_matrix(model, regime, horizon, ord_idx)
        responses = mats[:, :, shock_col]
        non_decaying = sr >= 1.0

    return IrfSurface(
        regime=regime,
        shock_variable=shock_variable,
        responses=responses,
        ordering=ordering_used,
        variable_names=names,
        non_decaying=non_decaying,
    )


def fevd(
    model: EstimatedMsVar,
    regime: int,
    horizon: int,
    ordering: Sequence[str] | None = None,
) -> FevdTable:
    """Orthogonalized forecast-error variance decomposition for one regime.

    ``shares[h-1, i, j]`` is the fraction of variable i's h-step forecast
    error variance attributed to shock j; each row sums to one.
    """
    if horizon < 1:
        raise ConfigError(f"FEVD horizon must be >= 1, got {horizon}")
    regime = int(regime)
    if not 0 <= regime < model.n_regimes:
        raise ConfigError(f"regime {regime} out of range for K={model.n_regimes}")
    ord_idx, ordering_used = _ordering_indices(model, ordering)
    mats, _ = _regime_irf_matrix(model, regime, horizon - 1, ord_idx)
    squared = mats**2
    cum = np.cumsum(squared, axis=0)        # (H, n response, n shock)
    mse = cum.sum(axis=2)                   # (H, n)
    shares = cum / mse[:, :, None]
    return FevdTable(
        regime=regime,
        shares=shares,
        forecast_std_errors=np.sqrt(mse),
        ordering=ordering_used,
        variable_names=model.spec.endogenous,
    )


def covid_shock_table(
    models: Mapping[str, EstimatedMsVar],
    variables: Sequence[str] = DEFAULT_HOUSEHOLD_VARIABLES,
    shock_name: str = "covid",
) -> ComparisonTable:
    """Regime-specific dummy-shock coefficients per country and variable."""
    columns = ("country", "regime") + tuple(variables)
    rows = []
    for country in sorted(models):
        model = models[country]
        spec = model.spec
        if shock_name not in spec.exogenous:
            raise ConfigError(f"{country}: exogenous {shock_name!r} not in model ({spec.exogenous})")
        exog_col = spec.exogenous.index(shock_name)
        for v in variables:
            if v not in spec.endogenous:
                raise ConfigError(f"{country}: variable {v!r} not in model ({spec.endogenous})")
        for k in range(model.n_regimes):
            coeffs = model.regimes[k].exog_coeffs[:, exog_col]
            row = [country, k + 1]
            for v in variables:
                row.append(float(coeffs[spec.endogenous.index(v)]))
            rows.append(tuple(row))
    return ComparisonTable(
        title=f"{shock_name} shock coefficients by country and regime",
        columns=columns,
        rows=tuple(rows),
    )


def fiscal_impact_table(
    models: Mapping[str, EstimatedMsVar],
    fiscal_variables: Sequence[str] = DEFAULT_FISCAL_VARIABLES,
    household_variables: Sequence[str] = DEFAULT_HOUSEHOLD_VARIABLES,
) -> ComparisonTable:
    """Lagged fiscal-variable coefficients on the household block.

    Uses the common lag block; a model with switching lag matrices
    contributes one row group per regime instead.
    """
    countries = sorted(models)
    columns = ["regressor", "regime"]
    for country in countries:
        for v in household_variables:
            columns.append(f"{country}:{v}")
    rows = []
    any_model = models[countries[0]]
    for country in countries:
        spec = models[country].spec
        for v in tuple(fiscal_variables) + tuple(household_variables):
            if v not in spec.endogenous:
                raise ConfigError(f"{country}: variable {v!r} not in model ({spec.endogenous})")

    def lag_blocks(model: EstimatedMsVar):
        if model.spec.switching.lag_matrices and model.n_regimes > 1:
            return [(str(k + 1), model.regimes[k].lag_matrices[0]) for k in range(model.n_regimes)]
        return [("common", model.regimes[0].lag_matrices[0])]

    n_groups = {len(lag_blocks(models[c])) for c in countries}
    if len(n_groups) != 1:
        raise ConfigError("models disagree on whether lag matrices switch")

    for g in range(n_groups.pop()):
        for fv in fiscal_variables:
            label = None
            row = []
            for country in countries:
                model = models[country]
                group_label, A = lag_blocks(model)[g]
                label = group_label
                names = model.spec.endogenous
                col = names.index(fv)
                for hv in household_variables:
                    row.append(float(A[names.index(hv), col]))
            rows.append((f"{fv} (-1)", label) + tuple(row))
    return ComparisonTable(
        title="lagged fiscal coefficients on household variables",
        columns=tuple(columns),
        rows=tuple(rows),
    )
