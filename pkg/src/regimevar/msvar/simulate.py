"""Synthetic data generation from a fully specified switching VAR.

The regime path follows the Markov chain; observations follow the
regime-conditional Gaussian VAR.  Everything is driven by one seed, so
identical seeds give bit-identical output.
"""

from __future__ import annotations

import numpy as np

from regimevar.exceptions import ConfigError
from regimevar.panel import ModelDataset
from regimevar.msvar.model import MsVarParameters

__all__ = ["simulate"]


def simulate(
    params: MsVarParameters,
    T: int,
    exog_path: np.ndarray | None = None,
    seed: int = 0,
    burn_in: int = 0,
    initial_regime: int | None = None,
    start_year: int = 2000,
) -> tuple[ModelDataset, np.ndarray]:
    """Draw T observations (after ``burn_in`` discarded ones) and the regime path."""
    spec = params.spec
    n, p, m = spec.n_vars, spec.lag_order, spec.n_exog
    if T <= p:
        raise ConfigError(f"T={T} must exceed the lag order {p}")
    if exog_path is None:
        exog_path = np.zeros((T, m))
    exog_path = np.asarray(exog_path, dtype=float)
    if exog_path.shape != (T, m):
        raise ConfigError(f"exog_path must have shape {(T, m)}, got {exog_path.shape}")
    if initial_regime is not None and not 0 <= initial_regime < spec.n_regimes:
        raise ConfigError(f"initial_regime {initial_regime} out of range")

    rng = np.random.default_rng(seed)
    P = params.transition.matrix
    cumulative = np.cumsum(P, axis=1)
    chols = [np.linalg.cholesky(reg.covariance) for reg in params.regimes]

    total = burn_in + T
    history = np.zeros((p + total, n))
    regimes = np.empty(total, dtype=int)

    if initial_regime is not None:
        state = int(initial_regime)
    else:
        law = params.initial_law()
        state = int(np.searchsorted(np.cumsum(law), rng.random(), side="right"))
        state = min(state, spec.n_regimes - 1)

    for t in range(total):
        if t > 0:
            u = rng.random()
            state = int(np.searchsorted(cumulative[state], u, side="right"))
            state = min(state, spec.n_regimes - 1)
        regimes[t] = state
        reg = params.regimes[state]
        mean = reg.intercept.copy()
        for l in range(1, p + 1):
            mean += reg.lag_matrices[l - 1] @ history[p + t - l]
        x_t = exog_path[t - burn_in] if t >= burn_in else np.zeros(m)
        if m:
            mean += reg.exog_coeffs @ x_t
        shock = chols[state] @ rng.standard_normal(n)
        history[p + t] = mean + shock

    Y = history[p + burn_in:]
    years = tuple(range(start_year, start_year + T))
    dataset = ModelDataset(
        Y=Y,
        X_exog=exog_path,
        year_index=years,
        variable_names=spec.endogenous,
        exog_names=spec.exogenous,
        effective_T=T - p,
    )
    return dataset, regimes[burn_in:]
