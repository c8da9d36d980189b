"""Pipeline commands behind the CLI: simulate, ingest, pretest, fit, analyze.

Each command is a pure function of the validated config (plus, for analyze,
the serialized fit output): outputs are byte-identical across runs with the
same config and seed.  All randomness derives from the master seed through
named seed-sequence branches; nothing reads the clock or the environment.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from regimevar.analysis import covid_shock_table, fevd, fiscal_impact_table, irf, regime_dates
from regimevar.cointegration import engle_granger_each_against_rest
from regimevar.config import PipelineConfig, config_hash
from regimevar.exceptions import ConfigError, DataError
from regimevar.indicators import impc_series, indicator_to_series, mpc_series
from regimevar.msvar.estimate import em_fit
from regimevar.msvar.model import (
    ModelDataset,
    ModelSpec,
    MsVarParameters,
    RegimeParameterSet,
    TransitionMatrix,
)
from regimevar.msvar.serialize import (
    estimated_model_from_dict,
    estimated_model_to_dict,
    parameters_to_dict,
)
from regimevar.msvar.simulate import simulate
from regimevar.panel import SeriesTransformPlan, TimeSeriesPanel, build_dataset, load_panel
from regimevar.reporting import (
    ReportMeta,
    chronology_rows,
    cointegration_rows,
    comparison_rows,
    estimates_rows,
    fevd_rows,
    full_number,
    irf_rows,
    jsonable,
    unitroot_rows,
    write_csv,
    write_json,
)
from regimevar.unitroot import stationarity_pipeline

__all__ = ["cmd_simulate", "cmd_ingest", "cmd_pretest", "cmd_fit", "cmd_analyze"]

# seed-sequence branch tags, one per consumer of randomness
_BRANCH_PARAMS = 101
_BRANCH_PATHS = 202
_BRANCH_FIT = 303


def _meta(config: PipelineConfig) -> ReportMeta:
    return ReportMeta(
        config_hash=config_hash(config),
        master_seed=config.seed,
        cholesky_ordering=config.model.identification_ordering,
    )


def _out_dir(config: PipelineConfig, stage: str) -> Path:
    return Path(config.output.directory) / stage


def _country_seed(config: PipelineConfig, branch: int, index: int) -> int:
    state = np.random.SeedSequence([config.seed, branch, index]).generate_state(1, np.uint64)
    return int(state[0])


def synthetic_parameters(spec: ModelSpec, config: PipelineConfig, country_index: int) -> MsVarParameters:
    """Deterministic well-separated parameter template for one country."""
    sim = config.simulate
    rng = np.random.default_rng(
        np.random.SeedSequence([config.seed, _BRANCH_PARAMS, country_index])
    )
    n, m, K, p = spec.n_vars, spec.n_exog, spec.n_regimes, spec.lag_order
    sigma = sim.noise_scale

    lag = rng.standard_normal((n, n)) / np.sqrt(n)
    radius = float(np.abs(np.linalg.eigvals(lag)).max())
    lag *= sim.lag_spectral_radius / max(radius, 1e-8)
    lags = np.stack([lag * (0.4 ** l) for l in range(p)])

    basis, _ = np.linalg.qr(rng.standard_normal((n, max(n, K))))
    regimes = []
    for k in range(K):
        direction = basis[:, k % n]
        intercept = sim.intercept_gap * sigma * k * direction
        if spec.switching.covariance:
            w = 0.15 * sigma * rng.standard_normal((n, n))
            cov = (sigma**2) * (1.3**k) * np.eye(n) + w @ w.T
        else:
            cov = (sigma**2) * np.eye(n)
        if m:
            base = sigma * rng.standard_normal((n, m))
            exog = (0.5 + 0.5 * k) * base if spec.switching.exog_coefficients else base
        else:
            exog = np.zeros((n, m))
        regimes.append(
            RegimeParameterSet(
                intercept=intercept, lag_matrices=lags, exog_coeffs=exog, covariance=cov
            )
        )
    if K == 1:
        P = np.ones((1, 1))
    else:
        stay = sim.regime_persistence
        P = np.full((K, K), (1.0 - stay) / (K - 1))
        np.fill_diagonal(P, stay)
    return MsVarParameters(
        spec=spec, regimes=tuple(regimes), transition=TransitionMatrix(P)
    )


def _covid_path(config: PipelineConfig, years: range) -> np.ndarray:
    lo, hi = config.covid_window
    cols = []
    for name in config.model.exogenous:
        if name == config.analysis.shock_name:
            cols.append([1.0 if lo <= y <= hi else 0.0 for y in years])
        else:
            cols.append([0.0 for _ in years])
    if not cols:
        return np.zeros((len(list(years)), 0))
    return np.array(cols, dtype=float).T


def cmd_simulate(config: PipelineConfig) -> dict[str, Path]:
    """Write a synthetic panel CSV plus the true parameters and regime paths."""
    out = _out_dir(config, "simulate")
    meta = _meta(config)
    sim = config.simulate
    start = sim.resolved_start_year()
    years = range(start, start + sim.t_obs)
    exog_path = _covid_path(config, years)

    panel_rows: list[tuple] = []
    regime_rows: list[tuple] = []
    written: dict[str, Path] = {}
    for i, country in enumerate(sorted(config.countries)):
        params = synthetic_parameters(config.model, config, i)
        dataset, path = simulate(
            params,
            T=sim.t_obs,
            exog_path=exog_path,
            seed=_country_seed(config, _BRANCH_PATHS, i),
            burn_in=sim.burn_in,
            start_year=start,
        )
        # integrate=true emits cumulated levels so the panel behaves like the
        # unit-root data the pre-tests expect; a difference(1) transform in
        # the config recovers the simulated process exactly
        values = np.cumsum(dataset.Y, axis=0) if sim.integrate else dataset.Y
        for j, name in enumerate(dataset.variable_names):
            for t, year in enumerate(dataset.year_index):
                panel_rows.append((country, name, year, values[t, j]))
        for t, year in enumerate(dataset.year_index):
            regime_rows.append((country, year, int(path[t])))
        params_path = out / f"true_params_{country}.json"
        write_json(params_path, meta, parameters_to_dict(params))
        written[f"true_params_{country}"] = params_path

    panel_path = out / "panel.csv"
    buf = io.StringIO()
    for line in meta.header_lines():
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["country", "series", "year", "value"])
    for row in sorted(panel_rows):
        writer.writerow([row[0], row[1], row[2], full_number(row[3])])
    panel_path.parent.mkdir(parents=True, exist_ok=True)
    panel_path.write_text(buf.getvalue())
    written["panel"] = panel_path

    regimes_path = out / "true_regimes.csv"
    write_csv(regimes_path, meta, ("country", "year", "regime"), sorted(regime_rows))
    written["true_regimes"] = regimes_path
    return written


def _load_panels(config: PipelineConfig) -> dict[str, TimeSeriesPanel]:
    if config.input is None:
        raise ConfigError("this command requires the 'input' config section")
    panels = load_panel(config.input.path, config.input.columns)
    missing = [c for c in config.countries if c not in panels]
    if missing:
        raise DataError(f"countries {missing} not present in {config.input.path}; "
                        f"found {sorted(panels)}")
    out = {}
    for country in config.countries:
        panel = panels[country]
        if config.indicators is not None:
            ind = config.indicators
            for series_name in (ind.consumption_series, ind.income_series):
                if series_name not in panel.series:
                    raise DataError(
                        f"{country}: indicator input series {series_name!r} missing"
                    )
            consumption = panel.series[ind.consumption_series]
            income = panel.series[ind.income_series]
            mpc = mpc_series(consumption, income, ind.guard_epsilon)
            impc = impc_series(consumption, income, ind.guard_epsilon)
            panel = panel.replace_series(indicator_to_series(mpc, ind.mpc_name))
            panel = panel.replace_series(indicator_to_series(impc, ind.impc_name))
        out[country] = panel
    return out


def _datasets(config: PipelineConfig) -> dict[str, ModelDataset]:
    panels = _load_panels(config)
    windows = {config.analysis.shock_name: config.covid_window}
    return {
        country: build_dataset(panel, config.transforms, config.model, dummy_windows=windows)
        for country, panel in panels.items()
    }


def cmd_ingest(config: PipelineConfig) -> dict[str, Path]:
    """Materialize model-ready datasets per country."""
    out = _out_dir(config, "ingest")
    meta = _meta(config)
    written: dict[str, Path] = {}
    for country, ds in sorted(_datasets(config).items()):
        payload = {
            "country": country,
            "year_index": list(ds.year_index),
            "variable_names": list(ds.variable_names),
            "exog_names": list(ds.exog_names),
            "Y": ds.Y.tolist(),
            "X_exog": ds.X_exog.tolist(),
            "effective_T": ds.effective_T,
        }
        if "json" in config.output.formats:
            p = out / f"{country}_dataset.json"
            write_json(p, meta, payload)
            written[f"{country}_json"] = p
        if "csv" in config.output.formats:
            columns = ("year",) + ds.variable_names + ds.exog_names
            rows = [
                (year,) + tuple(ds.Y[t]) + tuple(ds.X_exog[t])
                for t, year in enumerate(ds.year_index)
            ]
            p = out / f"{country}_dataset.csv"
            write_csv(p, meta, columns, rows, display=False)
            written[f"{country}_csv"] = p
    return written


def cmd_pretest(config: PipelineConfig) -> dict[str, Path]:
    """Unit-root blocks (level and first difference) plus cointegration rows."""
    out = _out_dir(config, "pretest")
    meta = _meta(config)
    panels = _load_panels(config)
    level_plan = config.transforms.without_differencing()
    tests = config.tests

    tables = []
    coint: dict[str, list] = {}
    for country, panel in sorted(panels.items()):
        transformed = level_plan.apply(panel)
        missing = [v for v in config.model.endogenous if v not in transformed.series]
        if missing:
            raise DataError(f"{country}: endogenous series {missing} missing for pretests")
        sub = TimeSeriesPanel.from_series(
            country, [transformed.series[v] for v in config.model.endogenous]
        )
        tables.append(
            stationarity_pipeline(
                sub,
                SeriesTransformPlan(),
                deterministic=tests.deterministic,
                max_lags=tests.max_lags,
                lag_selection=tests.lag_selection,
                bandwidth=tests.bandwidth,
                seed=config.seed,
            )
        )
        arrays = {v: sub.series[v].to_array() for v in config.model.endogenous}
        coint[country] = engle_granger_each_against_rest(
            arrays,
            deterministic="constant" if tests.deterministic != "none" else "none",
            max_lags=tests.max_lags,
            lag_selection=tests.lag_selection,
        )

    written: dict[str, Path] = {}
    for block, stem in (("level", "unitroot_level"), ("first_difference", "unitroot_first_difference")):
        columns, rows = unitroot_rows(tables, block)
        if "csv" in config.output.formats:
            p = out / f"{stem}.csv"
            write_csv(p, meta, columns, rows)
            written[f"{stem}_csv"] = p
        if "json" in config.output.formats:
            p = out / f"{stem}.json"
            write_json(p, meta, [dict(zip(columns, r)) for r in rows])
            written[f"{stem}_json"] = p
    columns, rows = cointegration_rows(coint)
    if "csv" in config.output.formats:
        p = out / "cointegration.csv"
        write_csv(p, meta, columns, rows)
        written["cointegration_csv"] = p
    if "json" in config.output.formats:
        p = out / "cointegration.json"
        write_json(p, meta, [dict(zip(columns, r)) for r in rows])
        written["cointegration_json"] = p
    return written


def cmd_fit(config: PipelineConfig) -> dict[str, Path]:
    """Estimate one switching VAR per country and serialize it."""
    out = _out_dir(config, "fit")
    meta = _meta(config)
    datasets = _datasets(config)
    est = config.estimation
    countries = sorted(datasets)

    def fit_one(item):
        index, country = item
        ds = datasets[country]
        model = em_fit(
            config.model,
            ds,
            init_strategy=est.init_strategy,
            n_restarts=est.n_restarts,
            max_iter=est.max_iter,
            tol=est.tol,
            seed=_country_seed(config, _BRANCH_FIT, index),
            compute_se=est.compute_standard_errors,
        )
        return country, model, ds

    with ThreadPoolExecutor(max_workers=min(4, len(countries))) as pool:
        results = list(pool.map(fit_one, enumerate(countries)))

    written: dict[str, Path] = {}
    for country, model, ds in results:
        payload = {
            "country": country,
            "year_index": list(ds.year_index[config.model.lag_order:]),
            "model": estimated_model_to_dict(model),
        }
        p = out / f"{country}_model.json"
        write_json(p, meta, payload)
        written[country] = p
    return written


def _load_fit_output(config: PipelineConfig):
    out = _out_dir(config, "fit")
    models = {}
    years = {}
    for country in config.countries:
        path = out / f"{country}_model.json"
        if not path.exists():
            raise DataError(f"fit output {path} not found; run the fit command first")
        doc = json.loads(path.read_text())["data"]
        models[country] = estimated_model_from_dict(doc["model"])
        years[country] = [int(y) for y in doc["year_index"]]
    return models, years


def cmd_analyze(config: PipelineConfig) -> dict[str, Path]:
    """IRF plot data, FEVD tables, regime chronology, and comparison tables.

    Consumes only the serialized fit output; estimation is never recomputed.
    """
    out = _out_dir(config, "analyze")
    meta = _meta(config)
    models, years = _load_fit_output(config)
    horizon = config.analysis.horizon
    ordering = config.model.identification_ordering
    formats = config.output.formats
    written: dict[str, Path] = {}

    def emit(stem: str, columns, rows, payload=None, display=True):
        if "csv" in formats:
            p = out / f"{stem}.csv"
            write_csv(p, meta, columns, rows, display=display)
            written[f"{stem}_csv"] = p
        if "json" in formats:
            p = out / f"{stem}.json"
            write_json(p, meta, payload if payload is not None else
                       [dict(zip(columns, r)) for r in rows])
            written[f"{stem}_json"] = p

    for country in sorted(models):
        model = models[country]
        surfaces = []
        regimes: list[int | str] = list(range(model.n_regimes)) + ["ergodic"]
        for regime in regimes:
            for shock in model.spec.endogenous:
                surfaces.append(irf(model, regime, shock, horizon, ordering))
        columns, rows = irf_rows(surfaces)
        emit(f"{country}_irf", columns, rows,
             payload=[dict(zip(columns, r)) for r in rows], display=False)

        fevd_payload = []
        response = config.fevd_response_variable()
        for k in range(model.n_regimes):
            table = fevd(model, k, horizon, ordering)
            columns, rows = fevd_rows(table, response)
            emit(f"{country}_fevd_regime{k + 1}", columns, rows)
            fevd_payload.append(
                {
                    "regime": k + 1,
                    "shares": jsonable(table.shares),
                    "forecast_std_errors": jsonable(table.forecast_std_errors),
                    "ordering": list(table.ordering),
                    "variable_names": list(table.variable_names),
                }
            )
        if "json" in formats:
            p = out / f"{country}_fevd.json"
            write_json(p, meta, fevd_payload)
            written[f"{country}_fevd_json"] = p

        chron = regime_dates(model, years[country])
        columns, rows = chronology_rows(chron)
        emit(
            f"{country}_regimes",
            columns,
            rows,
            payload={
                "episodes": [dict(zip(columns, r)) for r in rows],
                "years": list(chron.years),
                "modal_regime": [int(v) + 1 for v in chron.modal_regime],
            },
        )

        columns, rows = estimates_rows(model, config.analysis.shock_name)
        emit(f"{country}_estimates", columns, rows)

    shock_tbl = covid_shock_table(
        models, variables=config.household_variables(), shock_name=config.analysis.shock_name
    )
    columns, rows = comparison_rows(shock_tbl)
    emit("covid_comparison", columns, rows)

    fiscal_tbl = fiscal_impact_table(
        models,
        fiscal_variables=config.fiscal_variables(),
        household_variables=config.household_variables(),
    )
    columns, rows = comparison_rows(fiscal_tbl)
    emit("fiscal_comparison", columns, rows)
    return written
