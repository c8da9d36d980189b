"""Pipeline configuration: strict parsing, validation, and hashing.

Configuration is validated completely before any computation starts, and
unknown keys are rejected at every level so typos cannot silently change a
run.  The config hash (canonical JSON, sorted keys) stamps every output file
together with the master seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from regimevar.exceptions import ConfigError
from regimevar.panel import ColumnSchema, SeriesTransformPlan
from regimevar.msvar.model import ModelSpec, SwitchingMask

__all__ = ["PipelineConfig", "load_config", "config_hash"]

_FORMATS = ("csv", "json")


def _require_keys(d: Mapping, known: set[str], where: str) -> None:
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(known)}")


def _get(d: Mapping, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return d[key]


@dataclass(frozen=True)
class InputConfig:
    path: str
    layout: str = "long"
    columns: ColumnSchema = field(default_factory=ColumnSchema)

    @classmethod
    def from_dict(cls, d: Mapping) -> "InputConfig":
        _require_keys(d, {"path", "layout", "columns"}, "input")
        layout = d.get("layout", "long")
        cols = d.get("columns", {})
        _require_keys(cols, {"country", "series", "year", "value"}, "input.columns")
        schema = ColumnSchema(
            layout=layout,
            country=cols.get("country", "country"),
            series=cols.get("series", "series"),
            year=cols.get("year", "year"),
            value=cols.get("value", "value"),
        )
        return cls(path=str(_get(d, "path", "input")), layout=layout, columns=schema)


@dataclass(frozen=True)
class IndicatorConfig:
    consumption_series: str
    income_series: str
    interest_rate: float = 0.03
    guard_epsilon: float = 1e-3
    mpc_name: str = "mpc"
    impc_name: str = "impc"

    @classmethod
    def from_dict(cls, d: Mapping) -> "IndicatorConfig":
        _require_keys(
            d,
            {"consumption_series", "income_series", "interest_rate", "guard_epsilon",
             "mpc_name", "impc_name"},
            "indicators",
        )
        return cls(
            consumption_series=str(_get(d, "consumption_series", "indicators")),
            income_series=str(_get(d, "income_series", "indicators")),
            interest_rate=float(d.get("interest_rate", 0.03)),
            guard_epsilon=float(d.get("guard_epsilon", 1e-3)),
            mpc_name=str(d.get("mpc_name", "mpc")),
            impc_name=str(d.get("impc_name", "impc")),
        )


@dataclass(frozen=True)
class EstimationConfig:
    n_restarts: int = 10
    max_iter: int = 500
    tol: float = 1e-6
    init_strategy: str = "auto"
    compute_standard_errors: bool = True

    @classmethod
    def from_dict(cls, d: Mapping) -> "EstimationConfig":
        _require_keys(
            d,
            {"n_restarts", "max_iter", "tol", "init_strategy", "compute_standard_errors"},
            "estimation",
        )
        cfg = cls(
            n_restarts=int(d.get("n_restarts", 10)),
            max_iter=int(d.get("max_iter", 500)),
            tol=float(d.get("tol", 1e-6)),
            init_strategy=str(d.get("init_strategy", "auto")),
            compute_standard_errors=bool(d.get("compute_standard_errors", True)),
        )
        if cfg.n_restarts < 1 or cfg.max_iter < 1 or cfg.tol <= 0:
            raise ConfigError("estimation: n_restarts/max_iter must be >= 1 and tol > 0")
        return cfg


@dataclass(frozen=True)
class TestsConfig:
    deterministic: str = "constant"
    max_lags: int | None = None
    lag_selection: str = "bic"
    bandwidth: int | None = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "TestsConfig":
        _require_keys(d, {"deterministic", "max_lags", "lag_selection", "bandwidth"}, "tests")
        cfg = cls(
            deterministic=str(d.get("deterministic", "constant")),
            max_lags=None if d.get("max_lags") is None else int(d["max_lags"]),
            lag_selection=str(d.get("lag_selection", "bic")),
            bandwidth=None if d.get("bandwidth") is None else int(d["bandwidth"]),
        )
        if cfg.deterministic not in ("none", "constant", "constant+trend"):
            raise ConfigError(f"tests.deterministic {cfg.deterministic!r} invalid")
        if cfg.lag_selection not in ("fixed", "aic", "bic"):
            raise ConfigError(f"tests.lag_selection {cfg.lag_selection!r} invalid")
        return cfg


@dataclass(frozen=True)
class AnalysisConfig:
    horizon: int = 24
    household_variables: tuple[str, ...] | None = None
    fiscal_variables: tuple[str, ...] | None = None
    shock_name: str = "covid"
    fevd_response: str | None = None

    @classmethod
    def from_dict(cls, d: Mapping) -> "AnalysisConfig":
        _require_keys(
            d,
            {"horizon", "household_variables", "fiscal_variables", "shock_name", "fevd_response"},
            "analysis",
        )
        cfg = cls(
            horizon=int(d.get("horizon", 24)),
            household_variables=(
                None if d.get("household_variables") is None
                else tuple(str(v) for v in d["household_variables"])
            ),
            fiscal_variables=(
                None if d.get("fiscal_variables") is None
                else tuple(str(v) for v in d["fiscal_variables"])
            ),
            shock_name=str(d.get("shock_name", "covid")),
            fevd_response=None if d.get("fevd_response") is None else str(d["fevd_response"]),
        )
        if cfg.horizon < 1:
            raise ConfigError("analysis.horizon must be >= 1")
        return cfg


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json")

    @classmethod
    def from_dict(cls, d: Mapping) -> "OutputConfig":
        _require_keys(d, {"directory", "formats"}, "output")
        formats = tuple(str(f) for f in d.get("formats", ["csv", "json"]))
        for f in formats:
            if f not in _FORMATS:
                raise ConfigError(f"output format {f!r} invalid; allowed {_FORMATS}")
        return cls(directory=str(d.get("directory", "out")), formats=formats)


@dataclass(frozen=True)
class SimulateConfig:
    t_obs: int = 200
    burn_in: int = 50
    start_year: int | None = None
    intercept_gap: float = 3.0
    noise_scale: float = 0.5
    regime_persistence: float = 0.9
    integrate: bool = False
    lag_spectral_radius: float = 0.5

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimulateConfig":
        _require_keys(
            d,
            {"t_obs", "burn_in", "start_year", "intercept_gap", "noise_scale",
             "regime_persistence", "integrate", "lag_spectral_radius"},
            "simulate",
        )
        cfg = cls(
            t_obs=int(d.get("t_obs", 200)),
            burn_in=int(d.get("burn_in", 50)),
            start_year=None if d.get("start_year") is None else int(d["start_year"]),
            intercept_gap=float(d.get("intercept_gap", 3.0)),
            noise_scale=float(d.get("noise_scale", 0.5)),
            regime_persistence=float(d.get("regime_persistence", 0.9)),
            integrate=bool(d.get("integrate", False)),
            lag_spectral_radius=float(d.get("lag_spectral_radius", 0.5)),
        )
        if cfg.t_obs < 10 or cfg.burn_in < 0:
            raise ConfigError("simulate: t_obs must be >= 10 and burn_in >= 0")
        if not 0.0 < cfg.regime_persistence < 1.0:
            raise ConfigError("simulate.regime_persistence must lie in (0, 1)")
        if not 0.0 <= cfg.lag_spectral_radius < 1.0:
            raise ConfigError("simulate.lag_spectral_radius must lie in [0, 1)")
        return cfg

    def resolved_start_year(self) -> int:
        # default window ends at 2023 so the covid dummy years fall in-sample
        return self.start_year if self.start_year is not None else 2023 - self.t_obs + 1


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    countries: tuple[str, ...]
    model: ModelSpec
    output: OutputConfig
    input: InputConfig | None = None
    indicators: IndicatorConfig | None = None
    transforms: SeriesTransformPlan = field(default_factory=SeriesTransformPlan)
    covid_window: tuple[int, int] = (2020, 2022)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    tests: TestsConfig = field(default_factory=TestsConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineConfig":
        _require_keys(
            d,
            {"seed", "countries", "input", "indicators", "transforms", "covid_window",
             "model", "estimation", "tests", "analysis", "output", "simulate"},
            "config",
        )
        seed = int(_get(d, "seed", "config"))
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        countries = tuple(str(c) for c in _get(d, "countries", "config"))
        if not countries:
            raise ConfigError("countries list is empty")
        if len(set(countries)) != len(countries):
            raise ConfigError("duplicate country identifiers")

        m = _get(d, "model", "config")
        _require_keys(
            m,
            {"endogenous", "exogenous", "lag_order", "n_regimes", "switching", "ordering",
             "include_intercept"},
            "model",
        )
        ordering = m.get("ordering")
        if not ordering:
            raise ConfigError(
                "model.ordering is mandatory: the Cholesky identification ordering must be "
                "an explicit, logged choice"
            )
        spec = ModelSpec(
            endogenous=tuple(str(v) for v in _get(m, "endogenous", "model")),
            exogenous=tuple(str(v) for v in m.get("exogenous", [])),
            lag_order=int(m.get("lag_order", 1)),
            n_regimes=int(m.get("n_regimes", 3)),
            switching=SwitchingMask.from_dict(m.get("switching", {})),
            identification_ordering=tuple(str(v) for v in ordering),
            include_intercept=bool(m.get("include_intercept", True)),
        )

        window = d.get("covid_window", [2020, 2022])
        if len(window) != 2 or int(window[0]) > int(window[1]):
            raise ConfigError("covid_window must be [first_year, last_year]")

        cfg = cls(
            seed=seed,
            countries=countries,
            model=spec,
            output=OutputConfig.from_dict(d.get("output", {})),
            input=None if d.get("input") is None else InputConfig.from_dict(d["input"]),
            indicators=(
                None if d.get("indicators") is None else IndicatorConfig.from_dict(d["indicators"])
            ),
            transforms=SeriesTransformPlan.from_dict(d.get("transforms", {})),
            covid_window=(int(window[0]), int(window[1])),
            estimation=EstimationConfig.from_dict(d.get("estimation", {})),
            tests=TestsConfig.from_dict(d.get("tests", {})),
            analysis=AnalysisConfig.from_dict(d.get("analysis", {})),
            simulate=SimulateConfig.from_dict(d.get("simulate", {})),
            raw=_canonical(d),
        )
        return cfg

    def with_overrides(self, seed: int | None = None, out_dir: str | None = None,
                       formats: Sequence[str] | None = None) -> "PipelineConfig":
        raw = dict(self.raw)
        if seed is not None:
            raw["seed"] = int(seed)
        if out_dir is not None or formats is not None:
            out = dict(raw.get("output", {}))
            if out_dir is not None:
                out["directory"] = str(out_dir)
            if formats is not None:
                out["formats"] = list(formats)
            raw["output"] = out
        return PipelineConfig.from_dict(raw)

    def household_variables(self) -> tuple[str, ...]:
        if self.analysis.household_variables is not None:
            return self.analysis.household_variables
        preferred = [v for v in ("hc", "hdi", "impc", "mpc") if v in self.model.endogenous]
        if len(preferred) == 4:
            return tuple(preferred)
        return self.model.endogenous[: min(4, len(self.model.endogenous))]

    def fiscal_variables(self) -> tuple[str, ...]:
        if self.analysis.fiscal_variables is not None:
            return self.analysis.fiscal_variables
        preferred = [v for v in ("cgd", "exp", "rev", "sub") if v in self.model.endogenous]
        if len(preferred) == 4:
            return tuple(preferred)
        rest = [v for v in self.model.endogenous if v not in self.household_variables()]
        return tuple(rest[: min(4, len(rest))]) or self.model.endogenous[:1]

    def fevd_response_variable(self) -> str:
        if self.analysis.fevd_response is not None:
            if self.analysis.fevd_response not in self.model.endogenous:
                raise ConfigError(
                    f"analysis.fevd_response {self.analysis.fevd_response!r} not endogenous"
                )
            return self.analysis.fevd_response
        return "hc" if "hc" in self.model.endogenous else self.model.endogenous[0]


def _canonical(d) -> dict:
    return json.loads(json.dumps(d, sort_keys=True))


def config_hash(config: PipelineConfig) -> str:
    payload = json.dumps(config.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return PipelineConfig.from_dict(doc)
