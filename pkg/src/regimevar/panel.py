"""Annual panel containers, CSV ingestion, and series transforms.

A :class:`TimeSeriesPanel` holds named annual series for one country on a
shared year index, with missing values flagged explicitly as ``None`` (never
as a sentinel number). Transform plans are pure descriptions applied with
:meth:`SeriesTransformPlan.apply`; :func:`build_dataset` assembles the
model-ready matrices consumed by the estimation engine.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from regimevar.exceptions import ConfigError, DataError

__all__ = [
    "Series",
    "TimeSeriesPanel",
    "ColumnSchema",
    "TransformStep",
    "SeriesTransformPlan",
    "ModelDataset",
    "load_panel",
    "interpolate_missing",
    "difference",
    "deflate",
    "gdp_share",
    "lag_series",
    "build_dataset",
]


@dataclass(frozen=True)
class Series:
    """One named annual series; ``None`` marks a missing observation."""

    name: str
    years: tuple[int, ...]
    values: tuple[float | None, ...]

    def __post_init__(self) -> None:
        if len(self.years) != len(self.values):
            raise DataError(f"series {self.name!r}: {len(self.years)} years vs {len(self.values)} values")
        for prev, cur in zip(self.years, self.years[1:]):
            if cur <= prev:
                raise DataError(f"series {self.name!r}: years not strictly increasing at {cur}")

    def __len__(self) -> int:
        return len(self.years)

    @property
    def missing_years(self) -> tuple[int, ...]:
        return tuple(y for y, v in zip(self.years, self.values) if v is None)

    def is_complete(self) -> bool:
        return all(v is not None for v in self.values)

    def to_array(self) -> np.ndarray:
        """Dense float array; raises if any value is missing."""
        if not self.is_complete():
            raise DataError(f"series {self.name!r} has missing values at years {self.missing_years}")
        return np.array(self.values, dtype=float)

    def value_at(self, year: int) -> float | None:
        try:
            return self.values[self.years.index(year)]
        except ValueError:
            return None


@dataclass(frozen=True)
class TimeSeriesPanel:
    """Aligned annual series for one country (frequency: annual)."""

    country_id: str
    series: Mapping[str, Series]

    @classmethod
    def from_series(cls, country_id: str, series: Iterable[Series]) -> "TimeSeriesPanel":
        """Align all series onto the union of their year indexes."""
        by_name: dict[str, Series] = {}
        for s in series:
            if s.name in by_name:
                raise DataError(f"panel {country_id!r}: duplicate series name {s.name!r}")
            by_name[s.name] = s
        if not by_name:
            return cls(country_id=country_id, series={})
        all_years = sorted({y for s in by_name.values() for y in s.years})
        aligned = {
            name: Series(
                name=name,
                years=tuple(all_years),
                values=tuple(s.value_at(y) for y in all_years),
            )
            for name, s in by_name.items()
        }
        return cls(country_id=country_id, series=aligned)

    @property
    def year_index(self) -> tuple[int, ...]:
        for s in self.series.values():
            return s.years
        return ()

    def series_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.series))

    def replace_series(self, new: Series) -> "TimeSeriesPanel":
        merged = dict(self.series)
        merged[new.name] = new
        return TimeSeriesPanel.from_series(self.country_id, merged.values())


@dataclass(frozen=True)
class ColumnSchema:
    """Column mapping for CSV ingestion.

    ``layout`` is ``"long"`` (one row per country/series/year/value) or
    ``"wide"`` (one row per country/year, one column per series).
    """

    layout: str = "long"
    country: str = "country"
    series: str = "series"
    year: str = "year"
    value: str = "value"

    def __post_init__(self) -> None:
        if self.layout not in ("long", "wide"):
            raise ConfigError(f"unknown CSV layout {self.layout!r}; expected 'long' or 'wide'")


def _parse_value(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        return float(cell)
    except ValueError:
        return None  # unparseable cells become explicit missing values


def _parse_year(cell: str, row_no: int) -> int:
    try:
        return int(cell.strip())
    except ValueError:
        raise DataError(f"row {row_no}: year {cell!r} is not an integer") from None


def load_panel(source, schema: ColumnSchema | None = None) -> dict[str, TimeSeriesPanel]:
    """Read a CSV stream/path into one aligned panel per country.

    Lines starting with ``#`` are treated as comments (this package's own
    emitted CSVs carry such a header block).  Duplicate (country, series,
    year) cells are rejected with the offending row number; an empty file is
    rejected outright.
    """
    schema = schema or ColumnSchema()
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    elif isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        raise DataError(f"unsupported CSV source type {type(source).__name__}")

    text = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise DataError("empty CSV input")
    header = [h.strip() for h in rows[0]]

    cells: dict[tuple[str, str, int], float | None] = {}
    if schema.layout == "long":
        required = [schema.country, schema.series, schema.year, schema.value]
        missing_cols = [c for c in required if c not in header]
        if missing_cols:
            raise DataError(f"CSV header missing columns {missing_cols}; found {header}")
        idx = {c: header.index(c) for c in required}
        for row_no, row in enumerate(rows[1:], start=2):
            country = row[idx[schema.country]].strip()
            name = row[idx[schema.series]].strip()
            year = _parse_year(row[idx[schema.year]], row_no)
            key = (country, name, year)
            if key in cells:
                raise DataError(f"row {row_no}: duplicate entry for {key}")
            cells[key] = _parse_value(row[idx[schema.value]])
    else:
        for col in (schema.country, schema.year):
            if col not in header:
                raise DataError(f"CSV header missing column {col!r}; found {header}")
        country_i = header.index(schema.country)
        year_i = header.index(schema.year)
        series_cols = [(i, h) for i, h in enumerate(header) if i not in (country_i, year_i)]
        if not series_cols:
            raise DataError("wide CSV has no series columns")
        for row_no, row in enumerate(rows[1:], start=2):
            country = row[country_i].strip()
            year = _parse_year(row[year_i], row_no)
            for i, name in series_cols:
                key = (country, name, year)
                if key in cells:
                    raise DataError(f"row {row_no}: duplicate entry for {key}")
                cells[key] = _parse_value(row[i]) if i < len(row) else None

    panels: dict[str, TimeSeriesPanel] = {}
    countries = sorted({c for c, _, _ in cells})
    for country in countries:
        names = sorted({n for c, n, _ in cells if c == country})
        series = []
        for name in names:
            years = sorted(y for c, n, y in cells if c == country and n == name)
            values = tuple(cells[(country, name, y)] for y in years)
            series.append(Series(name=name, years=tuple(years), values=values))
        panels[country] = TimeSeriesPanel.from_series(country, series)
    return panels


def interpolate_missing(series: Series) -> Series:
    """Fill interior gaps by linear interpolation on the year axis.

    Leading/trailing gaps are errors (extrapolation would invent data);
    non-missing entries pass through bit-identical.
    """
    known = [(y, v) for y, v in zip(series.years, series.values) if v is not None]
    if len(known) < 2:
        raise DataError(f"series {series.name!r}: need at least two observed points to interpolate")
    if series.values[0] is None:
        raise DataError(f"series {series.name!r}: leading missing value at year {series.years[0]}")
    if series.values[-1] is None:
        raise DataError(f"series {series.name!r}: trailing missing value at year {series.years[-1]}")
    if series.is_complete():
        return series
    xs = np.array([y for y, _ in known], dtype=float)
    vs = np.array([v for _, v in known], dtype=float)
    filled = tuple(
        v if v is not None else float(np.interp(float(y), xs, vs))
        for y, v in zip(series.years, series.values)
    )
    return Series(name=series.name, years=series.years, values=filled)


def difference(series: Series, order: int = 1) -> Series:
    """Apply the first-difference operator ``order`` times."""
    if order < 1:
        raise DataError(f"difference order must be >= 1, got {order}")
    if len(series) <= order:
        raise DataError(f"series {series.name!r}: length {len(series)} too short for order {order}")
    arr = series.to_array()
    out = np.diff(arr, n=order)
    return Series(name=series.name, years=series.years[order:], values=tuple(float(v) for v in out))


def _elementwise_ratio(series: Series, denom: Series, scale: float, what: str) -> Series:
    if series.years != denom.years:
        raise DataError(
            f"{what}: year indices differ between {series.name!r} and {denom.name!r}"
        )
    out: list[float | None] = []
    for y, v, d in zip(series.years, series.values, denom.values):
        if d is not None and d <= 0:
            raise DataError(f"{what}: nonpositive denominator {d} in {denom.name!r} at year {y}")
        if v is None or d is None:
            out.append(None)
        else:
            out.append(scale * v / d)
    return Series(name=series.name, years=series.years, values=tuple(out))


def deflate(series: Series, deflator: Series) -> Series:
    """Convert to constant prices: elementwise value / deflator."""
    return _elementwise_ratio(series, deflator, 1.0, "deflate")


def gdp_share(series: Series, gdp: Series) -> Series:
    """Normalize as a percentage of GDP: 100 * value / gdp."""
    return _elementwise_ratio(series, gdp, 100.0, "gdp_share")


def lag_series(series: Series, k: int = 1) -> Series:
    """Shift values forward k years: output at year t holds the value of t-k."""
    if k < 1:
        raise DataError(f"lag k must be >= 1, got {k}")
    if len(series) <= k:
        raise DataError(f"series {series.name!r}: length {len(series)} too short for lag {k}")
    return Series(name=series.name, years=series.years[k:], values=series.values[:-k])


_STEP_OPS = ("difference", "deflate", "gdp_share", "interpolate_linear", "lag")


@dataclass(frozen=True)
class TransformStep:
    """One transform instruction: op plus its parameter, if any."""

    op: str
    order: int = 1
    k: int = 1
    deflator: str = ""
    gdp: str = ""

    def __post_init__(self) -> None:
        if self.op not in _STEP_OPS:
            raise ConfigError(f"unknown transform op {self.op!r}; expected one of {_STEP_OPS}")
        if self.op == "difference" and self.order < 1:
            raise ConfigError("difference order must be >= 1")
        if self.op == "lag" and self.k < 1:
            raise ConfigError("lag k must be >= 1")
        if self.op == "deflate" and not self.deflator:
            raise ConfigError("deflate step requires 'deflator' series name")
        if self.op == "gdp_share" and not self.gdp:
            raise ConfigError("gdp_share step requires 'gdp' series name")

    @classmethod
    def from_dict(cls, d: Mapping) -> "TransformStep":
        known = {"op", "order", "k", "deflator", "gdp"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown transform step keys {sorted(unknown)}")
        return cls(**dict(d))


@dataclass(frozen=True)
class SeriesTransformPlan:
    """Pure description of per-series transform pipelines.

    Applying the same plan to the same panel always yields identical output;
    nothing is mutated.
    """

    steps: Mapping[str, tuple[TransformStep, ...]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping[str, Sequence[Mapping]]) -> "SeriesTransformPlan":
        return cls(steps={
            name: tuple(TransformStep.from_dict(s) for s in step_list)
            for name, step_list in d.items()
        })

    def apply(self, panel: TimeSeriesPanel) -> TimeSeriesPanel:
        out = {name: s for name, s in panel.series.items()}
        for name, step_list in sorted(self.steps.items()):
            if name not in out:
                raise DataError(
                    f"transform plan names unknown series {name!r}; available: {sorted(out)}"
                )
            s = out[name]
            for step in step_list:
                if step.op == "difference":
                    s = difference(s, step.order)
                elif step.op == "interpolate_linear":
                    s = interpolate_missing(s)
                elif step.op == "lag":
                    s = lag_series(s, step.k)
                elif step.op == "deflate":
                    if step.deflator not in panel.series:
                        raise DataError(f"deflator series {step.deflator!r} not in panel")
                    s = deflate(s, _subset(panel.series[step.deflator], s.years, "deflate"))
                elif step.op == "gdp_share":
                    if step.gdp not in panel.series:
                        raise DataError(f"gdp series {step.gdp!r} not in panel")
                    s = gdp_share(s, _subset(panel.series[step.gdp], s.years, "gdp_share"))
            out[name] = s
        return TimeSeriesPanel.from_series(panel.country_id, out.values())

    def total_differencing(self, name: str) -> int:
        return sum(
            step.order if step.op == "difference" else (step.k if step.op == "lag" else 0)
            for step in self.steps.get(name, ())
        )

    def without_differencing(self) -> "SeriesTransformPlan":
        """The same plan minus difference steps (pre-test inputs are levels)."""
        return SeriesTransformPlan(steps={
            name: tuple(s for s in step_list if s.op != "difference")
            for name, step_list in self.steps.items()
        })


def _subset(series: Series, years: tuple[int, ...], what: str) -> Series:
    missing = [y for y in years if y not in series.years]
    if missing:
        raise DataError(f"{what}: series {series.name!r} lacks years {missing}")
    return Series(
        name=series.name,
        years=years,
        values=tuple(series.value_at(y) for y in years),
    )


@dataclass(frozen=True)
class ModelDataset:
    """Dense, missing-free matrices ready for estimation.

    ``Y`` is T x n endogenous observations, ``X_exog`` T x m exogenous
    regressors; ``effective_T`` is the regression sample after lag trimming.
    """

    Y: np.ndarray
    X_exog: np.ndarray
    year_index: tuple[int, ...]
    variable_names: tuple[str, ...]
    exog_names: tuple[str, ...]
    effective_T: int

    def __post_init__(self) -> None:
        Y = np.asarray(self.Y, dtype=float)
        X = np.asarray(self.X_exog, dtype=float)
        if Y.ndim != 2 or Y.shape[1] != len(self.variable_names):
            raise DataError(f"Y shape {Y.shape} does not match {len(self.variable_names)} variables")
        if X.shape[0] != Y.shape[0]:
            raise DataError(f"X_exog has {X.shape[0]} rows, Y has {Y.shape[0]}")
        if X.shape[1] != len(self.exog_names):
            raise DataError(f"X_exog shape {X.shape} does not match {len(self.exog_names)} names")
        if len(self.year_index) != Y.shape[0]:
            raise DataError("year_index length does not match Y rows")
        if not (np.isfinite(Y).all() and np.isfinite(X).all()):
            raise DataError("dataset contains non-finite values")
        Y.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "X_exog", X)

    @property
    def n_vars(self) -> int:
        return self.Y.shape[1]


def build_dataset(
    panel: TimeSeriesPanel,
    plan: SeriesTransformPlan,
    spec,
    dummy_windows: Mapping[str, tuple[int, int]] | None = None,
) -> ModelDataset:
    """Apply ``plan`` and assemble aligned matrices for ``spec``.

    Exogenous names absent from the panel are built as 0/1 dummies from
    ``dummy_windows`` (default: a ``covid`` dummy spanning 2020-2022).
    """
    if dummy_windows is None:
        dummy_windows = {"covid": (2020, 2022)}
    transformed = plan.apply(panel)

    needed = list(spec.endogenous)
    for name in needed:
        if name not in transformed.series:
            raise DataError(
                f"endogenous series {name!r} not found after transforms; "
                f"available: {sorted(transformed.series)}"
            )

    year_sets = []
    for name in needed:
        s = transformed.series[name]
        year_sets.append({y for y, v in zip(s.years, s.values) if v is not None})
    common = sorted(set.intersection(*year_sets)) if year_sets else []
    if len(common) <= spec.lag_order:
        raise DataError(
            f"only {len(common)} common years across endogenous series; "
            f"need more than lag order {spec.lag_order}"
        )
    if common[-1] - common[0] + 1 != len(common):
        gaps = sorted(set(range(common[0], common[-1] + 1)) - set(common))
        raise DataError(f"common year index has interior gaps at {gaps}; resolve missing values first")
    years = tuple(common)

    cols = []
    for name in needed:
        s = _subset(transformed.series[name], years, "build_dataset")
        if not s.is_complete():
            raise DataError(f"series {name!r} still missing at years {s.missing_years} after transforms")
        cols.append(s.to_array())
    Y = np.column_stack(cols) if cols else np.zeros((len(years), 0))

    exog_cols = []
    for name in spec.exogenous:
        if name in transformed.series:
            s = _subset(transformed.series[name], years, "build_dataset")
            if not s.is_complete():
                raise DataError(f"exogenous series {name!r} missing at years {s.missing_years}")
            exog_cols.append(s.to_array())
        elif name in dummy_windows:
            lo, hi = dummy_windows[name]
            exog_cols.append(np.array([1.0 if lo <= y <= hi else 0.0 for y in years]))
        else:
            raise DataError(
                f"exogenous series {name!r} not found and no dummy window configured; "
                f"available: {sorted(transformed.series)}"
            )
    X = np.column_stack(exog_cols) if exog_cols else np.zeros((len(years), 0))

    return ModelDataset(
        Y=Y,
        X_exog=X,
        year_index=years,
        variable_names=tuple(spec.endogenous),
        exog_names=tuple(spec.exogenous),
        effective_T=len(years) - spec.lag_order,
    )
