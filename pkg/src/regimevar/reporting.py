"""Report emission: CSV/JSON writers with reproducibility headers.

Every file starts with a header block recording the config hash, master
seed, artifact version, and the Cholesky ordering in force, so identical
headers imply identical bodies.  Display tables round half-even to four
decimals with trailing zeros trimmed; JSON companions always carry full
precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from regimevar import __version__
from regimevar.analysis import ComparisonTable, FevdTable, IrfSurface, RegimeChronology
from regimevar.cointegration import CointegrationReport, classify
from regimevar.msvar.model import EstimatedMsVar
from regimevar.unitroot import NOT_COMPUTED_METHODS, StationarityTable

__all__ = [
    "ReportMeta",
    "round_half_even",
    "display_number",
    "write_csv",
    "write_json",
    "unitroot_rows",
    "cointegration_rows",
    "estimates_rows",
    "fevd_rows",
    "irf_rows",
    "chronology_rows",
    "comparison_rows",
]

DISPLAY_DIGITS = 4


@dataclass(frozen=True)
class ReportMeta:
    config_hash: str
    master_seed: int
    cholesky_ordering: tuple[str, ...]
    artifact_version: str = __version__

    def header_lines(self) -> list[str]:
        return [
            f"# config_hash: {self.config_hash}",
            f"# master_seed: {self.master_seed}",
            f"# artifact_version: {self.artifact_version}",
            f"# cholesky_ordering: {','.join(self.cholesky_ordering)}",
        ]

    def as_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "artifact_version": self.artifact_version,
            "cholesky_ordering": list(self.cholesky_ordering),
        }


def round_half_even(value: float, digits: int = DISPLAY_DIGITS) -> float:
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN))


def display_number(value, digits: int = DISPLAY_DIGITS) -> str:
    """Half-even rounding with trailing zeros trimmed, for paper-style tables."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if not np.isfinite(v):
        return repr(v)
    text = f"{round_half_even(v, digits):.{digits}f}"
    text = text.rstrip("0").rstrip(".")
    return text if text not in ("", "-0") else "0"


def full_number(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return repr(float(value))


def write_csv(
    path: str | Path,
    meta: ReportMeta,
    columns: Sequence[str],
    rows: Sequence[Sequence],
    display: bool = True,
) -> None:
    fmt = display_number if display else full_number
    buf = io.StringIO()
    for line in meta.header_lines():
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([fmt(cell) for cell in row])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def write_json(path: str | Path, meta: ReportMeta, payload) -> None:
    doc = {"_meta": meta.as_dict(), "data": payload}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _jsonify(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Mapping):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


_METHOD_LABELS = {
    "IPS": "Im, Pesaran and Shin W-stat",
    "Fisher-ADF": "ADF - Fisher Chi-square",
    "Fisher-PP": "PP - Fisher Chi-square",
}


def unitroot_rows(
    tables: Sequence[StationarityTable], block: str
) -> tuple[tuple[str, ...], list[tuple]]:
    """Rows mirroring the panel unit-root summary layout for one block.

    Methods that are intentionally not implemented appear as 'not computed'
    so the table shape matches the reference layout.
    """
    if block not in ("level", "first_difference"):
        raise ValueError(f"block must be 'level' or 'first_difference', got {block!r}")
    columns = ("country", "test_method", "statistic", "p_value", "cross_sections", "observations")
    rows: list[tuple] = []
    for table in tables:
        reports = table.level if block == "level" else table.first_difference
        for method in NOT_COMPUTED_METHODS:
            rows.append((table.country_id, method, "not computed", "not computed", "", ""))
        for rep in reports:
            rows.append(
                (table.country_id, _METHOD_LABELS.get(rep.method, rep.method), rep.statistic,
                 rep.p_value, rep.cross_sections, rep.observations)
            )
    return columns, rows


def cointegration_rows(
    reports_by_country: Mapping[str, Sequence[CointegrationReport]]
) -> tuple[tuple[str, ...], list[tuple]]:
    """Tau/p-value rows in the two-step cointegration table layout."""
    columns = ("variable", "country", "summary", "tau", "p_value", "verdict", "regressors")
    rows: list[tuple] = []
    variables = sorted({r.dependent for reps in reports_by_country.values() for r in reps})
    for variable in variables:
        for country in sorted(reports_by_country):
            for rep in reports_by_country[country]:
                if rep.dependent != variable:
                    continue
                summary = f"Tau: {rep.tau:.2f} p-value: {rep.p_value:.2f}"
                rows.append(
                    (variable, country, summary, rep.tau, rep.p_value, classify(rep),
                     "+".join(rep.regressors))
                )
    return columns, rows


def estimates_rows(model: EstimatedMsVar, shock_name: str) -> tuple[tuple[str, ...], list[tuple]]:
    """Regime shock rows plus lag-coefficient rows, one column per equation."""
    names = model.spec.endogenous
    columns = ("regressor",) + names
    rows: list[tuple] = []
    if shock_name in model.spec.exogenous:
        col = model.spec.exogenous.index(shock_name)
        for k in range(model.n_regimes):
            label = f"{shock_name.upper()} SHOCK (regime {k + 1})"
            rows.append((label,) + tuple(float(v) for v in model.regimes[k].exog_coeffs[:, col]))
    lag_switching = model.spec.switching.lag_matrices and model.n_regimes > 1
    blocks = (
        [(f"regime {k + 1}", model.regimes[k].lag_matrices) for k in range(model.n_regimes)]
        if lag_switching
        else [("common", model.regimes[0].lag_matrices)]
    )
    for label, lags in blocks:
        for lag in range(lags.shape[0]):
            for j, regressor in enumerate(names):
                row_label = f"{regressor} (-{lag + 1})" + ("" if label == "common" else f" [{label}]")
                rows.append((row_label,) + tuple(float(lags[lag][i, j]) for i in range(len(names))))
    if model.spec.include_intercept:
        for k in range(model.n_regimes):
            label = f"intercept (regime {k + 1})" if model.n_regimes > 1 else "intercept"
            rows.append((label,) + tuple(float(v) for v in model.regimes[k].intercept))
            if not (model.spec.switching.intercept and model.n_regimes > 1):
                break
    return columns, rows


def fevd_rows(table: FevdTable, response: str) -> tuple[tuple[str, ...], list[tuple]]:
    """Per-period shares (printed as percents) for one response variable."""
    names = table.variable_names
    if response not in names:
        raise ValueError(f"unknown response variable {response!r}")
    i = names.index(response)
    columns = ("period", "S.E.") + names
    rows = []
    for h in range(table.shares.shape[0]):
        shares = table.shares[h, i] * 100.0
        rows.append((h + 1, table.forecast_std_errors[h, i]) + tuple(float(s) for s in shares))
    return columns, rows


def irf_rows(surfaces: Sequence[IrfSurface]) -> tuple[tuple[str, ...], list[tuple]]:
    """Long-format plot data: one row per (regime, shock, response, horizon)."""
    columns = ("regime", "shock", "response", "horizon", "value")
    rows = []
    for surf in surfaces:
        for h in range(surf.responses.shape[0]):
            for i, response in enumerate(surf.variable_names):
                rows.append(
                    (str(surf.regime), surf.shock_variable, response, h,
                     float(surf.responses[h, i]))
                )
    return columns, rows


def chronology_rows(chron: RegimeChronology) -> tuple[tuple[str, ...], list[tuple]]:
    columns = ("regime", "start_year", "end_year", "mean_probability")
    rows = [
        (e.regime + 1, e.start_year, e.end_year, e.mean_probability)
        for e in chron.episodes
    ]
    return columns, rows


def comparison_rows(table: ComparisonTable) -> tuple[tuple[str, ...], list[tuple]]:
    return tuple(table.columns), list(table.rows)


def jsonable(payload) -> object:
    return _jsonify(payload)
