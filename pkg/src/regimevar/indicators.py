"""Consumption-theory indicators: discount factor, Euler residual, MPC, IMPC.

MPC at year t is the ratio of the contemporaneous consumption change to the
income change; IMPC is the same ratio one period ahead, aligned back to t.
Near-zero income changes are flagged rather than divided through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from regimevar.exceptions import DataError
from regimevar.panel import Series

__all__ = [
    "DiscountFactor",
    "IndicatorSeries",
    "discount_factor",
    "mpc_series",
    "impc_series",
    "euler_residual",
    "indicator_to_series",
]

DEFAULT_GUARD_EPSILON = 1e-3


@dataclass(frozen=True)
class DiscountFactor:
    r: float
    beta: float


@dataclass(frozen=True)
class IndicatorSeries:
    """Derived indicator values keyed by year; flagged entries carry a reason
    and are excluded from downstream statistics."""

    name: str
    years: tuple[int, ...]
    values: tuple[float | None, ...]
    flags: tuple[str | None, ...]
    guard_epsilon: float = DEFAULT_GUARD_EPSILON

    def __post_init__(self) -> None:
        if not (len(self.years) == len(self.values) == len(self.flags)):
            raise DataError(f"indicator {self.name!r}: years/values/flags lengths differ")
        for v, f in zip(self.values, self.flags):
            if (v is None) != (f is not None):
                raise DataError(f"indicator {self.name!r}: every flagged entry must lack a value")

    def usable(self) -> tuple[tuple[int, float], ...]:
        return tuple((y, v) for y, v, f in zip(self.years, self.values, self.flags) if f is None)


def discount_factor(r: float) -> DiscountFactor:
    """beta = 1 / (1 + r); requires r > -1."""
    if not r > -1.0:
        raise DataError(f"real interest rate must exceed -1, got {r}")
    return DiscountFactor(r=float(r), beta=1.0 / (1.0 + float(r)))


def _aligned_arrays(consumption: Series, income: Series, min_len: int, op: str):
    if consumption.years != income.years:
        raise DataError(f"{op}: consumption and income year indices differ")
    if len(consumption) < min_len:
        raise DataError(f"{op}: need at least {min_len} aligned years, got {len(consumption)}")
    return consumption.to_array(), income.to_array()


def _ratio_of_changes(
    dc: np.ndarray, dy: np.ndarray, guard_epsilon: float
) -> tuple[list[float | None], list[str | None]]:
    sd = float(np.std(dy))
    threshold = guard_epsilon * sd if sd > 0 else guard_epsilon
    values: list[float | None] = []
    flags: list[str | None] = []
    for c, y in zip(dc, dy):
        if abs(y) < threshold or y == 0.0:
            values.append(None)
            flags.append("income change below guard threshold")
        else:
            values.append(float(c / y))
            flags.append(None)
    return values, flags


def mpc_series(
    consumption: Series, income: Series, guard_epsilon: float = DEFAULT_GUARD_EPSILON
) -> IndicatorSeries:
    """Marginal propensity to consume: delta-C over delta-Y per year."""
    c, y = _aligned_arrays(consumption, income, 2, "mpc_series")
    values, flags = _ratio_of_changes(np.diff(c), np.diff(y), guard_epsilon)
    return IndicatorSeries(
        name="MPC",
        years=consumption.years[1:],
        values=tuple(values),
        flags=tuple(flags),
        guard_epsilon=guard_epsilon,
    )


def impc_series(
    consumption: Series, income: Series, guard_epsilon: float = DEFAULT_GUARD_EPSILON
) -> IndicatorSeries:
    """Intertemporal MPC: next period's MPC aligned back one year."""
    _aligned_arrays(consumption, income, 3, "impc_series")
    mpc = mpc_series(consumption, income, guard_epsilon)
    return IndicatorSeries(
        name="IMPC",
        years=mpc.years[:-1],
        values=mpc.values[1:],
        flags=mpc.flags[1:],
        guard_epsilon=guard_epsilon,
    )


def euler_residual(consumption: Series, r: float, beta: float) -> IndicatorSeries:
    """Log-linear Euler equation residual per period.

    residual_t = [ln C_t - ln C_{t+1}] - [ln(1+r) + ln beta]; with
    beta = 1/(1+r) the constant vanishes and the residual is the negative
    log consumption growth.
    """
    if not r > -1.0:
        raise DataError(f"real interest rate must exceed -1, got {r}")
    if not 0.0 < beta:
        raise DataError(f"discount factor must be positive, got {beta}")
    if len(consumption) < 2:
        raise DataError("euler_residual: need at least 2 consumption observations")
    c = consumption.to_array()
    for year, v in zip(consumption.years, c):
        if v <= 0:
            raise DataError(f"euler_residual: nonpositive consumption {v} at year {year}")
    constant = math.log1p(r) + math.log(beta)
    resid = np.log(c[:-1]) - np.log(c[1:]) - constant
    return IndicatorSeries(
        name="EulerResidual",
        years=consumption.years[:-1],
        values=tuple(float(v) for v in resid),
        flags=(None,) * (len(consumption) - 1),
    )


def indicator_to_series(ind: IndicatorSeries, name: str | None = None) -> Series:
    """Convert an indicator into a panel series (flagged entries -> missing)."""
    return Series(
        name=name or ind.name.lower(),
        years=ind.years,
        values=tuple(v for v in ind.values),
    )
