"""MacKinnon response surfaces for Dickey-Fuller-type tests.

Two sets of published constants are embedded:

* p-value polynomials (MacKinnon 1994, with the 2010 coefficient update),
  covering 1..6 integrated series for deterministic cases none / constant /
  constant+trend.  Small-p and large-p regions use cubic/quartic polynomials
  mapped through the standard normal CDF.
* finite-sample critical-value surfaces (MacKinnon 2010), covering up to 12
  integrated series: cv(T) = b0 + b1/T + b2/T^2 + b3/T^3 at 1/5/10%.

Beyond 6 integrated series no p-value polynomial exists, so p-values are
reported as a bracketing interval from the critical-value surfaces with a
log-linear point interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from regimevar.exceptions import ConfigError

__all__ = ["PValueResult", "dickey_fuller_pvalue", "critical_values", "DETERMINISTIC_CODES"]

DETERMINISTIC_CODES = {"none": "nc", "constant": "c", "constant+trend": "ct"}

MAX_POLY_N = 6  # largest series count covered by the p-value polynomials

# Statistic bounds per series count: above max -> p = 1, below min -> p = 0,
# star separates the small-p / large-p polynomial regions.
_TAU_STAR = {
    "nc": (-1.04, -1.53, -2.68, -3.09, -3.07, -3.77),
    "c": (-1.61, -2.62, -3.13, -3.47, -3.78, -3.93),
    "ct": (-2.89, -3.19, -3.5, -3.65, -3.8, -4.36),
}
_TAU_MIN = {
    "nc": (-19.04, -19.62, -21.21, -23.25, -21.63, -25.74),
    "c": (-18.83, -18.86, -23.48, -28.07, -25.96, -23.27),
    "ct": (-16.18, -21.15, -25.37, -26.63, -26.53, -26.18),
}
_TAU_MAX = {
    "nc": (np.inf, 1.51, 0.86, 0.88, 1.05, 1.24),
    "c": (2.74, 0.92, 0.55, 0.61, 0.79, 1.0),
    "ct": (0.7, 0.63, 0.71, 0.93, 1.19, 1.42),
}

# Small-p polynomials: p = Phi(c0 + c1*tau + c2*tau^2), row = N-1.
_TAU_SMALLP = {
    "nc": np.array([
        [0.6344, 1.2378, 3.2496e-2],
        [1.9129, 1.3857, 3.5322e-2],
        [2.7648, 1.4502, 3.4186e-2],
        [3.4336, 1.4835, 3.19e-2],
        [4.0999, 1.5533, 3.59e-2],
        [4.5388, 1.5344, 2.9807e-2],
    ]),
    "c": np.array([
        [2.1659, 1.4412, 3.8269e-2],
        [2.92, 1.5012, 3.9796e-2],
        [3.4699, 1.4856, 3.164e-2],
        [3.9673, 1.4777, 2.6315e-2],
        [4.5509, 1.5338, 2.9545e-2],
        [5.1399, 1.6036, 3.4445e-2],
    ]),
    "ct": np.array([
        [3.2512, 1.6047, 4.9588e-2],
        [3.6646, 1.5419, 3.6448e-2],
        [4.0983, 1.5173, 2.9898e-2],
        [4.5844, 1.5338, 2.8796e-2],
        [5.0722, 1.5634, 2.9472e-2],
        [5.53, 1.5914, 3.0392e-2],
    ]),
}

# Large-p polynomials: p = Phi(c0 + c1*tau + c2*tau^2 + c3*tau^3), row = N-1.
_TAU_LARGEP = {
    "nc": np.array([
        [0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2],
        [1.5578, 8.558e-1, -2.083e-1, -3.3549e-2],
        [2.2268, 6.8093e-1, -3.2362e-1, -5.4448e-2],
        [2.7654, 6.4502e-1, -3.0811e-1, -4.4946e-2],
        [3.2684, 6.8051e-1, -2.6778e-1, -3.4972e-2],
        [3.7268, 7.167e-1, -2.3648e-1, -2.8288e-2],
    ]),
    "c": np.array([
        [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
        [2.1945, 6.4695e-1, -2.9198e-1, -4.2377e-2],
        [2.5893, 4.5168e-1, -3.6529e-1, -5.0074e-2],
        [3.0387, 4.5452e-1, -3.3666e-1, -4.1921e-2],
        [3.5049, 5.2098e-1, -2.9158e-1, -3.3468e-2],
        [3.9489, 5.8933e-1, -2.5359e-1, -2.721e-2],
    ]),
    "ct": np.array([
        [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
        [2.85, 5.272e-1, -3.6622e-1, -5.1695e-2],
        [3.221, 5.255e-1, -3.2685e-1, -4.1501e-2],
        [3.652, 5.9758e-1, -2.7483e-1, -3.2081e-2],
        [4.0712, 6.6428e-1, -2.3464e-1, -2.546e-2],
        [4.4735, 7.1757e-1, -2.0681e-1, -2.1196e-2],
    ]),
}

# MacKinnon (2010) critical-value response surfaces, shape (N, level, coeff)
# with levels ordered (1%, 5%, 10%).
_CRIT_2010 = {
    "nc": np.array([
        [[-2.56574, -2.2358, -3.627, 0.0],
         [-1.941, -0.2686, -3.365, 31.223],
         [-1.61682, 0.2656, -2.714, 25.364]],
    ]),
    "c": np.array([
        [[-3.43035, -6.5393, -16.786, -79.433],
         [-2.86154, -2.8903, -4.234, -40.04],
         [-2.56677, -1.5384, -2.809, 0.0]],
        [[-3.89644, -10.9519, -33.527, 0.0],
         [-3.33613, -6.1101, -6.823, 0.0],
         [-3.04445, -4.2412, -2.72, 0.0]],
        [[-4.29374, -14.4354, -33.195, 47.433],
         [-3.74066, -8.5632, -10.852, 27.982],
         [-3.45218, -6.2143, -3.718, 0.0]],
        [[-4.64332, -18.1031, -37.972, 0.0],
         [-4.096, -11.2349, -11.175, 0.0],
         [-3.8102, -8.3931, -4.137, 0.0]],
        [[-4.95756, -21.8883, -45.142, 0.0],
         [-4.41519, -14.0405, -12.575, 0.0],
         [-4.13157, -10.7417, -3.784, 0.0]],
        [[-5.24568, -25.6688, -57.737, 88.639],
         [-4.70693, -16.9178, -17.492, 60.007],
         [-4.42501, -13.1875, -5.104, 27.877]],
        [[-5.51233, -29.576, -69.398, 164.295],
         [-4.97684, -19.9021, -22.045, 110.761],
         [-4.69648, -15.7315, -5.104, 27.877]],
        [[-5.76202, -33.5258, -82.189, 256.289],
         [-5.22924, -23.0023, -24.646, 144.479],
         [-4.95007, -18.3959, -7.344, 94.872]],
        [[-5.99742, -37.6572, -87.365, 248.316],
         [-5.46697, -26.2057, -26.627, 176.382],
         [-5.18897, -21.1377, -9.484, 172.704]],
        [[-6.22103, -41.7154, -102.68, 389.33],
         [-5.69244, -29.4521, -30.994, 251.016],
         [-5.41533, -24.0006, -7.514, 163.049]],
        [[-6.43377, -46.0084, -106.809, 352.752],
         [-5.90714, -32.8336, -30.275, 249.994],
         [-5.63086, -26.9693, -4.083, 151.427]],
        [[-6.6379, -50.2095, -124.156, 579.622],
         [-6.11279, -36.2681, -32.505, 314.802],
         [-5.83724, -29.9864, -2.686, 184.116]],
    ]),
    "ct": np.array([
        [[-3.95877, -9.0531, -28.428, -134.155],
         [-3.41049, -4.3904, -9.036, -45.374],
         [-3.12705, -2.5856, -3.925, -22.38]],
        [[-4.32762, -15.4387, -35.679, 0.0],
         [-3.78057, -9.5106, -12.074, 0.0],
         [-3.49631, -7.0815, -7.538, 21.892]],
        [[-4.66305, -18.7688, -49.793, 104.244],
         [-4.1189, -11.8922, -19.031, 77.332],
         [-3.83511, -9.0723, -8.504, 35.403]],
        [[-4.9694, -22.4694, -52.599, 51.314],
         [-4.42871, -14.5876, -18.228, 39.647],
         [-4.14633, -11.25, -9.873, 54.109]],
        [[-5.25276, -26.2183, -59.631, 50.646],
         [-4.71537, -17.3569, -22.66, 91.359],
         [-4.43422, -13.6078, -10.238, 76.781]],
        [[-5.51727, -29.976, -75.222, 202.253],
         [-4.98228, -20.305, -25.224, 132.03],
         [-4.70233, -16.1253, -9.836, 94.272]],
        [[-5.76537, -33.9165, -84.312, 245.394],
         [-5.23299, -23.3328, -28.955, 182.342],
         [-4.95405, -18.7352, -10.168, 120.575]],
        [[-6.00003, -37.8892, -96.428, 335.92],
         [-5.46971, -26.4771, -31.034, 220.165],
         [-5.19183, -21.4328, -10.726, 157.955]],
        [[-6.22288, -41.9496, -109.881, 466.068],
         [-5.69447, -29.7152, -33.784, 273.002],
         [-5.41738, -24.2882, -8.584, 169.891]],
        [[-6.43551, -46.1151, -120.814, 566.823],
         [-5.90887, -33.0251, -37.208, 346.189],
         [-5.63255, -27.2042, -6.792, 177.666]],
        [[-6.63894, -50.4287, -128.997, 642.781],
         [-6.11404, -36.461, -36.246, 348.554],
         [-5.8385, -30.1995, -5.163, 210.338]],
        [[-6.83488, -54.7119, -139.8, 736.376],
         [-6.31127, -39.9676, -37.021, 406.051],
         [-6.0365, -33.2381, -6.606, 317.776]],
    ]),
}

_LEVELS = (0.01, 0.05, 0.10)


@dataclass(frozen=True)
class PValueResult:
    """Approximate p-value; ``interval`` is set when only a bracket is known."""

    p: float
    interval: tuple[float, float] | None = None
    method: str = "response-surface"

    @property
    def bracketed(self) -> bool:
        return self.interval is not None


def _code(deterministic: str) -> str:
    if deterministic in DETERMINISTIC_CODES:
        return DETERMINISTIC_CODES[deterministic]
    if deterministic in DETERMINISTIC_CODES.values():
        return deterministic
    raise ConfigError(
        f"unknown deterministic spec {deterministic!r}; expected one of {sorted(DETERMINISTIC_CODES)}"
    )


def critical_values(deterministic: str, n_i1: int = 1, nobs: float = np.inf) -> dict[float, float]:
    """Finite-sample 1/5/10% critical values for the tau statistic."""
    code = _code(deterministic)
    table = _CRIT_2010[code]
    if not 1 <= n_i1 <= table.shape[0]:
        raise ConfigError(
            f"critical values for deterministic={deterministic!r} cover 1..{table.shape[0]} "
            f"integrated series, got {n_i1}"
        )
    coef = table[n_i1 - 1]
    powers = np.array([1.0, 1.0 / nobs, 1.0 / nobs**2, 1.0 / nobs**3])
    return {lev: float(coef[i] @ powers) for i, lev in enumerate(_LEVELS)}


def _polynomial_pvalue(stat: float, code: str, n_i1: int) -> float:
    idx = n_i1 - 1
    if stat > _TAU_MAX[code][idx]:
        return 1.0
    if stat < _TAU_MIN[code][idx]:
        return 0.0
    if stat <= _TAU_STAR[code][idx]:
        coef = _TAU_SMALLP[code][idx]
    else:
        coef = _TAU_LARGEP[code][idx]
    return float(norm.cdf(np.polyval(coef[::-1], stat)))


def _bracket_pvalue(stat: float, code: str, n_i1: int, nobs: float) -> PValueResult:
    cv = critical_values(code, n_i1, nobs)
    anchors = sorted(((cv[lev], lev) for lev in _LEVELS))  # most negative first
    points = [a[0] for a in anchors]
    logp = [np.log(a[1]) for a in anchors]
    if stat <= points[0]:
        return PValueResult(p=min(_LEVELS), interval=(0.0, min(_LEVELS)), method="critical-value bracket")
    if stat >= points[-1]:
        p = float(min(1.0, np.exp(np.interp(stat, points, logp))))
        return PValueResult(p=p, interval=(max(_LEVELS), 1.0), method="critical-value bracket")
    p = float(np.exp(np.interp(stat, points, logp)))
    lower = max(lev for cvv, lev in anchors if cvv <= stat)
    upper = min(lev for cvv, lev in anchors if cvv >= stat)
    return PValueResult(p=p, interval=(lower, upper), method="critical-value bracket")


def dickey_fuller_pvalue(
    stat: float, deterministic: str = "constant", n_i1: int = 1, nobs: float = np.inf
) -> PValueResult:
    """Approximate p-value for a tau statistic with ``n_i1`` integrated series.

    Uses the p-value polynomials when available (n_i1 <= 6); otherwise falls
    back to a bracketing interval from the critical-value surfaces.
    """
    code = _code(deterministic)
    if n_i1 < 1:
        raise ConfigError(f"n_i1 must be >= 1, got {n_i1}")
    if n_i1 <= MAX_POLY_N:
        return PValueResult(p=_polynomial_pvalue(float(stat), code, n_i1))
    return _bracket_pvalue(float(stat), code, n_i1, nobs)
