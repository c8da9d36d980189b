"""Lossless JSON round-tripping of estimated models.

Floats serialize through Python's shortest-repr rule, which parses back to
the identical double, so save/load is bit-faithful.  The document carries a
format version for forward compatibility.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from regimevar.exceptions import DataError
from regimevar.msvar.model import (
    EstimatedMsVar,
    ModelSpec,
    MsVarParameters,
    RegimeParameterSet,
    SwitchingMask,
    TransitionMatrix,
)

__all__ = [
    "estimated_model_to_dict",
    "estimated_model_from_dict",
    "parameters_to_dict",
    "parameters_from_dict",
    "save_model",
    "load_model",
]

FORMAT_VERSION = 1


def _arr(a: np.ndarray) -> list:
    return np.asarray(a, dtype=float).tolist()


def _spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "endogenous": list(spec.endogenous),
        "exogenous": list(spec.exogenous),
        "lag_order": spec.lag_order,
        "n_regimes": spec.n_regimes,
        "switching": {
            "intercept": spec.switching.intercept,
            "lag_matrices": spec.switching.lag_matrices,
            "exog_coefficients": spec.switching.exog_coefficients,
            "covariance": spec.switching.covariance,
        },
        "identification_ordering": list(spec.identification_ordering),
        "include_intercept": spec.include_intercept,
    }


def _spec_from_dict(s: dict) -> ModelSpec:
    return ModelSpec(
        endogenous=tuple(s["endogenous"]),
        exogenous=tuple(s["exogenous"]),
        lag_order=int(s["lag_order"]),
        n_regimes=int(s["n_regimes"]),
        switching=SwitchingMask.from_dict(s["switching"]),
        identification_ordering=tuple(s["identification_ordering"]),
        include_intercept=bool(s["include_intercept"]),
    )


def _regimes_to_list(regimes) -> list[dict]:
    return [
        {
            "intercept": _arr(reg.intercept),
            "lag_matrices": _arr(reg.lag_matrices),
            "exog_coeffs": _arr(reg.exog_coeffs),
            "covariance": _arr(reg.covariance),
        }
        for reg in regimes
    ]


def _regimes_from_list(items, n: int, m: int) -> tuple[RegimeParameterSet, ...]:
    return tuple(
        RegimeParameterSet(
            intercept=np.array(r["intercept"], dtype=float),
            lag_matrices=np.array(r["lag_matrices"], dtype=float),
            exog_coeffs=np.array(r["exog_coeffs"], dtype=float).reshape(n, m),
            covariance=np.array(r["covariance"], dtype=float),
        )
        for r in items
    )


def parameters_to_dict(params: MsVarParameters) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "spec": _spec_to_dict(params.spec),
        "regimes": _regimes_to_list(params.regimes),
        "transition": _arr(params.transition.matrix),
        "initial_distribution": (
            None if params.initial_distribution is None else _arr(params.initial_distribution)
        ),
    }


def parameters_from_dict(doc: dict) -> MsVarParameters:
    spec = _spec_from_dict(doc["spec"])
    init = doc.get("initial_distribution")
    return MsVarParameters(
        spec=spec,
        regimes=_regimes_from_list(doc["regimes"], spec.n_vars, spec.n_exog),
        transition=TransitionMatrix(np.array(doc["transition"], dtype=float)),
        initial_distribution=None if init is None else np.array(init, dtype=float),
    )


def estimated_model_to_dict(model: EstimatedMsVar) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "spec": _spec_to_dict(model.spec),
        "regimes": _regimes_to_list(model.regimes),
        "transition": _arr(model.transition.matrix),
        "initial_distribution": _arr(model.initial_distribution),
        "smoothed_probs": _arr(model.smoothed_probs),
        "filtered_probs": _arr(model.filtered_probs),
        "log_likelihood": model.log_likelihood,
        "em_trace": list(model.em_trace),
        "converged": model.converged,
        "restarts_used": model.restarts_used,
        "standard_errors": (
            None
            if model.standard_errors is None
            else {k: _arr(v) for k, v in sorted(model.standard_errors.items())}
        ),
        "se_method": model.se_method,
    }


def estimated_model_from_dict(doc: dict) -> EstimatedMsVar:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported model document version {version!r}")
    spec = _spec_from_dict(doc["spec"])
    regimes = _regimes_from_list(doc["regimes"], spec.n_vars, spec.n_exog)
    se = doc.get("standard_errors")
    return EstimatedMsVar(
        spec=spec,
        regimes=regimes,
        transition=TransitionMatrix(np.array(doc["transition"], dtype=float)),
        initial_distribution=np.array(doc["initial_distribution"], dtype=float),
        smoothed_probs=np.array(doc["smoothed_probs"], dtype=float),
        filtered_probs=np.array(doc["filtered_probs"], dtype=float),
        log_likelihood=float(doc["log_likelihood"]),
        em_trace=tuple(float(v) for v in doc["em_trace"]),
        converged=bool(doc["converged"]),
        restarts_used=int(doc["restarts_used"]),
        standard_errors=None if se is None else {k: np.array(v, dtype=float) for k, v in se.items()},
        se_method=doc.get("se_method", "opg-numerical (approximate)"),
    )


def save_model(model: EstimatedMsVar, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(estimated_model_to_dict(model), indent=1, sort_keys=True) + "\n")


def load_model(path: str | Path) -> EstimatedMsVar:
    return estimated_model_from_dict(json.loads(Path(path).read_text()))
