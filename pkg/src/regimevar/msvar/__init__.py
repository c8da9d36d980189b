"""K-regime Markov-switching VAR: types, simulation, filtering, estimation."""

from regimevar.msvar.model import (
    EstimatedMsVar,
    FilterOutput,
    ModelSpec,
    MsVarParameters,
    RegimeParameterSet,
    SwitchingMask,
    TransitionMatrix,
    companion_matrix,
    regression_arrays,
)
from regimevar.msvar.simulate import simulate
from regimevar.msvar.filtering import hamilton_filter, kim_smoother
from regimevar.msvar.estimate import em_fit, loglikelihood, ols_var_fit
from regimevar.msvar.serialize import (
    estimated_model_from_dict,
    estimated_model_to_dict,
    load_model,
    save_model,
)

__all__ = [
    "SwitchingMask",
    "ModelSpec",
    "RegimeParameterSet",
    "TransitionMatrix",
    "MsVarParameters",
    "FilterOutput",
    "EstimatedMsVar",
    "companion_matrix",
    "regression_arrays",
    "simulate",
    "hamilton_filter",
    "kim_smoother",
    "em_fit",
    "ols_var_fit",
    "loglikelihood",
    "estimated_model_to_dict",
    "estimated_model_from_dict",
    "save_model",
    "load_model",
]
