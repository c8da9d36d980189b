"""Model document round-tripping must be lossless at full precision."""

from __future__ import annotations

import numpy as np
import pytest

from regimevar.exceptions import DataError
from regimevar.msvar.estimate import em_fit
from regimevar.msvar.serialize import (
    estimated_model_from_dict,
    estimated_model_to_dict,
    load_model,
    parameters_from_dict,
    parameters_to_dict,
    save_model,
)
from regimevar.msvar.simulate import simulate


@pytest.fixture(scope="module")
def fitted(two_regime_setup_module):
    params = two_regime_setup_module
    ds, _ = simulate(params, T=200, seed=42, burn_in=10)
    return em_fit(params.spec, ds, n_restarts=2, seed=1)


@pytest.fixture(scope="module")
def two_regime_setup_module():
    from conftest import make_regime
    from regimevar.msvar.model import ModelSpec, MsVarParameters, SwitchingMask, TransitionMatrix

    spec = ModelSpec(
        endogenous=("a", "b"),
        n_regimes=2,
        switching=SwitchingMask(True, False, False, True),
    )
    A = np.array([[0.3, 0.05], [0.0, 0.2]])
    regimes = (
        make_regime([0.0, 0.0], A, 0.25 * np.eye(2)),
        make_regime([4.0, -4.0], A, 0.5 * np.eye(2)),
    )
    return MsVarParameters(
        spec=spec, regimes=regimes,
        transition=TransitionMatrix(np.array([[0.95, 0.05], [0.05, 0.95]])),
    )


def test_roundtrip_bit_exact_in_memory(fitted):
    doc = estimated_model_to_dict(fitted)
    back = estimated_model_from_dict(doc)
    assert back.spec == fitted.spec
    for a, b in zip(fitted.regimes, back.regimes):
        assert a.intercept.tobytes() == b.intercept.tobytes()
        assert a.lag_matrices.tobytes() == b.lag_matrices.tobytes()
        assert a.exog_coeffs.tobytes() == b.exog_coeffs.tobytes()
        assert a.covariance.tobytes() == b.covariance.tobytes()
    assert back.transition.matrix.tobytes() == fitted.transition.matrix.tobytes()
    assert back.smoothed_probs.tobytes() == fitted.smoothed_probs.tobytes()
    assert back.filtered_probs.tobytes() == fitted.filtered_probs.tobytes()
    assert back.em_trace == fitted.em_trace
    assert back.log_likelihood == fitted.log_likelihood
    assert back.initial_distribution.tobytes() == fitted.initial_distribution.tobytes()
    for key, arr in fitted.standard_errors.items():
        assert back.standard_errors[key].tobytes() == arr.tobytes()


def test_roundtrip_through_file(fitted, tmp_path):
    path = tmp_path / "model.json"
    save_model(fitted, path)
    back = load_model(path)
    assert back.log_likelihood == fitted.log_likelihood
    assert back.smoothed_probs.tobytes() == fitted.smoothed_probs.tobytes()
    # serialize again: identical bytes on disk
    path2 = tmp_path / "model2.json"
    save_model(back, path2)
    assert path.read_text() == path2.read_text()


def test_parameters_roundtrip(two_regime_setup_module):
    params = two_regime_setup_module
    back = parameters_from_dict(parameters_to_dict(params))
    for a, b in zip(params.regimes, back.regimes):
        assert a.intercept.tobytes() == b.intercept.tobytes()
        assert a.covariance.tobytes() == b.covariance.tobytes()
    assert back.transition.matrix.tobytes() == params.transition.matrix.tobytes()


def test_unknown_version_rejected(fitted):
    doc = estimated_model_to_dict(fitted)
    doc["format_version"] = 999
    with pytest.raises(DataError, match="version"):
        estimated_model_from_dict(doc)
