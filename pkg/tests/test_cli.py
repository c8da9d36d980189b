"""CLI behavior: exit codes, error records, composability, determinism."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import pytest

from regimevar.cli import main

SMALL_CONFIG = {
    "seed": 4242,
    "countries": ["north", "south"],
    "input": {
        "path": "out/simulate/panel.csv",
        "layout": "long",
        "columns": {"country": "country", "series": "series", "year": "year", "value": "value"},
    },
    "transforms": {},
    "covid_window": [2020, 2022],
    "model": {
        "endogenous": ["f1", "f2", "h1", "h2"],
        "exogenous": ["covid"],
        "lag_order": 1,
        "n_regimes": 2,
        "switching": {
            "intercept": True,
            "lag_matrices": False,
            "exog_coefficients": True,
            "covariance": True,
        },
        "ordering": ["f1", "f2", "h1", "h2"],
    },
    "estimation": {"n_restarts": 3, "max_iter": 200},
    "tests": {"deterministic": "constant", "lag_selection": "bic"},
    "analysis": {
        "horizon": 8,
        "household_variables": ["h1", "h2"],
        "fiscal_variables": ["f1", "f2"],
        "shock_name": "covid",
    },
    "output": {"directory": "out", "formats": ["csv", "json"]},
    "simulate": {"t_obs": 120, "burn_in": 30, "intercept_gap": 4.0, "noise_scale": 0.5,
                 "regime_persistence": 0.92},
}


def write_config(tmp_path: Path, doc=None) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc or SMALL_CONFIG, indent=1))
    return path


def tree_digest(root: Path) -> dict[str, str]:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestErrors:
    def test_unknown_config_key_exit_1_names_key(self, workdir, capsys):
        doc = dict(SMALL_CONFIG)
        doc = json.loads(json.dumps(doc))
        doc["mystery_knob"] = 1
        cfg = write_config(workdir, doc)
        code = main(["ingest", "--config", str(cfg)])
        assert code == 1
        err = capsys.readouterr().err.strip()
        record = json.loads(err)  # single-line machine-parseable record
        assert record["exit_code"] == 1
        assert "mystery_knob" in record["message"]

    def test_missing_input_file_exit_3(self, workdir, capsys):
        cfg = write_config(workdir)
        code = main(["ingest", "--config", str(cfg)])
        assert code == 3
        record = json.loads(capsys.readouterr().err.strip())
        assert record["exit_code"] == 3

    def test_missing_fit_output_is_validation_error(self, workdir, capsys):
        cfg = write_config(workdir)
        assert main(["simulate", "--config", str(cfg)]) == 0
        code = main(["analyze", "--config", str(cfg)])
        assert code == 1
        record = json.loads(capsys.readouterr().err.strip())
        assert "fit" in record["message"]

    def test_numerical_failure_exit_2(self, workdir, capsys):
        doc = json.loads(json.dumps(SMALL_CONFIG))
        doc["simulate"]["t_obs"] = 14  # below the identifiability floor
        cfg = write_config(workdir, doc)
        assert main(["simulate", "--config", str(cfg)]) == 0
        code = main(["fit", "--config", str(cfg)])
        assert code == 2
        record = json.loads(capsys.readouterr().err.strip())
        assert record["exit_code"] == 2
        assert "floor" in record["message"]


class TestPipeline:
    def test_full_pipeline_and_composability(self, workdir):
        cfg = write_config(workdir)
        for stage in ("simulate", "ingest", "pretest", "fit"):
            assert main([stage, "--config", str(cfg)]) == 0, stage
        # analyze must consume only fit output: remove every other stage dir
        for stage in ("ingest", "pretest"):
            for p in (workdir / "out" / stage).rglob("*"):
                if p.is_file():
                    p.unlink()
        assert main(["analyze", "--config", str(cfg)]) == 0
        out = workdir / "out" / "analyze"
        assert (out / "covid_comparison.csv").exists()
        assert (out / "north_irf.csv").exists()
        assert (out / "north_fevd_regime1.csv").exists()
        assert (out / "north_regimes.csv").exists()

    def test_seed_override_takes_effect(self, workdir):
        cfg = write_config(workdir)
        assert main(["simulate", "--config", str(cfg), "--seed", "777"]) == 0
        header = (workdir / "out" / "simulate" / "panel.csv").read_text().splitlines()[1]
        assert header == "# master_seed: 777"

    def test_format_override(self, workdir):
        cfg = write_config(workdir)
        assert main(["simulate", "--config", str(cfg)]) == 0
        assert main(["ingest", "--config", str(cfg), "--format", "json"]) == 0
        ingest = workdir / "out" / "ingest"
        assert list(ingest.glob("*.csv")) == []
        assert (ingest / "north_dataset.json").exists()


@pytest.mark.slow
class TestDeterminism:
    def test_two_runs_byte_identical(self, tmp_path, monkeypatch):
        digests = []
        for run in ("run1", "run2"):
            workdir = tmp_path / run
            workdir.mkdir()
            monkeypatch.chdir(workdir)
            cfg = write_config(workdir)
            for stage in ("simulate", "ingest", "pretest", "fit", "analyze"):
                assert main([stage, "--config", str(cfg)]) == 0, stage
            digests.append(tree_digest(workdir / "out"))
        assert digests[0] == digests[1]


class TestRandomWalkFixture:
    def test_pretest_fails_to_reject_at_level(self, workdir):
        repo_config = Path(__file__).resolve().parents[1] / "configs" / "pretest_randomwalk.json"
        doc = json.loads(repo_config.read_text())
        cfg = write_config(workdir, doc)
        assert main(["simulate", "--config", str(cfg)]) == 0
        assert main(["pretest", "--config", str(cfg)]) == 0
        level = json.loads((workdir / "out" / "pretest" / "unitroot_level.json").read_text())
        computed = [r for r in level["data"] if r["statistic"] != "not computed"]
        assert len(computed) == 3
        for row in computed:
            assert row["p_value"] > 0.10  # fail to reject the unit root
        diff = json.loads(
            (workdir / "out" / "pretest" / "unitroot_first_difference.json").read_text()
        )
        for row in [r for r in diff["data"] if r["statistic"] != "not computed"]:
            assert row["p_value"] < 0.01
