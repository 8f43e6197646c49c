import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from semistab.cli import EXIT_INVALID, EXIT_OK, main
from semistab.core import Signal, TimeGrid, ValidationError
from semistab.io import (RunConfig, load_config, matrix_to_json, parse_matrix, parse_measure, parse_vector,
                         to_jsonable, write_signal_csv)
from semistab.presets import PRESETS, build, preset_config


def test_parse_vector_and_matrix():
    np.testing.assert_array_equal(parse_vector([1, [0, 2]]), [1, 2j])
    A = np.array([[1j, -1], [0.5, 2 - 1j]])
    np.testing.assert_array_equal(parse_matrix(matrix_to_json(A)), A)
    np.testing.assert_array_equal(parse_matrix([[1, 2], [3, [4, 1]]]), [[1, 2], [3, 4 + 1j]])
    np.testing.assert_array_equal(parse_matrix([[1, 0]]), [[1]])


@pytest.mark.parametrize("bad", [[], [1, 2, 3], [[1, 2], [3]], [["a"]], [[1, 2, 3]], "matrix"])
def test_parse_matrix_rejects(bad):
    with pytest.raises(ValidationError):
        parse_matrix(bad)


@pytest.mark.parametrize("bad", [[], [float("nan")], [[1, 2, 3]], [True]])
def test_parse_vector_rejects(bad):
    with pytest.raises(ValidationError):
        parse_vector(bad)


def test_parse_measure():
    assert parse_measure({"kind": "cantor", "depth": 4}).size == 16
    assert parse_measure({"kind": "atoms", "atoms": [[0, 0.5], [1, 0.5]]}).is_probability
    assert parse_measure({"kind": "lebesgue", "n": 10}).size == 10
    for bad in ({"kind": "atoms", "atoms": [1, 2, 3]}, {"kind": "other"}, {"depth": 3}, {"kind": "cantor", "depth": "x"}):
        with pytest.raises(ValidationError):
            parse_measure(bad)


def base_config(**kw):
    data = dict(scenario="matrix", matrix=[[-1, 0], [0, -2]], observations=[{"x": [1, 0], "y": [1, 0]}],
                horizon=20.0, dt=0.01)
    data.update(kw)
    return data


def test_run_config_roundtrip():
    cfg = RunConfig.from_dict(base_config(tolerances={"weak_tol": 0.1}))
    again = RunConfig.from_dict(json.loads(json.dumps(to_jsonable(cfg.to_dict()))))
    assert again == cfg
    assert cfg.classify_config().weak_tol == 0.1
    grid = RunConfig.from_dict({k: v for k, v in base_config().items() if k not in ("horizon", "dt")}
                               | {"grid": {"horizon": 5.0, "dt": 0.1}})
    assert (grid.horizon, grid.dt) == (5.0, 0.1)


@pytest.mark.parametrize("kw", [dict(scenario="heat"), dict(dt=0.0), dict(horizon=-1.0), dict(dt=30.0),
                                dict(matrix=None), dict(observations=[]), dict(tolerances={"horizon": 3}),
                                dict(tolerances={"bogus": 1}), dict(extra=1)])
def test_run_config_validation(kw):
    with pytest.raises(ValidationError):
        RunConfig.from_dict(base_config(**kw))


def test_load_config_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        load_config(bad)


def test_build_checks_dimensions():
    with pytest.raises(ValidationError):
        build(RunConfig.from_dict(base_config(observations=[{"x": [1, 0, 0], "y": [1, 0]}])))
    with pytest.raises(ValidationError):
        build(RunConfig.from_dict(dict(scenario="koopman", flow={"name": "nope"},
                                       observations=[{"observable": {"kind": "bump"}, "point": [0, 0]}])))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_build(name):
    backend, obs = build(preset_config(name, horizon=50.0))
    assert obs


def test_signal_csv_is_strided(tmp_path):
    grid = TimeGrid(dt=0.001, n_steps=50_000)
    s = Signal(grid, np.exp(1j * grid.times))
    rows = write_signal_csv(tmp_path / "s.csv", s, max_rows=1001)
    data = list(csv.reader(open(tmp_path / "s.csv")))
    assert data[0] == ["t", "re", "im", "abs", "running_mean"]
    assert rows == len(data) - 1 <= 1001
    assert float(data[-1][0]) == pytest.approx(50.0)
    assert data[1][4] == "nan"


def test_to_jsonable():
    out = to_jsonable({"a": np.array([1 + 2j]), "b": np.float64(np.inf), "c": np.bool_(True), "d": (np.int64(3),)})
    assert out == {"a": [[1.0, 2.0]], "b": "inf", "c": True, "d": [3]}


# command line -------------------------------------------------------------------------

def test_analyze_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(base_config(name="decay")))
    out = tmp_path / "out"
    assert main(["analyze", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert "weak-stability-evidence" in capsys.readouterr().out
    doc = json.loads((out / "report.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["report"]["verdict"] == "weak-stability-evidence"
    assert doc["extras"]["spectrum"]["bounded"]
    assert (out / "signals" / "observation_0.csv").exists()
    assert (out / "plots" / "observation_0.gp").exists()
    first = (out / "report.json").read_bytes()
    main(["analyze", "--config", str(cfg), "--out", str(out)])
    assert (out / "report.json").read_bytes() == first


@pytest.mark.parametrize("preset, verdict", [("imaginary-matrix", "not-almost-weak"),
                                             ("torus-rotation", "not-almost-weak"),
                                             ("lebesgue", "weak-stability-evidence")])
def test_analyze_presets(tmp_path, preset, verdict):
    assert main(["analyze", "--preset", preset, "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["report"]["verdict"] == verdict


def test_analyze_unbounded_matrix_is_inconclusive(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(base_config(matrix=[[0.1]], observations=[{"x": [1], "y": [1]}])))
    with pytest.warns(RuntimeWarning):
        assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["report"]["verdict"] == "inconclusive"
    assert "plancherel" not in doc["extras"]


@pytest.mark.parametrize("kw", [dict(dt=0), dict(matrix=[1, 2, 3]), dict(scenario="heat")])
def test_analyze_invalid_input_exit_code(tmp_path, kw, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(base_config(**kw)))
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_analyze_argument_errors(tmp_path):
    assert main(["analyze"]) == EXIT_INVALID
    assert main(["analyze", "--preset", "nope"]) == EXIT_INVALID


def test_presets_command(capsys):
    assert main(["presets"]) == EXIT_OK
    out = capsys.readouterr().out
    assert all(name in out for name in PRESETS)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "semistab.cli", "presets"], capture_output=True, text=True)
    assert res.returncode == 0 and "cantor" in res.stdout
