import math

import numpy as np
import pytest

from iskf.config import load_config, parse_config
from iskf.errors import ConfigError
from iskf.io import read_json, read_table, read_trajectory, to_jsonable, write_json, write_table, write_trajectory
from iskf.satfun import INF
from iskf.sim import simulate


@pytest.mark.parametrize("fmt", ["csv", "structured"])
def test_table_roundtrip(tmp_path, fmt):
    cols = ["name", "k", "value", "lam", "missing"]
    rows = [["a", 1, 0.1 + 0.2, INF, None], ["b", 2, -1e-300, 2.5, 3.0]]
    path = write_table(tmp_path / "t", cols, rows, fmt)
    assert path.suffix == (".csv" if fmt == "csv" else ".json")
    c2, r2 = read_table(path)
    assert c2 == cols
    assert r2 == rows


@pytest.mark.parametrize("fmt", ["csv", "structured"])
def test_trajectory_roundtrip(tmp_path, fmt, vehicle):
    traj = simulate(*vehicle, 40, seed=11)
    back = read_trajectory(write_trajectory(tmp_path / "traj", traj, fmt))
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.measurements, traj.measurements)
    np.testing.assert_array_equal(back.process_outlier_flags, traj.process_outlier_flags)
    np.testing.assert_array_equal(back.meas_outlier_flags, traj.meas_outlier_flags)


def test_table_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        write_table(tmp_path / "t", ["a"], [[1]], "xml")


def test_json_encoding(tmp_path):
    obj = {"a": np.arange(3), "b": np.float64(math.inf), "c": np.bool_(True), "d": (1, np.int64(2))}
    assert to_jsonable(obj) == {"a": [0, 1, 2], "b": "inf", "c": True, "d": [1, 2]}
    assert read_json(write_json(tmp_path / "x.json", obj))["b"] == "inf"


def test_parse_defaults():
    cfg = parse_config({"model": "vehicle"})
    assert cfg.model.n == 4 and cfg.T == 1000 and cfg.seed_test == 42
    assert [f.type for f in cfg.filters] == ["kf"]
    assert len(cfg.lambda_x_values) == 20 and cfg.lambda_x_values[0] == pytest.approx(0.1)
    assert cfg.outliers.p_meas == 0.1


def test_parse_custom_model_and_inf():
    raw = {
        "model": {"A": [[0.9]], "C": [[1.0]], "F": [[1.0]], "G": [[1.0]]},
        "filters": [{"type": "iskf", "lambda_x": "inf", "lambda_y": 2.0, "k_tilde": 3}],
        "grid": {"lambda_x": [0.5, "inf"], "lambda_y": {"min": 1, "max": 100, "num": 3}},
    }
    cfg = parse_config(raw)
    fs = cfg.filters[0]
    assert fs.name == "iskf_k3" and fs.params().lambda_x == INF
    assert cfg.lambda_x_values == (0.5, INF)
    np.testing.assert_allclose(cfg.lambda_y_values, [1, 10, 100])


@pytest.mark.parametrize("raw, path", [
    ({"model": "vehicle", "bogus": 1}, ""),
    ({"model": "plane"}, "model"),
    ({"model": "vehicle", "filters": [{"type": "ukf"}]}, "filters.0.type"),
    ({"model": "vehicle", "filters": [{"type": "iskf", "lambda_x": -1}]}, "filters.0.lambda_x"),
    ({"model": "vehicle", "outliers": {"p_meas": 2}}, "outliers.p_meas"),
    ({"model": "vehicle", "filters": [{"type": "kf"}, {"type": "kf"}]}, "filters.1.name"),
    ({"model": "vehicle", "truth_noise": {"G": [[0.0]]}}, "truth_noise.G"),
    ({"model": "vehicle", "x0": [1.0]}, "x0"),
    ({"model": "vehicle", "filters": [{"type": "iskf", "eta": 3}]}, "filters.0"),
    ({"model": {"A": [[1.0]], "C": [[1.0]], "F": [[1.0]], "G": [[0.0]]}}, "model"),
])
def test_config_errors_carry_path(raw, path):
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.path == path


def test_load_config_from_manifest(tmp_path):
    write_json(tmp_path / "manifest.json", {"manifest_version": 1, "config": {"model": "cstr", "T": 5}})
    cfg = load_config(tmp_path / "manifest.json")
    assert cfg.model.n == 6 and cfg.T == 5
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
