import json

import numpy as np
import pytest

from iskf.cli import EXIT_CONFIG, EXIT_NUMERICAL, main
from iskf.io import read_json, read_table, read_trajectory


def write_config(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def results(out):
    cols, rows = read_table(out / "results.csv")
    return {r[0]: dict(zip(cols, r)) for r in rows}


def test_simulate_writes_trajectory(tmp_path, capsys):
    assert main(["simulate", "--model", "cstr", "--T", "30", "--seed", "4", "--out", str(tmp_path)]) == 0
    traj = read_trajectory(tmp_path / "trajectory.csv")
    assert traj.states.shape == (31, 6) and traj.measurements.shape == (30, 3)
    assert str(tmp_path / "trajectory.csv") in capsys.readouterr().out


def test_simulate_structured_without_outliers(tmp_path):
    assert main(["simulate", "--T", "20", "--no-outliers", "--format", "structured", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "trajectory.json").exists()


def test_tune_writes_grid_and_best(tmp_path):
    assert main(["tune", "--T", "200", "--k-tilde", "1", "--out", str(tmp_path)]) == 0
    best = read_json(tmp_path / "best.json")
    assert best["k_tilde"] == 1 and best["scoring"] == "meas"
    cols, rows = read_table(tmp_path / "grid_iskf_k1.csv")
    assert cols == ["lambda_x", "lambda_y", "eta", "score"] and len(rows) == 400
    assert min(r[3] for r in rows) == best["score"]


def test_tune_huber(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"model": "vehicle", "grid": {"lambda_x": [0.5, 1], "lambda_y": [1, 2]}})
    assert main(["tune", "--config", cfg, "--T", "100", "--huber", "--out", str(tmp_path / "o")]) == 0
    assert len(read_table(tmp_path / "o" / "grid_huber.csv")[1]) == 4


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"model": "vehicle", "filters": [{"type": "ukf"}]})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "filters.0.type" in capsys.readouterr().err


def test_unreadable_config_exit_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path, capsys):
    # unstable mode that the output never sees
    cfg = write_config(tmp_path / "c.json", {"model": {"A": [[2.0]], "C": [[0.0]], "F": [[1.0]], "G": [[1.0]]}})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_NUMERICAL
    assert "NoConvergence" in capsys.readouterr().err


def test_noise_free_kf_has_zero_error(tmp_path):
    cfg = write_config(tmp_path / "c.json", {
        "model": "vehicle", "T": 100, "filters": [{"type": "kf"}],
        "truth_noise": {"F": [[0, 0]] * 4, "G": [[0, 0], [0, 0]]},
    })
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert results(tmp_path / "o")["kf"]["rmse"] == 0.0


def test_infinite_thresholds_reproduce_kf(tmp_path):
    cfg = write_config(tmp_path / "c.json", {
        "model": "cstr", "T": 300,
        "filters": [{"type": "kf"}, {"type": "iskf", "k_tilde": 2, "lambda_x": "inf", "lambda_y": "inf"}],
    })
    out = tmp_path / "o"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    res = results(out)
    assert res["iskf_k2"]["rmse"] == pytest.approx(res["kf"]["rmse"], abs=1e-12)
    assert res["iskf_k2"]["lambda_x"] == float("inf")
    kf = np.array(read_table(out / "estimates_kf.csv")[1])
    iskf = np.array(read_table(out / "estimates_iskf_k2.csv")[1])
    np.testing.assert_allclose(iskf, kf, atol=1e-12)


@pytest.mark.slow
def test_sweep_nonincreasing(tmp_path):
    cfg = write_config(tmp_path / "c.json", {
        "model": "vehicle", "T": 1000, "filters": [{"type": "kf"}], "sweep": {"k_tilde": [1, 2, 3, 4, 5]},
    })
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    cols, rows = read_table(tmp_path / "o" / "sweep.csv")
    rmse = [r[cols.index("rmse")] for r in rows]
    assert [r[0] for r in rows] == [1, 2, 3, 4, 5]
    assert all(b <= 1.02 * a for a, b in zip(rmse, rmse[1:]))


def _numeric_files(out):
    return sorted(p.name for p in out.iterdir() if p.name != "manifest.json")


@pytest.mark.slow
def test_manifest_reproduces_run(tmp_path):
    cfg = write_config(tmp_path / "c.json", {
        "model": "vehicle", "T": 300, "seeds": {"tune": 3, "test": 4},
        "filters": [{"type": "kf"}, {"type": "iskf", "k_tilde": 2, "tune": True}, {"type": "huber", "tune": True}],
        "grid": {"lambda_x": {"min": 0.1, "max": 10, "num": 5}, "lambda_y": {"min": 0.1, "max": 10, "num": 5}},
        "outlier_free_eval": True,
    })
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(a)]) == 0
    assert main(["run", "--config", str(a / "manifest.json"), "--out", str(b)]) == 0
    assert _numeric_files(a) == _numeric_files(b)
    for name in _numeric_files(a):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    ma, mb = read_json(a / "manifest.json"), read_json(b / "manifest.json")
    ma.pop("created"), mb.pop("created")
    assert ma == mb
    assert ma["selected_params"]["iskf_k2"]["k_tilde"] == 2
    assert ma["seeds"] == {"tune": 3, "test": 4}


def test_run_structured_format(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"model": "vehicle", "T": 50})
    assert main(["run", "--config", cfg, "--format", "structured", "--out", str(tmp_path / "o")]) == 0
    recs = read_json(tmp_path / "o" / "results.json")
    assert recs[0]["method"] == "kf" and recs[0]["improvement_pct"] is None
    assert set(read_json(tmp_path / "o" / "manifest.json")["files"]) >= {"results.json", "gains.json"}


def test_run_from_trajectory_file(tmp_path):
    assert main(["simulate", "--T", "60", "--seed", "8", "--out", str(tmp_path)]) == 0
    cfg = write_config(tmp_path / "c.json", {"model": "vehicle", "trajectory_file": "trajectory.csv"})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    res = results(tmp_path / "o")["kf"]
    assert res["rmse"] > 0 and res["rmse_no_outliers"] is None


def test_bench_small(tmp_path):
    assert main(["bench", "--sizes", "4", "--p", "2", "--steps", "50", "--out", str(tmp_path)]) == 0
    cols, rows = read_table(tmp_path / "bench.csv")
    assert cols[-1] == "ratio" and rows[0][0] == 4 and rows[0][1] == 2


def test_bad_arguments_exit():
    with pytest.raises(SystemExit) as info:
        main(["reproduce", "plane", "--out", "x"])
    assert info.value.code == 2
