"""Experiment pipeline shared by the ``run`` and ``reproduce`` commands.

:func:`run_experiment` takes a validated :class:`~iskf.config.ExperimentConfig`,
simulates (or loads) a tuning and a test trajectory, tunes the requested
filters by grid search on the tuning data, evaluates every filter on the
test data and returns a :class:`Report` holding plain tables.  Nothing here
touches the file system except :func:`write_report` and trajectory loading.
"""

import datetime
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .batch import HuberizedRunner, SteadyIskfRunner
from .config import parse_config
from .filters import (
    IskfParams,
    iskf_step,
    run_huberized,
    run_iskf,
    run_kf,
    run_ss_iskf,
    run_ss_kf,
    ss_iskf_step,
    initial_state,
)
from .io import read_trajectory, write_json, write_table, write_trajectory
from .model import build_model
from .riccati import dare_residual, solve_steady
from .sim import simulate
from .tune import grid_search, state_rmse

__all__ = ["Report", "reproduce_config", "run_experiment", "write_report", "bench"]

RICCATI_TOL = 1e-12
RESULT_COLUMNS = [
    "method", "type", "k_tilde", "lambda_x", "lambda_y", "eta",
    "rmse", "improvement_pct", "rmse_no_outliers", "tune_score",
]


@dataclass
class Report:
    tables: dict = field(default_factory=dict)       # name -> (columns, rows)
    trajectories: dict = field(default_factory=dict)  # name -> Trajectory
    documents: dict = field(default_factory=dict)     # name -> JSON-able object
    results: dict = field(default_factory=dict)       # method -> rmse

    def table_dicts(self, name):
        cols, rows = self.tables[name]
        return [dict(zip(cols, r)) for r in rows]


def reproduce_config(example, seed_tune=0, seed_test=42, T=1000, tune_eta=True, sweep=(1, 2, 3, 4, 5)):
    """Config for the benchmark comparison: KF, tuned ISKF (k = 1, 2, 3) and Huberized KF."""
    filters = [{"name": "kf", "type": "kf"}]
    filters += [{"name": f"iskf_k{k}", "type": "iskf", "k_tilde": k, "tune": True} for k in (1, 2, 3)]
    filters.append({"name": "huber", "type": "huber", "tune": True})
    if tune_eta:
        filters.append({"name": "iskf_k2_eta", "type": "iskf", "k_tilde": 2, "tune": True, "tune_eta": True})
    cfg = {
        "model": example,
        "T": T,
        "T_tune": T,
        "seeds": {"tune": seed_tune, "test": seed_test},
        "filters": filters,
        "scoring": "meas",
        "outlier_free_eval": True,
    }
    if sweep:
        cfg["sweep"] = {"k_tilde": list(sweep), "scoring": "state"}
    return cfg


def _grid_rows(result):
    return [
        [lx, ly, e, s]
        for lx, ly, e, s in zip(result.lambda_x, result.lambda_y, result.eta, result.scores)
    ]


def _load_or_simulate(cfg, path, T, seed, spec):
    if path is not None:
        p = Path(path)
        if not p.is_absolute():
            p = cfg.base_dir / p
        return read_trajectory(p, seed=seed)
    return simulate(cfg.model, spec, T, seed, x0=cfg.x0, F=cfg.truth_F, G=cfg.truth_G)


def _run_filter(fs, params, ys, gains, cfg):
    model = cfg.model
    if fs.type == "kf":
        return run_ss_kf(ys, gains) if fs.steady else run_kf(ys, model, gains.P)
    if fs.type == "iskf":
        return run_ss_iskf(ys, gains, params) if fs.steady else run_iskf(ys, model, params, gains.P)
    return run_huberized(ys, gains, params, tol=cfg.huber_tol)


def run_experiment(cfg):
    """Execute the pipeline described by ``cfg`` (a dict or an ExperimentConfig)."""
    if isinstance(cfg, dict):
        cfg = parse_config(cfg)
    model = cfg.model
    report = Report()
    gains = solve_steady(model, tol=RICCATI_TOL)

    test = _load_or_simulate(cfg, cfg.trajectory_file, cfg.T, cfg.seed_test, cfg.outliers)
    report.trajectories["trajectory_test"] = test
    needs_tune = any(f.tune for f in cfg.filters) or (cfg.sweep_k and cfg.sweep_scoring == "meas")
    tune = None
    if needs_tune:
        tune = _load_or_simulate(cfg, cfg.tune_trajectory_file, cfg.T_tune, cfg.seed_tune, cfg.outliers)
        report.trajectories["trajectory_tune"] = tune
    clean = None
    if cfg.outlier_free_eval and cfg.trajectory_file is None:
        clean = simulate(model, cfg.outliers.without_outliers(), cfg.T, cfg.seed_test,
                         x0=cfg.x0, F=cfg.truth_F, G=cfg.truth_G)

    truth = test.states[1:]
    selected = {}
    rows = []
    kf_rmse = None
    for fs in cfg.filters:
        params = fs.params()
        tune_score = None
        if fs.tune and fs.type != "kf":
            if fs.type == "huber":
                runner = HuberizedRunner(gains, tol=cfg.huber_tune_tol)
            else:
                runner = SteadyIskfRunner(gains, fs.k_tilde)
            result = grid_search(runner, cfg.grid(fs.k_tilde, fs.tune_eta), tune, model, scoring=cfg.scoring)
            params = fs.params(result.best_params.lambda_x, result.best_params.lambda_y, result.best_params.eta)
            tune_score = result.best_score
            report.tables[f"grid_{fs.name}"] = (["lambda_x", "lambda_y", "eta", "score"], _grid_rows(result))
        est = _run_filter(fs, params, test.measurements, gains, cfg)
        rmse = state_rmse(truth, est[1:])
        if fs.type == "kf" and kf_rmse is None:
            kf_rmse = rmse
        clean_rmse = None
        if clean is not None:
            clean_rmse = state_rmse(clean.states[1:], _run_filter(fs, params, clean.measurements, gains, cfg)[1:])
        err = est[1:] - truth
        n = model.n
        report.tables[f"estimates_{fs.name}"] = (
            ["t"] + [f"xhat{i}" for i in range(n)] + [f"err{i}" for i in range(n)],
            [[t + 1, *est[t + 1], *err[t]] for t in range(test.T)],
        )
        report.results[fs.name] = rmse
        is_kf = fs.type == "kf"
        iterative = fs.type == "iskf"
        selected[fs.name] = None if is_kf else params.to_dict()
        rows.append([
            fs.name, fs.type,
            params.k_tilde if iterative else None,
            None if is_kf else params.lambda_x,
            None if is_kf else params.lambda_y,
            params.eta if iterative else None,
            rmse, None, clean_rmse, tune_score,
        ])
    for row in rows:
        if kf_rmse is not None and row[1] != "kf":
            row[7] = 100.0 * (1.0 - row[6] / kf_rmse)
    report.tables["results"] = (RESULT_COLUMNS, rows)

    if cfg.sweep_k:
        sweep_rows = []
        for k in cfg.sweep_k:
            runner = SteadyIskfRunner(gains, k)
            if cfg.sweep_scoring == "state":
                res = grid_search(runner, cfg.grid(k), test, model, scoring="state")
                rmse = res.best_score
            else:
                res = grid_search(runner, cfg.grid(k), tune, model, scoring="meas")
                rmse = state_rmse(truth, run_ss_iskf(test.measurements, gains, res.best_params)[1:])
            report.tables[f"sweep_grid_k{k}"] = (["lambda_x", "lambda_y", "eta", "score"], _grid_rows(res))
            sweep_rows.append([k, res.best_params.lambda_x, res.best_params.lambda_y, rmse, cfg.sweep_scoring])
        report.tables["sweep"] = (["k_tilde", "lambda_x", "lambda_y", "rmse", "scoring"], sweep_rows)

    report.documents["gains"] = {
        "model": model.to_dict(),
        "outliers": cfg.outliers.to_dict(),
        "dare_residual": dare_residual(gains, model),
        **gains.to_dict(),
    }
    report.documents["manifest"] = {
        "manifest_version": 1,
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "generator": "numpy.random.default_rng (PCG64)",
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": cfg.raw,
        "seeds": {"tune": cfg.seed_tune, "test": cfg.seed_test},
        "tolerances": {
            "riccati": RICCATI_TOL,
            "huber": cfg.huber_tol,
            "huber_tune": cfg.huber_tune_tol,
        },
        "scoring": cfg.scoring,
        "selected_params": selected,
    }
    return report


def write_report(report, out_dir, fmt="csv"):
    """Write every table, trajectory and document; returns the list of paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, traj in report.trajectories.items():
        paths.append(write_trajectory(out / name, traj, fmt))
    for name, (cols, rows) in report.tables.items():
        paths.append(write_table(out / name, cols, rows, fmt))
    docs = dict(report.documents)
    manifest = docs.pop("manifest", None)
    for name, doc in docs.items():
        paths.append(write_json(out / f"{name}.json", doc))
    if manifest is not None:
        manifest = {**manifest, "files": sorted(p.name for p in paths)}
        paths.append(write_json(out / "manifest.json", manifest))
    return paths


def _random_system(n, p, rng):
    A = rng.standard_normal((n, n))
    A *= 0.95 / max(abs(np.linalg.eigvals(A)))
    C = rng.standard_normal((p, n))
    return build_model(A, C, np.eye(n), np.eye(p))


def bench(sizes=(10, 50, 100), p=10, k_tilde=2, steps=10_000, seed=0):
    """Median per-step wall time of the time-varying and steady-state ISKF.

    Returns rows ``[n, p, k_tilde, steps, full_us, steady_us, ratio]``.
    """
    rng = np.random.default_rng(seed)
    params = IskfParams(1.0, 2.0, k_tilde)
    rows = []
    for n in sizes:
        q = min(p, n)
        model = _random_system(n, q, rng)
        gains = solve_steady(model)
        ys = rng.standard_normal((steps, q)) * 3.0
        state = initial_state(gains)
        full = np.empty(steps)
        for t in range(steps):
            t0 = time.perf_counter()
            state = iskf_step(state, ys[t], model, params)
            full[t] = time.perf_counter() - t0
        x = np.zeros(n)
        ss = np.empty(steps)
        for t in range(steps):
            t0 = time.perf_counter()
            x = ss_iskf_step(x, ys[t], gains, params)
            ss[t] = time.perf_counter() - t0
        f_med, s_med = np.median(full) * 1e6, np.median(ss) * 1e6
        rows.append([n, q, k_tilde, steps, f_med, s_med, f_med / s_med])
    return rows
