"""Command-line driver.

Subcommands::

    iskf simulate  --model vehicle --T 1000 --seed 0 --out DIR
    iskf tune      --model vehicle --k-tilde 2 --seed 0 --out DIR
    iskf run       --config CONFIG.json --out DIR
    iskf reproduce vehicle --seed-tune 0 --seed-test 42 --out DIR
    iskf bench     --out DIR

Exit status is 0 on success, 2 for invalid configuration or arguments and 3
for numerical failures.
"""

import argparse
import sys
from pathlib import Path

from .batch import HuberizedRunner, SteadyIskfRunner
from .config import BUILTIN_MODELS, load_config, parse_config
from .errors import ConfigError, IskfError, NumericalError
from .experiments import bench, reproduce_config, run_experiment, write_report
from .io import write_json, write_table, write_trajectory
from .riccati import solve_steady
from .sim import simulate
from .tune import grid_search

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(p, seed=True):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=["csv", "structured"], default="csv",
                   help="table format (default: csv)")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def _add_model_source(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--model", choices=sorted(BUILTIN_MODELS), default="vehicle")
    g.add_argument("--config", help="experiment config (JSON) supplying the model")


def _config_for(args):
    if args.config:
        return load_config(args.config)
    return parse_config({"model": args.model})


def _mkdir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    cfg = _config_for(args)
    spec = cfg.outliers.without_outliers() if args.no_outliers else cfg.outliers
    traj = simulate(cfg.model, spec, args.T, args.seed, x0=cfg.x0, F=cfg.truth_F, G=cfg.truth_G)
    path = write_trajectory(_mkdir(args.out) / "trajectory", traj, args.format)
    print(path)


def cmd_tune(args):
    cfg = _config_for(args)
    gains = solve_steady(cfg.model)
    traj = simulate(cfg.model, cfg.outliers, args.T, args.seed, x0=cfg.x0, F=cfg.truth_F, G=cfg.truth_G)
    if args.huber:
        runner = HuberizedRunner(gains, tol=cfg.huber_tune_tol)
    else:
        runner = SteadyIskfRunner(gains, args.k_tilde)
    grid = cfg.grid(args.k_tilde, args.tune_eta)
    result = grid_search(runner, grid, traj, cfg.model, scoring=args.scoring)
    out = _mkdir(args.out)
    rows = [[a, b, c, s] for a, b, c, s in zip(result.lambda_x, result.lambda_y, result.eta, result.scores)]
    write_table(out / f"grid_{runner.label}", ["lambda_x", "lambda_y", "eta", "score"], rows, args.format)
    best = {**result.best_params.to_dict(), "score": result.best_score, "scoring": result.scoring,
            "seed": args.seed, "T": args.T}
    write_json(out / "best.json", best)
    print(f"best {result.best_params} score={result.best_score:.6g}")


def _print_results(report):
    for row in report.table_dicts("results"):
        imp = row["improvement_pct"]
        imp = "-" if imp is None else f"{imp:.1f}%"
        print(f"{row['method']:<14} rmse={row['rmse']:.4f}  improvement={imp}")


def cmd_run(args):
    cfg = load_config(args.config)
    report = run_experiment(cfg)
    write_report(report, args.out, args.format)
    _print_results(report)


def cmd_reproduce(args):
    raw = reproduce_config(
        args.example, args.seed_tune, args.seed_test, T=args.T,
        tune_eta=not args.no_eta, sweep=() if args.no_sweep else (1, 2, 3, 4, 5),
    )
    report = run_experiment(parse_config(raw))
    write_report(report, args.out, args.format)
    _print_results(report)


def cmd_bench(args):
    rows = bench(tuple(args.sizes), args.p, args.k_tilde, args.steps, args.seed)
    cols = ["n", "p", "k_tilde", "steps", "full_us", "steady_us", "ratio"]
    write_table(_mkdir(args.out) / "bench", cols, rows, args.format)
    for r in rows:
        print(f"n={r[0]:<4} full={r[4]:9.1f}us steady={r[5]:8.1f}us ratio={r[6]:.1f}")


def build_parser():
    parser = argparse.ArgumentParser(prog="iskf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a trajectory")
    _add_model_source(p)
    _add_common(p)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--no-outliers", action="store_true", help="force unit outlier scales")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune", help="grid-search ISKF thresholds on a simulated trajectory")
    _add_model_source(p)
    _add_common(p)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--k-tilde", type=int, default=2)
    p.add_argument("--tune-eta", action="store_true", help="also search the step size")
    p.add_argument("--huber", action="store_true", help="tune the converged reference instead")
    p.add_argument("--scoring", choices=["meas", "state"], default="meas")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="benchmark comparison on a builtin system")
    p.add_argument("example", choices=sorted(BUILTIN_MODELS))
    p.add_argument("--seed-tune", type=int, default=0)
    p.add_argument("--seed-test", type=int, default=42)
    p.add_argument("--T", type=int, default=1000)
    p.add_argument("--no-eta", action="store_true", help="skip the joint step-size search")
    p.add_argument("--no-sweep", action="store_true", help="skip the iteration-count sweep")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("bench", help="time full vs steady-state ISKF steps")
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 50, 100])
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--k-tilde", type=int, default=2)
    p.add_argument("--steps", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except IskfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
