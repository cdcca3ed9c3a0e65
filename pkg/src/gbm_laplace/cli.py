"""Command-line interface.

Subcommands: simulate (dataset generation), verify (statistical checks of
the closed forms and the inversion self-test), train, evaluate, and
experiment (the full multi-seed benchmark).

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 runtime or training error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import surrogate as sg
from .experiments import (
    VERIFY_SUITES,
    Dataset,
    ExperimentConfig,
    emit_report,
    evaluate_method,
    generate_dataset,
    load_dataset,
    run_experiment,
    save_dataset,
    split_dataset,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_CONFIG_FIELDS = {
    "n_trajectories": int,
    "n_samples": int,
    "t_max": float,
    "epochs": int,
    "test_fraction": float,
    "split_time": float,
    "grid_mode": str,
}
_RANGE_FIELDS = ("x0_range", "mu_range", "sigma_range")


def read_config_file(path) -> dict:
    """Flat key-value text: one `key = value` per line, # comments.

    Range fields take two comma- or space-separated numbers; seeds take a
    comma-separated list.
    """
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key in _CONFIG_FIELDS:
                values[key] = _CONFIG_FIELDS[key](val)
            elif key in _RANGE_FIELDS:
                parts = val.replace(",", " ").split()
                values[key] = (float(parts[0]), float(parts[1]))
            elif key == "seeds":
                values[key] = tuple(int(x) for x in val.replace(",", " ").split())
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-trajectories", type=int)
    parser.add_argument("--n-samples", type=int)
    parser.add_argument("--t-max", type=float)
    parser.add_argument("--x0-range", type=float, nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--mu-range", type=float, nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--sigma-range", type=float, nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--test-fraction", type=float)
    parser.add_argument("--split-time", type=float)
    parser.add_argument("--grid-mode", choices=["equispaced", "uniform-random"])


def _config_from_args(args, file_values: dict | None = None,
                      seeds: tuple[int, ...] | None = None) -> ExperimentConfig:
    values = dict(file_values or {})
    for key in list(_CONFIG_FIELDS) + list(_RANGE_FIELDS):
        arg = getattr(args, key, None)
        if arg is not None:
            values[key] = tuple(arg) if key in _RANGE_FIELDS else arg
    if seeds is not None:
        values["seeds"] = seeds
    return ExperimentConfig(**values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbm-laplace",
        description="GBM simulation, Laplace-domain verification, and forecasting benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a GBM trajectory dataset")
    _add_config_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="run a statistical verification suite")
    p.add_argument("suite", choices=sorted(VERIFY_SUITES))
    p.add_argument("--n-paths", type=int, default=None,
                   help="override the Monte Carlo path/draw count")
    p.add_argument("--tolerance-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write the JSON report to this path")

    p = sub.add_parser("train", help="train the surrogate on a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-time", type=float, default=0.5)
    p.add_argument("--model-out", required=True)

    p = sub.add_parser("evaluate", help="evaluate a method on a dataset file")
    p.add_argument("--model", help="saved surrogate model (surrogate method only)")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=["surrogate", "exp-fit", "constant-last"],
                   required=True)
    p.add_argument("--split-time", type=float, default=0.5)

    p = sub.add_parser("experiment", help="full multi-seed benchmark with report")
    _add_config_flags(p)
    p.add_argument("--config", help="flat key=value config file; flags override")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--out", required=True)
    return parser


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    ds = generate_dataset(config, args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} trajectories to {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    kwargs = {"tolerance_scale": args.tolerance_scale}
    if args.suite in ("mgf",) and args.n_paths:
        kwargs["n_draws"] = args.n_paths
    elif args.suite in ("laplace-mean", "variance-bound") and args.n_paths:
        kwargs["n_paths"] = args.n_paths
    elif args.suite == "moments" and args.n_paths:
        kwargs["n_mean_paths"] = args.n_paths
        kwargs["n_var_paths"] = args.n_paths
    if args.suite != "ilt-selftest":
        kwargs["seed"] = args.seed
    report = VERIFY_SUITES[args.suite](**kwargs)
    for case in report.cases:
        status = "PASS" if case.passed else "FAIL"
        print(f"[{status}] {case.name}: measured={case.measured:.6g} "
              f"expected={case.expected:.6g} tol={case.tolerance:.3g}")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _cmd_train(args) -> int:
    ds = load_dataset(args.data)
    config = sg.TrainConfig(epochs=args.epochs, seed=args.seed, split_time=args.split_time)
    model, report = sg.train(ds.records, config)
    sg.save_model(model, args.model_out)
    print(f"trained {config.epochs} epochs; "
          f"final training loss {report.train_losses[-1]:.6g}; "
          f"model saved to {args.model_out}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    ds = load_dataset(args.data)
    st = args.split_time
    if args.method == "surrogate":
        if not args.model:
            raise ValueError("--model is required for the surrogate method")
        model = sg.load_model(args.model)
        sq, count = 0.0, 0
        for rec in ds.records:
            traj = rec.trajectory
            post = traj.grid.times > st
            pred = sg.predict(model, traj, st, traj.grid.times[post])
            _, scale = sg.normalize_prefix(traj, st, model.input_grid_size)
            err = (pred - traj.values[post]) / scale
            sq += float(np.sum(err**2))
            count += err.size
        rmse = float(np.sqrt(sq / count))
    else:
        config = ExperimentConfig(split_time=st, n_samples=len(ds.records[0].trajectory.grid))
        empty = Dataset((), ds.header)
        rmse = evaluate_method(args.method, empty, ds, config, seed=0)
    print(f"{args.method} test RMSE (normalized units): {rmse:.6f}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    file_values = read_config_file(args.config) if args.config else {}
    seeds = tuple(args.seeds) if args.seeds else None
    config = _config_from_args(args, file_values, seeds)
    report = run_experiment(config)
    emit_report(report, args.out)
    for row in report.rows:
        if row.error is not None:
            print(f"{row.method}: ERROR {row.error}")
        else:
            print(f"{row.method}: mean={row.mean:.6f} std={row.std:.6f}")
    print(f"report written to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "verify": _cmd_verify,
        "train": _cmd_train,
        "evaluate": _cmd_evaluate,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except sg.TrainingDivergedError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
