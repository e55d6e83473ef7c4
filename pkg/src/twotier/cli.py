"""Command-line pipeline driver.

Subcommands cover the full workflow: synth (make data), ingest (check
data), tune (grid search), train (fit and persist models), simulate
(replay one day with real-time correction), evaluate (score the test
split). Exit codes are stable for scripting: 0 success, 2 usage or
configuration problem, 3 I/O or unusable file, 4 not enough data,
5 unknown date.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date as Date
from pathlib import Path

from . import correction, evaluation, knn, nn, persistence, synth
from .config import _FIELD_TYPES, RunConfig, apply_overrides, parse_config, render_config
from .errors import (
    ConfigError,
    EmptyInput,
    GridMisalignment,
    IncompleteDay,
    InsufficientHistory,
    InsufficientTrainingDays,
    MalformedRow,
    NegativePower,
    PersistenceError,
    TooFewDays,
    TwoTierError,
    Underdetermined,
)
from .timeseries import day_context, export_csv, ingest_csv, split_chronological

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INSUFFICIENT = 4
EXIT_BAD_REFERENCE = 5

_DATA_ERRORS = (MalformedRow, GridMisalignment, IncompleteDay, NegativePower)
_SHORTAGE_ERRORS = (
    TooFewDays,
    InsufficientTrainingDays,
    InsufficientHistory,
    EmptyInput,
    Underdetermined,
)


class UnknownDate(TwoTierError):
    """Requested date is not present in the data set."""


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides")
    defaults = RunConfig()
    for key, kind in _FIELD_TYPES.items():
        flag = "--" + key.replace("_", "-")
        reader = Date.fromisoformat if kind is Date else kind
        group.add_argument(
            flag,
            dest=key,
            type=reader,
            default=None,
            metavar=kind.__name__.upper(),
            help=f"default {getattr(defaults, key)}",
        )


def _run_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config is not None:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"), config)
    overrides = {key: getattr(args, key) for key in _FIELD_TYPES}
    return apply_overrides(config, overrides)


def _read_series(path: str, grid):
    return ingest_csv(Path(path).read_text(encoding="utf-8"), grid)


def _split(config: RunConfig, series):
    return split_chronological(series, config.ratios())


def _load_model(models_dir: str, name: str, expected):
    path = Path(models_dir) / f"{name}{persistence.MODEL_SUFFIX}"
    model = persistence.load_model(path.read_text(encoding="utf-8"))
    if not isinstance(model, expected):
        raise persistence.MalformedModelFile(
            f"{path} does not contain a {name} model"
        )
    return model


def cmd_synth(args: argparse.Namespace) -> int:
    config = _run_config(args)
    result = synth.generate(config.synth(), config.synth_days, grid=config.grid())
    sunny = sum(1 for label in result.labels if label == synth.SUNNY)
    cloudy = len(result.labels) - sunny
    summary = (
        f"generated {result.series.num_days} days "
        f"({sunny} sunny, {cloudy} cloudy), seed {config.seed}"
    )
    if args.out is None:
        export_csv(result.series, sys.stdout)
        print(summary, file=sys.stderr)
        return EXIT_OK
    out = Path(args.out)
    labels_path = out.with_suffix(".labels.csv")
    with open(out, "w", encoding="utf-8", newline="\n") as sink:
        export_csv(result.series, sink)
    with open(labels_path, "w", encoding="utf-8", newline="\n") as sink:
        synth.write_labels_csv(result, sink)
    print(summary)
    print(f"wrote {out} and {labels_path}")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _run_config(args)
    series = _read_series(args.data, config.grid())
    first = series.days[0].date
    last = series.days[-1].date
    print(
        f"{series.num_days} days from {first.isoformat()} to {last.isoformat()}, "
        f"{series.grid.samples_per_day} samples/day, "
        f"peak {series.max_power():.1f} W"
    )
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
            export_csv(series, sink)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_tune(args: argparse.Namespace) -> int:
    config = _run_config(args)
    if args.knn_only and args.nn_only:
        raise ConfigError("--knn-only and --nn-only exclude each other")
    series = _read_series(args.data, config.grid())
    split = _split(config, series)
    tuned = config
    grids = []
    if not args.nn_only:
        knn_result = evaluation.tune_knn(split)
        grids += [knn_result.depth_grid, knn_result.neighbors_grid]
        tuned = apply_overrides(
            tuned,
            {
                "knn_depth_days": knn_result.best_depth,
                "knn_neighbors": knn_result.best_neighbors,
            },
        )
    if not args.knn_only:
        nn_grid = evaluation.tune_nn(split, config=config.nn())
        grids.append(nn_grid)
        tuned = apply_overrides(tuned, {"nn_hidden_neurons": nn_grid.best})
    for grid in grids:
        print(evaluation.render_grid(grid))
        print()
    with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
        sink.write(render_config(tuned))
    print(f"wrote {args.out}")
    if args.report is not None:
        with open(args.report, "w", encoding="utf-8", newline="\n") as sink:
            for grid in grids:
                evaluation.write_grid_csv(grid, sink)
        print(f"wrote {args.report}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = _run_config(args)
    if args.knn_only and args.nn_only:
        raise ConfigError("--knn-only and --nn-only exclude each other")
    series = _read_series(args.data, config.grid())
    split = _split(config, series)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if not args.nn_only:
        model = knn.fit(split.train, config.knn())
        path = out_dir / f"knn{persistence.MODEL_SUFFIX}"
        with open(path, "w", encoding="utf-8", newline="\n") as sink:
            persistence.save_model(model, sink)
        written.append(path)
    if not args.knn_only:
        model = nn.fit_day_ahead(split.train, config.nn())
        path = out_dir / f"nn{persistence.MODEL_SUFFIX}"
        with open(path, "w", encoding="utf-8", newline="\n") as sink:
            persistence.save_model(model, sink)
        written.append(path)
    print(
        f"trained on {split.train.num_days} days; wrote "
        + ", ".join(str(p) for p in written)
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _run_config(args)
    window, harmonics = config.correction_params()
    series = _read_series(args.data, config.grid())
    knn_model = _load_model(args.models, "knn", knn.KnnModel)
    nn_model = _load_model(args.models, "nn", nn.NnModel)
    try:
        target = series.day_by_date(args.day)
    except KeyError:
        raise UnknownDate(
            f"{args.day.isoformat()} is not in {args.data}"
        ) from None
    index = target.day_index
    context = day_context(series, index, knn_model.config.depth_days)
    try:
        prev = series.day_by_index(index - 1)
        prev_prev = series.day_by_index(index - 2)
    except KeyError:
        raise InsufficientHistory(
            f"{args.day.isoformat()} lacks the two preceding days"
        ) from None
    forecasts = {
        "knn": knn.predict_day(knn_model, context),
        "nn": nn.predict_day(nn_model, prev, prev_prev),
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, global_day in forecasts.items():
        sim = correction.simulate_day(
            global_day, target.samples, window, harmonics
        )
        path = out_dir / f"trace-{label}-{args.day.isoformat()}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as sink:
            correction.write_trace_csv(sim, sink)
        global_rmse = evaluation.rmse(global_day, target.samples)
        corrected_rmse = evaluation.rmse(sim.corrected_series(), target.samples)
        gain = evaluation.improvement(global_rmse, corrected_rmse)
        shown = "n/a" if gain is None else f"{gain:.2f}%"
        print(
            f"{label}: global RMSE {global_rmse:.1f} W, "
            f"corrected RMSE {corrected_rmse:.1f} W, improvement {shown}"
        )
        print(f"wrote {path}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _run_config(args)
    window, harmonics = config.correction_params()
    series = _read_series(args.data, config.grid())
    split = _split(config, series)
    knn_model = _load_model(args.models, "knn", knn.KnnModel)
    nn_model = _load_model(args.models, "nn", nn.NnModel)
    report = evaluation.compare_methods(
        split.full_series(), split.test, knn_model, nn_model, window, harmonics
    )
    print(evaluation.render_report(report))
    with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
        evaluation.write_report_csv(report, sink)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twotier",
        description="Two-tier solar generation forecasting pipeline.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def subcommand(name, handler, help_text):
        sub = subparsers.add_parser(name, help=help_text)
        sub.set_defaults(handler=handler)
        sub.add_argument("--config", default=None, help="key = value config file")
        _add_config_flags(sub)
        return sub

    sub = subcommand("synth", cmd_synth, "generate a synthetic data set")
    sub.add_argument("--days", dest="synth_days", type=int, help="number of days")
    sub.add_argument("--out", default=None, help="CSV path (default: stdout)")

    sub = subcommand("ingest", cmd_ingest, "validate a data CSV and summarize it")
    sub.add_argument("--data", required=True, help="input CSV")
    sub.add_argument("--out", default=None, help="re-export normalized CSV here")

    sub = subcommand("tune", cmd_tune, "grid-search hyperparameters on the tune split")
    sub.add_argument("--data", required=True, help="input CSV")
    sub.add_argument("--out", default="tuned.cfg", help="tuned config file")
    sub.add_argument("--report", default=None, help="also write grids as CSV")
    sub.add_argument("--knn-only", action="store_true")
    sub.add_argument("--nn-only", action="store_true")

    sub = subcommand("train", cmd_train, "fit models on the train split and save them")
    sub.add_argument("--data", required=True, help="input CSV")
    sub.add_argument("--out", default="models", help="model directory")
    sub.add_argument("--knn-only", action="store_true")
    sub.add_argument("--nn-only", action="store_true")

    sub = subcommand("simulate", cmd_simulate, "replay one day with live correction")
    sub.add_argument("--models", required=True, help="model directory")
    sub.add_argument("--data", required=True, help="input CSV")
    sub.add_argument("--day", required=True, type=Date.fromisoformat, help="YYYY-MM-DD")
    sub.add_argument("--out", default=".", help="trace output directory")

    sub = subcommand("evaluate", cmd_evaluate, "score all methods on the test split")
    sub.add_argument("--models", required=True, help="model directory")
    sub.add_argument("--data", required=True, help="input CSV")
    sub.add_argument("--out", default="report.csv", help="report CSV path")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownDate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_REFERENCE
    except _SHORTAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (OSError, PersistenceError, *_DATA_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
