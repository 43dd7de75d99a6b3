"""Command-line pipeline: simulate, train, evaluate, resolution, baseline.

Every command reads an optional JSON config (see :mod:`ltesense.config`),
applies its own flag overrides, writes its outputs into one directory,
and drops a ``<command>_manifest.json`` there echoing the configuration
so a run can be audited and reproduced.  Manifests carry no timestamps;
rerunning a command with the same inputs yields byte-identical files.

Exit codes: 0 success, 2 usage, 3 data error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy
import scipy

from . import __version__
from .baseline import (
    DEFAULT_BANDWIDTHS_HZ,
    range_resolution_sweep,
    save_resolution_sweep,
    save_timing_table,
    timing_precision_table,
)
from .campaign import load_dataset, run_campaign, save_dataset, split_train_test
from .config import RunConfig, config_to_dict, load_config, save_config
from .detector import load_model, save_model, train_cascade
from .metrics import (
    METHOD_CR,
    METHOD_NP,
    crlb_resolution,
    load_metric_table,
    load_score_table,
    np_resolution_curve,
    save_metric_table,
    save_resolution_table,
    save_score_table,
    score_predictions,
)
from .reference import reference_far_curves, reference_score_cells

METRICS_FILENAME = "metrics.csv"
SCORES_FILENAME = "scores.csv"


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected a non-empty number list")
    return values


def _base_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "out", None) is not None:
        config = replace(config, out_dir=args.out)
    return config


def _ensure_out_dir(config: RunConfig) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    return config.out_dir


def _write_manifest(out_dir: str, command: str, payload: dict) -> str:
    payload = dict(payload)
    payload["command"] = command
    payload["versions"] = {
        "ltesense": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }
    path = os.path.join(out_dir, f"{command}_manifest.json")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _base_config(args)
    scenario = config.scenario
    if args.seed is not None:
        scenario = replace(scenario, master_seed=args.seed)
    if args.readings is not None:
        scenario = replace(scenario, readings_per_recording=args.readings)
    if args.distances is not None:
        scenario = replace(scenario, distances_d=args.distances)
    if args.fractions is not None:
        scenario = replace(scenario, fractions_x=args.fractions)
    if args.snr is not None:
        scenario = replace(scenario, snr_db=args.snr)
    config = replace(config, scenario=scenario)
    if args.workers is not None:
        config = replace(config, workers=args.workers)

    dataset = run_campaign(
        config.scenario,
        grid_config=config.grid,
        feature_length=config.feature_length,
        workers=config.workers,
    )
    out_dir = _ensure_out_dir(config)
    dataset_path = os.path.join(out_dir, "dataset.csv")
    save_dataset(dataset, dataset_path)
    save_config(os.path.join(out_dir, "config.json"), config)
    _write_manifest(
        out_dir,
        "simulate",
        {
            "config": config_to_dict(config),
            "outputs": {"dataset": "dataset.csv", "config_echo": "config.json"},
            "records": len(dataset.records),
        },
    )
    print(f"wrote {dataset_path} ({len(dataset.records)} records)")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _base_config(args)
    detector = config.detector
    if args.seed is not None:
        detector = replace(detector, seed=args.seed)
    if args.margin_param is not None:
        detector = replace(detector, margin_param=args.margin_param)
    if args.epochs is not None:
        detector = replace(detector, epochs=args.epochs)
    config = replace(config, detector=detector)
    if args.train_fraction is not None:
        config = replace(config, train_fraction=args.train_fraction)
    if args.split_seed is not None:
        config = replace(config, split_seed=args.split_seed)

    dataset = load_dataset(args.dataset)
    train_set, _ = split_train_test(dataset, config.train_fraction, config.split_seed)
    model = train_cascade(train_set, config.detector)
    out_dir = _ensure_out_dir(config)
    model_path = os.path.join(out_dir, "model.csv")
    save_model(model, model_path)
    _write_manifest(
        out_dir,
        "train",
        {
            "config": config_to_dict(config),
            "inputs": {"dataset": args.dataset},
            "outputs": {"model": "model.csv"},
            "records": len(dataset.records),
            "train_records": len(train_set.records),
        },
    )
    print(f"wrote {model_path} (trained on {len(train_set.records)} records)")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _base_config(args)
    if args.train_fraction is not None:
        config = replace(config, train_fraction=args.train_fraction)
    if args.split_seed is not None:
        config = replace(config, split_seed=args.split_seed)

    dataset = load_dataset(args.dataset)
    model = load_model(args.model)
    _, test_set = split_train_test(dataset, config.train_fraction, config.split_seed)
    report = score_predictions(model, test_set)
    out_dir = _ensure_out_dir(config)
    metrics_path = os.path.join(out_dir, METRICS_FILENAME)
    scores_path = os.path.join(out_dir, SCORES_FILENAME)
    save_metric_table(metrics_path, report.curves)
    save_score_table(scores_path, report.score_cells)
    overall = report.overall
    _write_manifest(
        out_dir,
        "evaluate",
        {
            "config": config_to_dict(config),
            "inputs": {"dataset": args.dataset, "model": args.model},
            "outputs": {"metrics": METRICS_FILENAME, "scores": SCORES_FILENAME},
            "test_records": len(test_set.records),
            "overall": {
                "accuracy": overall.correct / overall.total,
                "n_false_accept": overall.n_false_accept,
                "n_false_reject": overall.n_false_reject,
                "n_impostor": overall.n_impostor,
                "n_legit": overall.n_legit,
            },
            "warnings": report.warnings,
        },
    )
    print(f"wrote {metrics_path} and {scores_path}")
    for warning in report.warnings:
        print(f"warning: {warning}")
    return 0


def _resolution_inputs(args: argparse.Namespace) -> tuple[str | None, str | None]:
    """Resolve (metrics path, scores path) from the positional input."""
    need_metrics = args.method in (METHOD_NP, "both")
    need_scores = args.method in (METHOD_CR, "both")
    if args.fixture:
        if args.input is not None:
            raise ValueError("--fixture replaces the input path; give one or the other")
        return None, None
    if args.input is None:
        raise ValueError("an input path is required unless --fixture is given")
    if os.path.isdir(args.input):
        metrics = os.path.join(args.input, METRICS_FILENAME)
        scores = os.path.join(args.input, SCORES_FILENAME)
    else:
        metrics = args.input if need_metrics else None
        scores = args.input if need_scores else None
        if need_metrics and need_scores:
            raise ValueError("method=both needs a directory holding both tables")
    return (metrics if need_metrics else None, scores if need_scores else None)


def cmd_resolution(args: argparse.Namespace) -> int:
    config = _base_config(args)
    epsilon = args.epsilon if args.epsilon is not None else config.epsilon
    metrics_path, scores_path = _resolution_inputs(args)

    curves = []
    if args.method in (METHOD_NP, "both"):
        if args.fixture:
            far_curves = reference_far_curves()
        else:
            loaded = load_metric_table(metrics_path)
            far_curves = {d: c["far"] for d, c in loaded.items() if "far" in c}
            if not far_curves:
                raise ValueError(f"{metrics_path}: no usable FAR columns")
        curves.append(np_resolution_curve(far_curves, epsilon))
    if args.method in (METHOD_CR, "both"):
        cells = reference_score_cells() if args.fixture else load_score_table(scores_path)
        stripped = {
            d: tuple((theta, samples) for _, theta, samples in triples)
            for d, triples in cells.items()
        }
        curves.append(crlb_resolution(stripped))

    out_dir = _ensure_out_dir(config)
    table_path = os.path.join(out_dir, "resolution.csv")
    save_resolution_table(table_path, curves)
    _write_manifest(
        out_dir,
        "resolution",
        {
            "config": config_to_dict(config),
            "inputs": {
                "metrics": metrics_path,
                "scores": scores_path,
                "fixture": args.fixture,
            },
            "outputs": {"resolution": "resolution.csv"},
            "method": args.method,
            "epsilon": epsilon,
            "kde_cells": [
                list(cell) for curve in curves for cell in curve.kde_cells
            ],
        },
    )
    print(f"wrote {table_path}")
    for curve in curves:
        for distance_d, resolution in curve.entries:
            print(f"{curve.method} D={distance_d:g}: {resolution:.4f} m")
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    config = _base_config(args)
    bandwidths = (
        tuple(b * 1e6 for b in args.bandwidths)
        if args.bandwidths is not None
        else DEFAULT_BANDWIDTHS_HZ
    )
    sweep = range_resolution_sweep(bandwidths_hz=bandwidths)
    timing = timing_precision_table()
    out_dir = _ensure_out_dir(config)
    sweep_path = os.path.join(out_dir, "range_resolution.csv")
    timing_path = os.path.join(out_dir, "timing_precision.csv")
    save_resolution_sweep(sweep_path, sweep)
    save_timing_table(timing_path, timing)
    _write_manifest(
        out_dir,
        "baseline",
        {
            "config": config_to_dict(config),
            "outputs": {
                "range_resolution": "range_resolution.csv",
                "timing_precision": "timing_precision.csv",
            },
            "bandwidths_hz": list(bandwidths),
        },
    )
    print(f"wrote {sweep_path} and {timing_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltesense",
        description="Passive-sensing simulation pipeline and its figure-of-merit tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory (default from config)")

    p = sub.add_parser("simulate", help="run the measurement campaign and write the dataset")
    common(p)
    p.add_argument("--seed", type=int, help="campaign master seed")
    p.add_argument("--readings", type=int, help="readings per recording")
    p.add_argument("--distances", type=_float_list, help="comma-separated distances in meters")
    p.add_argument("--fractions", type=_float_list, help="comma-separated circumference fractions")
    p.add_argument("--snr", type=float, help="per-reading SNR in dB")
    p.add_argument("--workers", type=int, help="parallel recording workers")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train the two-stage detector on the train split")
    common(p)
    p.add_argument("--dataset", required=True, help="dataset CSV from simulate")
    p.add_argument("--seed", type=int, help="training shuffle seed")
    p.add_argument("--margin-param", type=float, help="hinge regularization strength")
    p.add_argument("--epochs", type=int, help="training epochs")
    p.add_argument("--train-fraction", type=float, help="train split fraction")
    p.add_argument("--split-seed", type=int, help="split shuffle seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score the held-out split and write metric tables")
    common(p)
    p.add_argument("--dataset", required=True, help="dataset CSV from simulate")
    p.add_argument("--model", required=True, help="model file from train")
    p.add_argument("--train-fraction", type=float, help="train split fraction")
    p.add_argument("--split-seed", type=int, help="split shuffle seed")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("resolution", help="derive resolutions from metric or score tables")
    common(p)
    p.add_argument(
        "input",
        nargs="?",
        help="metrics table (np), scores table (cr), or directory with both",
    )
    p.add_argument("--method", choices=[METHOD_NP, METHOD_CR, "both"], default="both")
    p.add_argument("--epsilon", type=float, help="FAR-change tolerance for method np")
    p.add_argument(
        "--fixture",
        action="store_true",
        help="use the shipped reference tables instead of an input path",
    )
    p.set_defaults(func=cmd_resolution)

    p = sub.add_parser("baseline", help="emit the conventional-radar comparison tables")
    common(p)
    p.add_argument("--bandwidths", type=_float_list, help="comma-separated bandwidths in MHz")
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
