"""Command-line interface: dataset generation, grid runs and metric computation."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import make_blobs, save_features
from .figures import render_report_figures
from .harness import (ConfigError, ExperimentConfig, report_csv, report_json,
                      run_grid)
from .metrics import compute_filter_metrics


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_gen_blobs(args) -> int:
    try:
        ds = make_blobs(args.k, args.n_per_class, args.dim, args.separation,
                        args.spread, args.seed)
        save_features(ds, args.out)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(f"wrote {ds.n_samples} samples ({ds.num_classes} classes, "
          f"{ds.n_features} features) to {args.out}")
    return 0


def cmd_run(args) -> int:
    config_path = Path(args.config)
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        return _fail(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        return _fail(f"config is not valid JSON: {exc}")
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except ConfigError as exc:
        return _fail(f"invalid config: {exc}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        report = run_grid(cfg, workers=args.workers, dump_joint=args.dump_joint)
    except ConfigError as exc:
        return _fail(f"invalid config: {exc}")

    report_csv(report, out_dir / "report.csv")
    report_json(report, out_dir / "report.json")
    figures = render_report_figures(report, out_dir / "figures")

    if args.dump_joint:
        joint_dir = out_dir / "joints"
        joint_dir.mkdir(exist_ok=True)
        for row in report.rows:
            if row.joint is not None:
                name = f"{row.noise_type}_{row.noise_level:g}_{row.seed}.json"
                with open(joint_dir / name, "w") as fh:
                    json.dump(row.joint, fh, indent=2)

    failures = [r for r in report.rows if r.error is not None]
    print(f"wrote {out_dir / 'report.csv'} ({len(report.rows)} rows, "
          f"{len(report.aggregates)} aggregates, {len(figures)} figures)")
    if failures:
        for row in failures:
            print(f"cell failed: {row.noise_type}/{row.noise_level:g}/"
                  f"{row.method}/seed={row.seed}: {row.error}", file=sys.stderr)
        return 2
    return 0


def _read_mask(path: Path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip().split(",")[0]
            if not text:
                continue
            if lineno == 1 and text not in ("0", "1"):
                continue  # tolerate a header line
            if text not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: expected 0 or 1, got {text!r}")
            values.append(int(text))
    if not values:
        raise ValueError(f"{path}: no mask entries found")
    return np.array(values, dtype=bool)


def cmd_metrics(args) -> int:
    try:
        flagged = _read_mask(Path(args.flags))
        truth = _read_mask(Path(args.truth))
        if flagged.size != truth.size:
            raise ValueError(f"mask lengths differ: {flagged.size} vs {truth.size}")
        metrics = compute_filter_metrics(flagged, truth)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(json.dumps({
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "remaining_noise": metrics.remaining_noise,
        "predicted_noise": metrics.predicted_noise_level,
        "true_noise": metrics.true_noise_level,
        "delta_noise": metrics.delta_noise,
        "smape": metrics.smape,
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisegate",
        description="Inject, detect and clean label noise in feature-vector datasets.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-blobs", help="generate a synthetic blob dataset CSV")
    gen.add_argument("--k", type=int, required=True, help="number of classes")
    gen.add_argument("--n-per-class", type=int, required=True)
    gen.add_argument("--dim", type=int, required=True)
    gen.add_argument("--separation", type=float, required=True)
    gen.add_argument("--spread", type=float, default=1.0)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen_blobs)

    run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--dump-joint", action="store_true",
                     help="write confident-joint matrices for cl cells")
    run.set_defaults(func=cmd_run)

    met = sub.add_parser("metrics", help="score a flag mask against a truth mask")
    met.add_argument("--flags", required=True, help="CSV with one 0/1 flag per line")
    met.add_argument("--truth", required=True, help="CSV with one 0/1 truth per line")
    met.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
