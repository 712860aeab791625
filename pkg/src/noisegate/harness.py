"""Experiment orchestration: corrupt, detect, clean, retrain and evaluate over grids.

A grid is the cartesian product of noise types, noise levels, methods and
seeds over one dataset. Every cell derives all of its randomness from a
stable hash of its coordinates, so results are reproducible and independent
of worker count or execution order. Reports are written as CSV (fixed column
schema) and JSON (adds per-group standard deviations and error tags).
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .aum import AumConfig, run_aum
from .confident import run_cl_with_joint
from .dataset import TEST, TRAIN, Dataset, load_features, make_blobs, split
from .metrics import FilterMetrics, compute_filter_metrics
from .noise import asymmetric_matrix, corrupt, uniform_matrix
from .seeding import derive_seed
from .topofilter import TopoConfig, run_topofilter
from .trainer import TrainConfig, evaluate, train

NOISE_TYPES = ("uniform", "asym_low", "asym_high")
METHODS = ("topofilter", "aum", "cl", "none")
SPARSITY_BY_TYPE = {"asym_low": 0.25, "asym_high": 0.75}

CSV_COLUMNS = [
    "dataset", "noise_type", "noise_level", "method", "seed",
    "precision", "recall", "f1", "remaining_noise", "predicted_noise",
    "delta_noise", "smape", "acc_noisy", "acc_cleaned", "acc_clean_ref",
]
_METRIC_FIELDS = CSV_COLUMNS[5:]

_DEFAULT_BLOBS = {"k": 4, "n_per_class": 200, "dim": 16,
                  "separation": 10.0, "spread": 1.0, "seed": 0}
_TRAIN_CFG_KEYS = ("hidden_dim", "epochs", "learning_rate", "batch_size",
                   "weight_init_scale")
_TOPO_CFG_KEYS = ("k_neighbors", "zeta", "first_filter_epoch", "filter_interval")
_AUM_CFG_KEYS = ("threshold_percentile", "threshold_fraction", "two_run")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"blobs": dict(_DEFAULT_BLOBS)})
    noise_types: list[str] = field(default_factory=lambda: list(NOISE_TYPES))
    noise_levels: list[float] = field(default_factory=lambda: [0.10, 0.30, 0.50, 0.70])
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    split_fractions: tuple = (0.8, 0.1, 0.1)
    base_seed: int = 0
    asym_sigma: float = 0.05
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    topo_cfg: dict = field(default_factory=dict)
    aum_cfg: dict = field(default_factory=dict)
    cl_folds: int = 4

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        unknown_types = set(self.noise_types) - set(NOISE_TYPES)
        if unknown_types:
            raise ConfigError(f"unknown noise types: {sorted(unknown_types)}")
        unknown_methods = set(self.methods) - set(METHODS)
        if unknown_methods:
            raise ConfigError(f"unknown methods: {sorted(unknown_methods)}")
        for level in self.noise_levels:
            if not 0.0 <= float(level) < 1.0:
                raise ConfigError(f"noise level {level} outside [0, 1)")
        bad_topo = set(self.topo_cfg) - set(_TOPO_CFG_KEYS)
        if bad_topo:
            raise ConfigError(f"unknown topo_cfg keys: {sorted(bad_topo)}")
        bad_aum = set(self.aum_cfg) - set(_AUM_CFG_KEYS)
        if bad_aum:
            raise ConfigError(f"unknown aum_cfg keys: {sorted(bad_aum)}")
        if self.cl_folds < 2:
            raise ConfigError("cl_folds must be >= 2")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = {"dataset", "noise_types", "noise_levels", "methods", "seeds",
                   "split_fractions", "base_seed", "asym_sigma", "train_cfg",
                   "topo_cfg", "aum_cfg", "cl_folds"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "train_cfg" in kwargs:
            tc = kwargs["train_cfg"]
            bad = set(tc) - set(_TRAIN_CFG_KEYS)
            if bad:
                raise ConfigError(f"unsupported train_cfg keys: {sorted(bad)}")
            try:
                kwargs["train_cfg"] = TrainConfig(**tc)
            except ValueError as exc:
                raise ConfigError(f"invalid train_cfg: {exc}") from exc
        if "split_fractions" in kwargs:
            kwargs["split_fractions"] = tuple(kwargs["split_fractions"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class ReportRow:
    dataset: str
    noise_type: str
    noise_level: float
    method: str
    seed: int
    metrics: FilterMetrics | None = None
    acc_noisy: float | None = None
    acc_cleaned: float | None = None
    acc_clean_ref: float | None = None
    error: str | None = None
    joint: dict | None = None  # confident joint dump, populated on request only

    def values(self) -> dict:
        """Numeric report fields keyed by CSV column name (None where absent)."""
        m = self.metrics
        return {
            "precision": m.precision if m else None,
            "recall": m.recall if m else None,
            "f1": m.f1 if m else None,
            "remaining_noise": m.remaining_noise if m else None,
            "predicted_noise": m.predicted_noise_level if m else None,
            "delta_noise": m.delta_noise if m else None,
            "smape": m.smape if m else None,
            "acc_noisy": self.acc_noisy,
            "acc_cleaned": self.acc_cleaned,
            "acc_clean_ref": self.acc_clean_ref,
        }


@dataclass
class AggregateRow:
    dataset: str
    noise_type: str
    noise_level: float
    method: str
    n_seeds: int
    mean: dict[str, float | None]
    std: dict[str, float | None]


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    aggregates: list[AggregateRow]


def build_dataset(cfg: ExperimentConfig):
    """Materialize and split the configured dataset; returns (name, Dataset)."""
    spec = cfg.dataset
    if ("blobs" in spec) == ("path" in spec):
        raise ConfigError("dataset must specify exactly one of 'blobs' or 'path'")
    if "blobs" in spec:
        params = dict(_DEFAULT_BLOBS)
        unknown = set(spec["blobs"]) - set(params)
        if unknown:
            raise ConfigError(f"unknown blobs keys: {sorted(unknown)}")
        params.update(spec["blobs"])
        try:
            ds = make_blobs(params["k"], params["n_per_class"], params["dim"],
                            params["separation"], params["spread"], params["seed"])
        except ValueError as exc:
            raise ConfigError(f"invalid blobs spec: {exc}") from exc
        name = "blobs"
    else:
        path = Path(spec["path"])
        try:
            ds = load_features(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load dataset {path}: {exc}") from exc
        name = path.stem
    try:
        ds = split(ds, cfg.split_fractions, seed=derive_seed(cfg.base_seed, "split"))
    except ValueError as exc:
        raise ConfigError(f"invalid split: {exc}") from exc

    max_level = (ds.num_classes - 1) / ds.num_classes
    for level in cfg.noise_levels:
        if float(level) >= max_level:
            raise ConfigError(
                f"noise level {level} not below (K-1)/K = {max_level:.4g}")
    return name, ds


def run_cell(ds: Dataset, dataset_name: str, noise_type: str, level: float,
             method: str, seed: int, cfg: ExperimentConfig,
             dump_joint: bool = False) -> ReportRow:
    """One experiment cell: corrupt, baseline, detect, clean, retrain, evaluate.

    Any stage failure is recorded in the row's error tag instead of raising,
    so grid runs keep going.
    """
    row = ReportRow(dataset=dataset_name, noise_type=noise_type,
                    noise_level=float(level), method=method, seed=seed)
    try:
        _run_cell_stages(ds, row, cfg, dump_joint)
    except Exception as exc:  # per-cell isolation by design
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _run_cell_stages(ds: Dataset, row: ReportRow, cfg: ExperimentConfig,
                     dump_joint: bool) -> None:
    cell = derive_seed(cfg.base_seed, row.noise_type, row.noise_level,
                       row.method, row.seed)
    k = ds.num_classes
    if row.noise_type == "uniform":
        matrix = uniform_matrix(k, row.noise_level)
    else:
        matrix = asymmetric_matrix(k, row.noise_level,
                                   SPARSITY_BY_TYPE[row.noise_type],
                                   cfg.asym_sigma, seed=derive_seed(cell, "matrix"))
    noisy = corrupt(ds, matrix, seed=derive_seed(cell, "corrupt"))
    train_idx = noisy.indices(TRAIN)
    truly_noisy = noisy.observed_labels[train_idx] != noisy.true_labels[train_idx]

    base_cfg = replace(cfg.train_cfg, seed=derive_seed(cell, "train"),
                       record_logits=False, subset=None)
    baseline, _ = train(noisy, base_cfg, labels="observed")
    row.acc_noisy = evaluate(baseline, noisy, TEST)
    reference, _ = train(noisy, base_cfg, labels="true")
    row.acc_clean_ref = evaluate(reference, noisy, TEST)

    if row.method == "none":
        return

    detect_cfg = replace(cfg.train_cfg, seed=derive_seed(cell, "detect"),
                         record_logits=False, subset=None)
    cleaned_model = None
    if row.method == "topofilter":
        topo = TopoConfig(train_cfg=detect_cfg, **cfg.topo_cfg)
        result, cleaned_model = run_topofilter(noisy, topo)
    elif row.method == "aum":
        result = run_aum(noisy, AumConfig(train_cfg=detect_cfg, **cfg.aum_cfg))
    else:
        result, joint = run_cl_with_joint(noisy, detect_cfg, cfg.cl_folds)
        if dump_joint:
            row.joint = joint.to_dict()

    if cleaned_model is None:
        retrain_cfg = replace(cfg.train_cfg, seed=derive_seed(cell, "retrain"),
                              record_logits=False, subset=train_idx[~result.flagged])
        cleaned_model, _ = train(noisy, retrain_cfg, labels="observed")
    row.acc_cleaned = evaluate(cleaned_model, noisy, TEST)
    row.metrics = compute_filter_metrics(result.flagged, truly_noisy)


def _aggregate(rows: list[ReportRow]) -> list[AggregateRow]:
    groups: dict[tuple, list[ReportRow]] = {}
    for row in rows:
        groups.setdefault((row.dataset, row.noise_type, row.noise_level, row.method),
                          []).append(row)
    aggregates = []
    for (dataset, noise_type, level, method), members in groups.items():
        ok = [r for r in members if r.error is None]
        mean: dict[str, float | None] = {}
        std: dict[str, float | None] = {}
        for name in _METRIC_FIELDS:
            values = [r.values()[name] for r in ok if r.values()[name] is not None]
            if values:
                mean[name] = float(np.mean(values))
                std[name] = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            else:
                mean[name] = None
                std[name] = None
        aggregates.append(AggregateRow(dataset=dataset, noise_type=noise_type,
                                       noise_level=level, method=method,
                                       n_seeds=len(ok), mean=mean, std=std))
    return aggregates


def run_grid(cfg: ExperimentConfig, workers: int = 1,
             dump_joint: bool = False) -> ExperimentReport:
    """Run every (noise_type, level, method, seed) cell and aggregate across seeds.

    Cells are independent and may run on several worker threads; the report
    is identical regardless of worker count. Per-cell failures are kept as
    error rows, never aborting the grid.
    """
    name, ds = build_dataset(cfg)
    cells = [(nt, float(lv), m, s)
             for nt in cfg.noise_types
             for lv in cfg.noise_levels
             for m in cfg.methods
             for s in cfg.seeds]

    def job(cell):
        nt, lv, m, s = cell
        return run_cell(ds, name, nt, lv, m, s, cfg, dump_joint=dump_joint)

    if workers <= 1:
        rows = [job(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, cells))
    return ExperimentReport(rows=rows, aggregates=_aggregate(rows))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan"
    return f"{value:.10g}"


def report_csv(report: ExperimentReport, path) -> None:
    """Write the fixed-schema CSV: seed rows first, then per-group 'agg' mean rows."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            values = row.values()
            writer.writerow([row.dataset, row.noise_type, _fmt(row.noise_level),
                             row.method, row.seed]
                            + [_fmt(values[name]) for name in _METRIC_FIELDS])
        for agg in report.aggregates:
            writer.writerow([agg.dataset, agg.noise_type, _fmt(agg.noise_level),
                             agg.method, "agg"]
                            + [_fmt(agg.mean[name]) for name in _METRIC_FIELDS])


def report_json(report: ExperimentReport, path) -> None:
    """Write the full report, including per-group standard deviations and errors."""
    payload = {
        "rows": [
            {"dataset": r.dataset, "noise_type": r.noise_type,
             "noise_level": r.noise_level, "method": r.method, "seed": r.seed,
             **r.values(), "error": r.error}
            for r in report.rows
        ],
        "aggregates": [asdict(a) for a in report.aggregates],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
