"""Render summary figures for an experiment report as PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

METHOD_COLORS = {"topofilter": "tab:blue", "aum": "tab:orange",
                 "cl": "tab:green", "none": "tab:gray"}


def _series(aggs, noise_type, method, name):
    """Sorted (levels, values) for one metric, skipping missing entries."""
    pts = [(a.noise_level, a.mean[name]) for a in aggs
           if a.noise_type == noise_type and a.method == method
           and a.mean.get(name) is not None]
    pts.sort()
    return [p[0] for p in pts], [p[1] for p in pts]


def _detector_methods(aggs):
    return [m for m in ("topofilter", "aum", "cl")
            if any(a.method == m for a in aggs)]


def _detection_figure(aggs, noise_types, path):
    methods = _detector_methods(aggs)
    if not methods:
        return None
    names = ["precision", "recall", "f1"]
    fig, axes = plt.subplots(len(noise_types), len(names),
                             figsize=(3.6 * len(names), 2.8 * len(noise_types)),
                             squeeze=False, sharex=True, sharey=True)
    for r, nt in enumerate(noise_types):
        for c, name in enumerate(names):
            ax = axes[r][c]
            for m in methods:
                levels, vals = _series(aggs, nt, m, name)
                if levels:
                    ax.plot(levels, vals, marker="o", color=METHOD_COLORS[m], label=m)
            ax.set_ylim(-0.05, 1.05)
            ax.set_title(f"{nt}: {name}", fontsize=10)
            ax.grid(alpha=0.3)
            if r == len(noise_types) - 1:
                ax.set_xlabel("injected noise level")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _remaining_noise_figure(aggs, noise_types, path):
    methods = _detector_methods(aggs)
    if not methods:
        return None
    fig, axes = plt.subplots(1, len(noise_types),
                             figsize=(3.8 * len(noise_types), 3.0),
                             squeeze=False, sharey=True)
    for c, nt in enumerate(noise_types):
        ax = axes[0][c]
        drawn = False
        for m in methods:
            levels, vals = _series(aggs, nt, m, "remaining_noise")
            if levels:
                ax.plot(levels, vals, marker="o", color=METHOD_COLORS[m], label=m)
                drawn = True
        if drawn:
            lims = sorted({a.noise_level for a in aggs if a.noise_type == nt})
            ax.plot(lims, lims, "k--", linewidth=1, label="injected level")
        ax.set_title(nt, fontsize=10)
        ax.set_xlabel("injected noise level")
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel("remaining noise after cleaning")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _noise_estimation_figure(aggs, noise_types, path):
    methods = _detector_methods(aggs)
    if not methods:
        return None
    fig, axes = plt.subplots(1, len(noise_types),
                             figsize=(3.8 * len(noise_types), 3.0),
                             squeeze=False, sharey=True)
    for c, nt in enumerate(noise_types):
        ax = axes[0][c]
        drawn = False
        for m in methods:
            levels, vals = _series(aggs, nt, m, "predicted_noise")
            if levels:
                ax.plot(levels, vals, marker="o", color=METHOD_COLORS[m], label=m)
                drawn = True
        if drawn:
            lims = sorted({a.noise_level for a in aggs if a.noise_type == nt})
            ax.plot(lims, lims, "k--", linewidth=1, label="true level")
        ax.set_title(nt, fontsize=10)
        ax.set_xlabel("injected noise level")
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel("predicted noise level")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _task_accuracy_figure(aggs, noise_types, path):
    methods = _detector_methods(aggs)
    has_baseline = any(a.method == "none" and a.mean.get("acc_noisy") is not None
                       for a in aggs)
    if not methods and not has_baseline:
        return None
    fig, axes = plt.subplots(1, len(noise_types),
                             figsize=(3.8 * len(noise_types), 3.0),
                             squeeze=False, sharey=True)
    for c, nt in enumerate(noise_types):
        ax = axes[0][c]
        for m in methods:
            levels, vals = _series(aggs, nt, m, "acc_cleaned")
            if levels:
                ax.plot(levels, vals, marker="o", color=METHOD_COLORS[m],
                        label=f"{m} (cleaned)")
        levels, vals = _series(aggs, nt, "none", "acc_noisy")
        if levels:
            ax.plot(levels, vals, marker="s", color="black", linestyle="--",
                    label="noisy baseline")
        levels, vals = _series(aggs, nt, "none", "acc_clean_ref")
        if levels:
            ax.plot(levels, vals, color="gray", linestyle=":", label="clean reference")
        ax.set_title(nt, fontsize=10)
        ax.set_xlabel("injected noise level")
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel("clean test accuracy")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(report, out_dir) -> list[Path]:
    """Write the standard figure set next to the delimited report; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    aggs = report.aggregates
    noise_types = sorted({a.noise_type for a in aggs})
    if not noise_types:
        return []
    jobs = [
        (_detection_figure, out_dir / "detection_metrics.png"),
        (_remaining_noise_figure, out_dir / "remaining_noise.png"),
        (_noise_estimation_figure, out_dir / "noise_level_estimation.png"),
        (_task_accuracy_figure, out_dir / "task_accuracy.png"),
    ]
    written = []
    for fn, path in jobs:
        if fn(aggs, noise_types, path) is not None:
            written.append(path)
    return written
