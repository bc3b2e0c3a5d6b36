"""Figure builders: trajectory grids with confidence bands, raw noise
traces, and total-variance bar charts.

Every rendered series is also written to a JSON sidecar next to the image
(`<image>.sidecar.json`) so figures can be diffed numerically.
"""

from __future__ import annotations

import json
import sys
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .data import DataError, TrajectoryTable, mean_and_ci, read_summary_csv, read_trajectory_csv

VARIANT_COLORS = {"old": "tab:blue", "new": "tab:green"}
TARGET_COLOR = "tab:red"


@dataclass(frozen=True)
class PlotSpec:
    """Everything one figure needs.

    kind: "trajectory-grid" (per-variant mean with 95% CI bands),
    "noise-traces" (raw per-trial traces), or "variance-bars" (grouped
    total-variance bars from a summary CSV).
    """

    kind: str
    output_path: str
    trajectory_csvs: Dict[str, str] = field(default_factory=dict)  # variant -> path
    summary_csv: Optional[str] = None
    columns: Tuple[str, ...] = ()
    targets: Dict[str, float] = field(default_factory=dict)  # column -> target value

    def __post_init__(self):
        if self.kind not in ("trajectory-grid", "noise-traces", "variance-bars"):
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _sidecar_path(image_path: str) -> str:
    return image_path + ".sidecar.json"


def _write_sidecar(image_path: str, payload: Dict) -> str:
    path = _sidecar_path(image_path)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
    return path


def _grid_axes(n_panels: int):
    n_cols = 2
    n_rows = (n_panels + 1) // 2
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(9, 3.2 * n_rows), squeeze=False)
    return fig, [axes[i // n_cols][i % n_cols] for i in range(n_rows * n_cols)]


def _load_tables(spec: PlotSpec) -> Dict[str, TrajectoryTable]:
    if not spec.trajectory_csvs:
        raise DataError("this figure kind needs at least one trajectory CSV")
    tables = {v: read_trajectory_csv(p) for v, p in spec.trajectory_csvs.items()}
    for variant, table in tables.items():
        for col in spec.columns:
            if col not in table.columns:
                raise DataError(f"column '{col}' missing from {variant} trajectory CSV")
    return tables


def plot_trajectory_grid(spec: PlotSpec) -> str:
    """Panel grid of per-variant means with shaded 95% CI bands."""
    tables = _load_tables(spec)
    fig, axes = _grid_axes(len(spec.columns))
    sidecar: Dict = {"kind": spec.kind, "panels": {}}
    for ax, column in zip(axes, spec.columns):
        panel: Dict = {}
        for variant, table in tables.items():
            series = table.series(column)
            t = table.time_axis()
            mean, ci = mean_and_ci(series)
            color = VARIANT_COLORS.get(variant)
            ax.plot(t, mean, label=variant, color=color)
            if series.shape[0] >= 2:
                ax.fill_between(t, mean - ci, mean + ci, alpha=0.25, color=color, linewidth=0)
            else:
                warnings.warn(
                    f"{variant}/{column}: fewer than 2 trials, CI band omitted", stacklevel=2
                )
            panel[variant] = {"mean": mean.tolist(), "ci_halfwidth": ci.tolist()}
        if column in spec.targets:
            ax.axhline(spec.targets[column], color=TARGET_COLOR, linewidth=1.0)
            panel["target"] = spec.targets[column]
        ax.set_title(column)
        ax.set_xlabel("t [s]")
        ax.legend(fontsize=8)
        sidecar["panels"][column] = panel
    for ax in axes[len(spec.columns):]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=130)
    plt.close(fig)
    _write_sidecar(spec.output_path, sidecar)
    return spec.output_path


def plot_noise_traces(spec: PlotSpec) -> str:
    """Raw per-trial traces (one line per trial) for each requested column."""
    tables = _load_tables(spec)
    fig, axes = _grid_axes(len(spec.columns))
    sidecar: Dict = {"kind": spec.kind, "panels": {}}
    for ax, column in zip(axes, spec.columns):
        panel: Dict = {}
        for variant, table in tables.items():
            series = table.series(column)
            t = table.time_axis()
            color = VARIANT_COLORS.get(variant)
            for row in series:
                ax.plot(t, row, color=color, alpha=0.5, linewidth=0.8)
            panel[variant] = {"traces": series.tolist()}
        ax.set_title(column)
        ax.set_xlabel("t [s]")
        sidecar["panels"][column] = panel
    for ax in axes[len(spec.columns):]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=130)
    plt.close(fig)
    _write_sidecar(spec.output_path, sidecar)
    return spec.output_path


def plot_variance_bars(spec: PlotSpec) -> str:
    """Grouped total-variance bars over (sigma_j, samples_m) cells, colored
    by variant; heights are the summary CSV values untouched."""
    if spec.summary_csv is None:
        raise DataError("variance-bars needs a summary CSV")
    rows = read_summary_csv(spec.summary_csv)
    if not rows:
        raise DataError("summary CSV has no rows")
    variants = sorted({r["variant"] for r in rows})
    groups = sorted({(r["sigma_j"], r["samples_m"]) for r in rows})
    heights: Dict[str, List[float]] = {v: [] for v in variants}
    for group in groups:
        for variant in variants:
            match = [
                r["total_variance"]
                for r in rows
                if (r["sigma_j"], r["samples_m"]) == group and r["variant"] == variant
            ]
            if len(match) != 1:
                raise DataError(
                    f"expected exactly one row for variant={variant}, "
                    f"sigma_j={group[0]}, samples_m={group[1]}; got {len(match)}"
                )
            heights[variant].append(match[0])

    fig, ax = plt.subplots(figsize=(8, 4))
    x = np.arange(len(groups), dtype=float)
    width = 0.8 / len(variants)
    for i, variant in enumerate(variants):
        ax.bar(
            x + (i - (len(variants) - 1) / 2) * width,
            heights[variant],
            width=width,
            label=variant,
            color=VARIANT_COLORS.get(variant),
        )
    ax.set_xticks(x)
    ax.set_xticklabels([f"sj={g[0]:g}\nM={g[1]}" for g in groups], fontsize=8)
    ax.set_ylabel("total variance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=130)
    plt.close(fig)
    _write_sidecar(
        spec.output_path,
        {
            "kind": spec.kind,
            "groups": [list(g) for g in groups],
            "heights": heights,
        },
    )
    return spec.output_path


def render(spec: PlotSpec) -> str:
    if spec.kind == "trajectory-grid":
        return plot_trajectory_grid(spec)
    if spec.kind == "noise-traces":
        return plot_noise_traces(spec)
    return plot_variance_bars(spec)
