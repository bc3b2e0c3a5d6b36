"""CSV output for experiment results.

Reals are serialized with 17 significant digits, which round-trips IEEE
doubles exactly, and rows are emitted in a deterministic order, so identical
configs and seeds produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .harness import TrialRecord

SUMMARY_COLUMNS = (
    "task", "variant", "nu", "sigma_j", "samples_m", "trials",
    "success_rate", "total_variance", "mean_iter_ms", "seed",
)


@dataclass(frozen=True)
class SummaryRow:
    task: str
    variant: str
    nu: float
    sigma_j: float
    samples_m: int
    trials: int
    success_rate: float
    total_variance: float
    mean_iter_ms: float
    seed: int


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_summary_csv(rows: Sequence[SummaryRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.task, row.variant, fmt(row.nu), fmt(row.sigma_j),
                    fmt(row.samples_m), fmt(row.trials), fmt(row.success_rate),
                    fmt(row.total_variance), fmt(row.mean_iter_ms), fmt(row.seed),
                ]
            )


def trajectory_columns(state_names: Sequence[str], control_names: Sequence[str]) -> Tuple[str, ...]:
    return ("trial", "step", "t") + tuple(state_names) + tuple(control_names) + ("jump_indicator",)


def write_trajectory_csv(
    records: Sequence[TrialRecord],
    path: str,
    state_names: Sequence[str],
    control_names: Sequence[str],
    dt: float,
) -> None:
    """One row per executed step: the state at the start of the step, the
    executed control, and the plant jump indicator."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_columns(state_names, control_names))
        for trial_idx, rec in enumerate(records):
            n_steps = rec.controls.shape[0]
            for step_idx in range(n_steps):
                writer.writerow(
                    [str(trial_idx), str(step_idx), fmt(step_idx * dt)]
                    + [fmt(v) for v in rec.states[step_idx]]
                    + [fmt(v) for v in rec.controls[step_idx]]
                    + [str(int(rec.jump_indicators[step_idx]))]
                )


def read_summary_csv(path: str) -> List[Dict]:
    with open(path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            rows.append(
                {
                    "task": raw["task"],
                    "variant": raw["variant"],
                    "nu": float(raw["nu"]),
                    "sigma_j": float(raw["sigma_j"]),
                    "samples_m": int(raw["samples_m"]),
                    "trials": int(raw["trials"]),
                    "success_rate": float(raw["success_rate"]),
                    "total_variance": float(raw["total_variance"]),
                    "mean_iter_ms": float(raw["mean_iter_ms"]),
                    "seed": int(raw["seed"]),
                }
            )
        return rows


def read_trajectory_csv(path: str) -> Dict[str, np.ndarray]:
    """Columns keyed by header name; numeric columns parsed as float arrays."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                columns[name].append(float(value))
    return {name: np.asarray(vals) for name, vals in columns.items()}


def write_bench_csv(times_ms: Sequence[float], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("iteration", "wall_ms"))
        for i, t in enumerate(times_ms):
            writer.writerow([str(i), fmt(t)])
