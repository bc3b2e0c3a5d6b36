"""Readers for the jump-mppi CSV schemas.

Trajectory CSVs: `trial,step,t,<state columns>,<control columns>,jump_indicator`,
one row per executed step.  Summary CSVs:
`task,variant,nu,sigma_j,samples_m,trials,success_rate,total_variance,mean_iter_ms,seed`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, List

import numpy as np


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class TrajectoryTable:
    columns: Dict[str, np.ndarray]  # all float arrays, one entry per CSV row

    @property
    def names(self) -> List[str]:
        return list(self.columns)

    def n_trials(self) -> int:
        return int(self.columns["trial"].max()) + 1 if self.columns["trial"].size else 0

    def series(self, column: str) -> np.ndarray:
        """(trials, steps) matrix of one column; trials must be aligned."""
        if column not in self.columns:
            raise DataError(f"column '{column}' not present in trajectory CSV")
        trials = self.columns["trial"].astype(int)
        values = self.columns[column]
        counts = np.bincount(trials)
        if counts.size == 0:
            raise DataError("trajectory CSV has no rows")
        if not np.all(counts == counts[0]):
            raise DataError("trials have unequal lengths")
        order = np.lexsort((self.columns["step"], trials))
        return values[order].reshape(counts.size, counts[0])

    def time_axis(self) -> np.ndarray:
        return self.series("t")[0]


def read_trajectory_csv(path: str) -> TrajectoryTable:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        raw = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                raw[name].append(float(value))
    if "trial" not in raw or "step" not in raw or "t" not in raw:
        raise DataError("not a trajectory CSV (missing trial/step/t columns)")
    return TrajectoryTable({k: np.asarray(v) for k, v in raw.items()})


def read_summary_csv(path: str) -> List[Dict]:
    with open(path, "r", newline="") as fh:
        rows = []
        for raw in csv.DictReader(fh):
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
                }
            )
    return rows


def mean_and_ci(series: np.ndarray):
    """Across-trial mean and 95% normal-approximation half-width per step.

    Matches the harness convention: 1.96 * sd(ddof=1) / sqrt(trials); a
    single trial has zero-width bands.
    """
    k = series.shape[0]
    mean = series.mean(axis=0)
    if k < 2:
        return mean, np.zeros_like(mean)
    return mean, 1.96 * series.std(axis=0, ddof=1) / np.sqrt(k)
