"""Closed-loop MPC execution: plant with true noise, batch trials, success
criteria and summary statistics.

The plant is always driven by both Gaussian and jump noise; the controller
variants ("old" = diffusion-only sampler, "new" = jump-aware sampler) differ
only in their sampling distribution.  Batches run the two variants on
identical per-trial plant-noise seeds, so success-rate differences are
attributable to the controller alone.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .controller import ControllerState, initial_controller_state, mppi_iteration, warm_start_shift
from .costs import CostModel
from .dynamics import DynamicsModel, StateDivergedError, step
from .noise import PLANT_STREAM_ID, RngStream, chol_factor
from .types import ControlSequence, MppiConfig

SLOW_ITERATION_MS = 20.0  # advisory real-time budget for one MPC iteration


@dataclass(frozen=True)
class CartpoleSuccess:
    """Swing-up success: pole within the angle band and cart within bounds
    for the whole settle window at the end of the trial."""

    angle_band: float = 0.2      # rad around upright
    cart_limit: float = 5.0      # m
    settle_seconds: float = 2.0
    dt: float = 0.02

    def __call__(self, states: np.ndarray) -> bool:
        tail = states[-(int(round(self.settle_seconds / self.dt)) + 1):]
        angle_err = np.angle(np.exp(1j * (tail[:, 2] - np.pi)))
        return bool(
            np.all(np.abs(angle_err) < self.angle_band)
            and np.all(np.abs(tail[:, 0]) < self.cart_limit)
        )


@dataclass(frozen=True)
class QuadrotorSuccess:
    """Reach the target without ever crashing (z <= 0) or tumbling."""

    target: Tuple[float, float, float]
    position_tolerance: float = 0.5  # m at final time
    max_tilt_deg: float = 80.0

    def __call__(self, states: np.ndarray) -> bool:
        final_err = np.linalg.norm(states[-1, 0:3] - np.asarray(self.target))
        max_tilt = np.deg2rad(self.max_tilt_deg)
        # the initial state sits exactly on the ground; only later contact counts
        return bool(
            final_err < self.position_tolerance
            and np.all(states[1:, 2] > 0.0)
            and np.all(np.abs(states[:, 6]) <= max_tilt)
            and np.all(np.abs(states[:, 7]) <= max_tilt)
        )


@dataclass(frozen=True)
class Task:
    """Everything a closed-loop trial needs besides the controller config."""

    name: str
    model: DynamicsModel
    cost_model: CostModel
    x0: np.ndarray
    duration_steps: int
    success: Callable[[np.ndarray], bool]
    state_names: Tuple[str, ...]
    control_names: Tuple[str, ...]


@dataclass(frozen=True)
class TrialRecord:
    config_id: str
    seed: int
    states: np.ndarray            # (T+1, n)
    controls: np.ndarray          # (T, m)
    jump_indicators: np.ndarray   # (T,)
    success: bool
    wall_time_per_iteration: np.ndarray  # (T,) seconds
    diverged: bool = False


@dataclass(frozen=True)
class BatchSummary:
    success_rate: float
    mean_states: np.ndarray     # (T+1, n)
    ci_halfwidth: np.ndarray    # (T+1, n), 1.96 * sd / sqrt(trials)
    total_variance: float


def success_predicate(task: Task, states: np.ndarray) -> bool:
    """Evaluate the task's success criterion on a full state history."""
    return bool(task.success(np.asarray(states, dtype=float)))


def run_trial(task: Task, cfg: MppiConfig, seed: int, config_id: str = "") -> TrialRecord:
    """One closed-loop MPC run of task.duration_steps plant steps.

    The plant draws its own noise stream (Gaussian at sigma_d, jumps at rate
    nu with sigma_j marks, always enabled) from the reserved plant stream id,
    so paired controller variants see bit-identical disturbances.
    """
    n, m = task.model.state_dim, task.model.control_dim
    t_steps = task.duration_steps
    states = np.empty((t_steps + 1, n))
    controls = np.empty((t_steps, m))
    jumps = np.zeros(t_steps, dtype=np.int64)
    iter_times = np.zeros(t_steps)

    plant_gen = RngStream(seed, PLANT_STREAM_ID).generator()
    plant_ld = chol_factor(cfg.sigma_d, "sigma_d")
    plant_lj = chol_factor(cfg.sigma_j, "sigma_j")

    ctrl = initial_controller_state(cfg)
    x = np.asarray(task.x0, dtype=float)
    states[0] = x
    diverged = False

    for k in range(t_steps):
        tic = time.perf_counter()
        seq, _ = mppi_iteration(ctrl, task.model, task.cost_model, x, master_seed=seed)
        iter_times[k] = time.perf_counter() - tic

        u0 = task.model.clamp(seq.controls[0])
        eps_d = plant_ld @ plant_gen.standard_normal(m)
        has_jump = bool(plant_gen.random() < cfg.nu * cfg.dt)
        eps_j = plant_lj @ plant_gen.standard_normal(m)  # drawn every step, masked by the flag
        controls[k] = u0
        jumps[k] = int(has_jump)
        try:
            x = step(task.model, x, u0, eps_d, eps_j, has_jump, cfg.dt, t=k * cfg.dt, step_index=k)
        except StateDivergedError:
            diverged = True
            states[k + 1:] = states[k]
            controls[k + 1:] = 0.0
            break
        states[k + 1] = x
        ctrl = ControllerState(warm_start_shift(seq, cfg.u_init), k + 1, cfg)

    success = False if diverged else success_predicate(task, states)
    return TrialRecord(config_id, seed, states, controls, jumps, success, iter_times, diverged)


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Derive the per-trial master seed; identical across controller variants."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(trial_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def total_variance(trials: Sequence[TrialRecord]) -> float:
    """Sum over states and steps of the across-trial (n-1) variance."""
    if len(trials) < 2:
        raise ValueError("variance undefined for fewer than 2 trials")
    stacked = np.stack([t.states for t in trials])
    return float(np.var(stacked, axis=0, ddof=1).sum())


def summarize(trials: Sequence[TrialRecord]) -> BatchSummary:
    stacked = np.stack([t.states for t in trials])
    k = stacked.shape[0]
    mean = stacked.mean(axis=0)
    if k >= 2:
        sd = stacked.std(axis=0, ddof=1)
        ci = 1.96 * sd / np.sqrt(k)
        tot_var = float(np.var(stacked, axis=0, ddof=1).sum())
    else:
        ci = np.zeros_like(mean)
        tot_var = 0.0
    rate = float(np.mean([t.success for t in trials]))
    return BatchSummary(rate, mean, ci, tot_var)


def _worker(args):
    task, cfg, seed, config_id = args
    return run_trial(task, cfg, seed, config_id)


def default_worker_count() -> int:
    env = os.environ.get("JUMP_MPPI_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_batch(
    task: Task,
    cfg: MppiConfig,
    n_trials: int,
    base_seed: int,
    variants: Sequence[str] = ("old", "new"),
    n_workers: Optional[int] = None,
    config_id: str = "",
) -> Dict[str, Tuple[List[TrialRecord], BatchSummary]]:
    """Run paired trials for each controller variant and summarize.

    Trial k uses the same master seed for every variant (paired plant
    noise).  Workers only affect scheduling: results are collected in trial
    order, so the output is identical for any worker count.
    """
    if n_trials < 1:
        raise ValueError("trial count must be >= 1")
    n_workers = n_workers if n_workers is not None else default_worker_count()
    seeds = [trial_seed(base_seed, k) for k in range(n_trials)]

    jobs = []
    for variant in variants:
        vcfg = replace(cfg, jump_sampling_enabled=(variant == "new"))
        for seed in seeds:
            jobs.append((task, vcfg, seed, f"{config_id}/{variant}" if config_id else variant))

    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(_worker, jobs))
    else:
        records = [_worker(job) for job in jobs]

    out: Dict[str, Tuple[List[TrialRecord], BatchSummary]] = {}
    for i, variant in enumerate(variants):
        chunk = records[i * n_trials : (i + 1) * n_trials]
        out[variant] = (chunk, summarize(chunk))
    return out


def slow_iteration_fraction(trials: Sequence[TrialRecord]) -> float:
    """Fraction of MPC iterations exceeding the advisory 20 ms budget."""
    times = np.concatenate([t.wall_time_per_iteration for t in trials])
    return float(np.mean(times * 1e3 > SLOW_ITERATION_MS))
