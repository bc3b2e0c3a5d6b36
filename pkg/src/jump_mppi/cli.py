"""Command-line entry point: jump-mppi <run|single|validate|bench>.

Exit codes: 0 success, 1 configuration error, 2 runtime error.  The worker
count for batch trials is capped by the JUMP_MPPI_THREADS environment
variable.  Summary files are rewritten after every sweep cell so partial
results survive an aborted run.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import io as csv_io
from .controller import ControllerState, initial_controller_state, mppi_iteration, warm_start_shift
from .experiment import (
    ExperimentConfig,
    ExperimentConfigError,
    build_mppi_config,
    build_task,
    load_config,
    sweep_cells,
)
from .harness import SLOW_ITERATION_MS, run_batch, total_variance
from .types import ConfigError, config_violations


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jump-mppi")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "single", "validate", "bench"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="experiment YAML file")
        cmd.add_argument("--trials", type=int, default=None, help="override trial count")
        cmd.add_argument("--seed", type=int, default=None, help="override base seed")
        cmd.add_argument("--out", default=None, help="override output directory")
        cmd.add_argument("--variant", choices=("old", "new", "both"), default=None)
        if name == "run":
            cmd.add_argument(
                "--timing",
                action="store_true",
                help="write measured mean_iter_ms into the summary "
                "(breaks byte-reproducibility of the file)",
            )
        if name == "bench":
            cmd.add_argument("--iterations", type=int, default=50)
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.trials is not None:
        updates["trials"] = args.trials
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.variant is not None:
        updates["variants"] = ("old", "new") if args.variant == "both" else (args.variant,)
    return replace(cfg, **updates) if updates else cfg


def _cell_tag(nu: float, sigma_j: float, samples_m: int) -> str:
    return f"nu{nu:g}_sj{sigma_j:g}_m{samples_m}"


def cmd_run(cfg: ExperimentConfig, timing: bool) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    task = build_task(cfg)
    summary_rows = []
    summary_path = os.path.join(cfg.out_dir, "summary.csv")
    for nu, sigma_j, samples_m in sweep_cells(cfg):
        mppi_cfg = build_mppi_config(cfg, nu=nu, sigma_j=sigma_j, samples_m=samples_m)
        results = run_batch(
            task, mppi_cfg, cfg.trials, cfg.base_seed,
            variants=cfg.variants, config_id=_cell_tag(nu, sigma_j, samples_m),
        )
        for variant in cfg.variants:
            records, summary = results[variant]
            times_ms = np.concatenate([r.wall_time_per_iteration for r in records]) * 1e3
            slow = float(np.mean(times_ms > SLOW_ITERATION_MS))
            if slow > 0:
                print(
                    f"warning: {slow:.1%} of iterations exceeded {SLOW_ITERATION_MS:g} ms "
                    f"({task.name} {variant} {_cell_tag(nu, sigma_j, samples_m)})",
                    file=sys.stderr,
                )
            # mean_iter_ms is a placeholder unless --timing: summaries are
            # contractually byte-reproducible, wall time is not
            summary_rows.append(
                csv_io.SummaryRow(
                    task=task.name,
                    variant=variant,
                    nu=nu,
                    sigma_j=sigma_j,
                    samples_m=samples_m,
                    trials=cfg.trials,
                    success_rate=summary.success_rate,
                    total_variance=summary.total_variance,
                    mean_iter_ms=float(times_ms.mean()) if timing else 0.0,
                    seed=cfg.base_seed,
                )
            )
            traj_path = os.path.join(
                cfg.out_dir,
                f"traj_{task.name}_{variant}_{_cell_tag(nu, sigma_j, samples_m)}.csv",
            )
            csv_io.write_trajectory_csv(
                records, traj_path, task.state_names, task.control_names, float(cfg.mppi["dt"])
            )
        csv_io.write_summary_csv(summary_rows, summary_path)  # flush after each cell
        print(f"cell {_cell_tag(nu, sigma_j, samples_m)} done", file=sys.stderr)
    return 0


def cmd_single(cfg: ExperimentConfig) -> int:
    from .harness import run_trial, trial_seed

    os.makedirs(cfg.out_dir, exist_ok=True)
    task = build_task(cfg)
    variant = cfg.variants[-1]  # "new" when both are configured
    mppi_cfg = build_mppi_config(cfg, jump_sampling_enabled=(variant == "new"))
    record = run_trial(task, mppi_cfg, trial_seed(cfg.base_seed, 0), config_id=variant)
    path = os.path.join(cfg.out_dir, f"single_{task.name}_{variant}.csv")
    csv_io.write_trajectory_csv(
        [record], path, task.state_names, task.control_names, float(cfg.mppi["dt"])
    )
    print(f"success={record.success} diverged={record.diverged} -> {path}")
    return 0


def cmd_validate(cfg: ExperimentConfig) -> int:
    mppi_cfg = build_mppi_config(cfg)
    violations = config_violations(mppi_cfg)
    task = build_task(cfg)
    x0 = np.asarray(task.x0, dtype=float)
    if task.model.drift(x0, 0.0).shape != (task.model.state_dim,):
        violations.append("drift output dimension mismatch")
    if task.model.control_matrix(x0, 0.0).shape != (
        task.model.state_dim,
        task.model.control_dim,
    ):
        violations.append("control matrix dimension mismatch")
    if violations:
        for v in violations:
            print(f"invalid: {v}", file=sys.stderr)
        return 1
    print("config ok")
    return 0


def cmd_bench(cfg: ExperimentConfig, iterations: int) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    task = build_task(cfg)
    mppi_cfg = build_mppi_config(cfg)
    ctrl = initial_controller_state(mppi_cfg)
    x0 = np.asarray(task.x0, dtype=float)
    times_ms = []
    for k in range(iterations):
        tic = time.perf_counter()
        seq, _ = mppi_iteration(ctrl, task.model, task.cost_model, x0, master_seed=cfg.base_seed)
        times_ms.append((time.perf_counter() - tic) * 1e3)
        ctrl = ControllerState(warm_start_shift(seq, mppi_cfg.u_init), k + 1, mppi_cfg)
    times = np.asarray(times_ms)
    path = os.path.join(cfg.out_dir, f"bench_{task.name}.csv")
    csv_io.write_bench_csv(times_ms, path)
    median = float(np.median(times))
    print(
        f"iterations={iterations} median={median:.3f} ms "
        f"p90={float(np.percentile(times, 90)):.3f} ms max={times.max():.3f} ms -> {path}"
    )
    if median > SLOW_ITERATION_MS:
        print(
            f"warning: median iteration time {median:.1f} ms exceeds the "
            f"{SLOW_ITERATION_MS:g} ms real-time budget on this machine",
            file=sys.stderr,
        )
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (ExperimentConfigError, ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            return cmd_run(cfg, timing=args.timing)
        if args.command == "single":
            return cmd_single(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
        return cmd_bench(cfg, args.iterations)
    except (ExperimentConfigError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure: partial results are already flushed
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
