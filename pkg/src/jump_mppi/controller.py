"""Importance-sampled control update and the receding-horizon MPC pieces.

One MPC iteration samples M noise realizations around the nominal control
sequence, rolls them out, scores each with the modified cost, and moves
every control step by the cost-weighted average of the sampled
perturbations divided by sqrt(dt):

    u*_j = u_j + mapping . sum_m w_m eps_combined[m, j] / sqrt(dt)
    w_m  = exp(-(S_m - min_k S_k) / lambda) / sum exp(...)

The min-cost baseline leaves the weights mathematically unchanged and keeps
the exponentials in range.  Rollouts whose state diverged carry +inf cost
and therefore weight zero; only if every rollout diverged does the iteration
fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .costs import CostModel
from .dynamics import DynamicsModel, step_unchecked
from .noise import RngStream, sample_noise_batch
from .types import ControlSequence, MppiConfig, NoiseRealization, RolloutResult, StateTrajectory


class ControllerError(RuntimeError):
    pass


@dataclass(frozen=True)
class ControllerState:
    """Nominal control sequence plus the iteration counter that seeds sampling."""

    nominal_controls: ControlSequence
    iteration_index: int
    config: MppiConfig

    def __post_init__(self):
        if len(self.nominal_controls) != self.config.horizon_n:
            raise ValueError("nominal_controls length must equal config.horizon_n")


@dataclass(frozen=True)
class UpdateDiagnostics:
    weights: np.ndarray           # (M,), sums to 1
    min_cost: float
    effective_sample_size: float  # 1 / sum w^2
    per_step_update_norm: np.ndarray  # (N,)


def initial_controller_state(cfg: MppiConfig) -> ControllerState:
    """Nominal sequence filled with u_init (hover thrust, zero force, ...)."""
    controls = np.tile(cfg.u_init, (cfg.horizon_n, 1))
    return ControllerState(ControlSequence(controls, cfg.dt), 0, cfg)


def compute_weights(costs, lambda_: float) -> np.ndarray:
    """Softmax weights over rollout costs; +inf costs get exactly zero weight."""
    costs = np.asarray(costs, dtype=float)
    finite = np.isfinite(costs)
    if not finite.any():
        raise ControllerError("no viable rollout")
    weights = np.zeros(costs.shape)
    shifted = costs[finite] - costs[finite].min()
    weights[finite] = np.exp(-shifted / lambda_)
    return weights / weights.sum()


def _weighted_noise_average(weights: np.ndarray, eps: np.ndarray) -> np.ndarray:
    # (M,), (M, N, m) -> (N, m); single fixed-order reduction shared by the
    # importance-sampled update and the stochastic-optimization update so the
    # two agree bit-for-bit on shared inputs.
    return np.einsum("m,mjk->jk", weights, eps)


def update_controls(
    ctrl: ControllerState,
    rollouts: Sequence[RolloutResult],
    mapping: Optional[np.ndarray] = None,
) -> ControlSequence:
    """Apply the weighted perturbation average to the nominal sequence."""
    costs = np.array([r.cost for r in rollouts])
    weights = compute_weights(costs, ctrl.config.lambda_)
    eps = np.stack([r.noise.eps_combined for r in rollouts])
    delta = _weighted_noise_average(weights, eps) / math.sqrt(ctrl.config.dt)
    if mapping is not None:
        delta = delta @ np.asarray(mapping, dtype=float).T
    return ControlSequence(ctrl.nominal_controls.controls + delta, ctrl.config.dt)


def warm_start_shift(controls: ControlSequence, u_init) -> ControlSequence:
    """Drop the executed first control, shift the rest forward, refill the tail."""
    u_init = np.atleast_1d(np.asarray(u_init, dtype=float))
    shifted = np.vstack([controls.controls[1:], u_init[None, :]])
    return ControlSequence(shifted, controls.dt)


def mppi_iteration(
    ctrl: ControllerState,
    model: DynamicsModel,
    cost_model: CostModel,
    x0: np.ndarray,
    master_seed: int,
    mapping: Optional[np.ndarray] = None,
    return_rollouts: bool = False,
):
    """One sampling-and-update pass from state x0.

    Deterministic given (master_seed, ctrl.iteration_index): all noise for
    the iteration is drawn up front from the iteration's stream, so results
    do not depend on how the rollout batch is scheduled.
    """
    cfg = ctrl.config
    n_steps, m_dim = cfg.horizon_n, cfg.control_dim
    stream = RngStream(master_seed, ctrl.iteration_index)
    eps_d, indicators, eps_j, eps_combined = sample_noise_batch(stream, cfg, cfg.samples_m)
    # step-major copies so the per-step slices below are contiguous
    eps_d_t = np.ascontiguousarray(eps_d.swapaxes(0, 1))
    eps_j_t = np.ascontiguousarray(eps_j.swapaxes(0, 1))
    eps_c_t = np.ascontiguousarray(eps_combined.swapaxes(0, 1))

    u_nom = ctrl.nominal_controls.controls
    u_eff = model.clamp(u_nom)
    x0 = np.asarray(x0, dtype=float)
    xs = np.repeat(x0[None, :], cfg.samples_m, axis=0)
    costs = np.zeros(cfg.samples_m)
    dead = np.zeros(cfg.samples_m, dtype=bool)
    diverged_step = np.full(cfg.samples_m, -1, dtype=np.int64)
    states = np.empty((cfg.samples_m, n_steps + 1, model.state_dim)) if return_rollouts else None
    if return_rollouts:
        states[:, 0] = xs

    dt = cfg.dt
    for j in range(n_steps):
        q = cost_model.state_cost(xs, j * dt)
        q_tilde = cost_model.modified_cost(q, u_eff[j], eps_c_t[j], dt)
        costs = costs + np.where(dead, 0.0, q_tilde * dt)
        x_new = step_unchecked(model, xs, u_nom[j], eps_d_t[j], eps_j_t[j], 1.0, dt, t=j * dt)
        bad = ~np.all(np.isfinite(x_new), axis=-1)
        newly_dead = bad & ~dead
        if newly_dead.any():
            costs[newly_dead] = np.inf
            diverged_step[newly_dead] = j
            dead |= newly_dead
        if dead.any():
            x_new[dead] = xs[dead]  # freeze diverged rollouts at their last finite state
        xs = x_new
        if return_rollouts:
            states[:, j + 1] = xs
    costs = costs + np.where(dead, 0.0, cost_model.terminal_cost(xs))

    weights = compute_weights(costs, cfg.lambda_)
    delta = _weighted_noise_average(weights, eps_combined) / math.sqrt(dt)
    if mapping is not None:
        delta = delta @ np.asarray(mapping, dtype=float).T
    new_controls = ControlSequence(u_nom + delta, dt)

    finite = np.isfinite(costs)
    diagnostics = UpdateDiagnostics(
        weights=weights,
        min_cost=float(costs[finite].min()),
        effective_sample_size=float(1.0 / np.sum(weights**2)),
        per_step_update_norm=np.linalg.norm(delta, axis=1),
    )
    if return_rollouts:
        rollouts = [
            RolloutResult(
                StateTrajectory(states[m], dt),
                NoiseRealization(eps_d[m], indicators[m], eps_j[m], eps_combined[m]),
                float(costs[m]),
                int(diverged_step[m]) if dead[m] else None,
            )
            for m in range(cfg.samples_m)
        ]
        return new_controls, diagnostics, rollouts
    return new_controls, diagnostics
