"""State costs, the theoretically induced control-cost matrix, and the
importance-sampling-modified running cost.

The modified running cost for one step is

    q~ = q + 1/2 u'Ru + lambda * u' calB eps / sqrt(dt)
           + 1/2 * lambda * (1 - 1/c) * eps' bb eps / dt

where eps is the combined (diffusion + jump) perturbation of that step.
With noise entering through the control channels, calB and bb are identity
and are skipped entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .dynamics import DynamicsModel


class CostModelError(RuntimeError):
    pass


@dataclass(frozen=True)
class CostModel:
    """State cost q(x,t), terminal cost phi(x), control-cost matrix R.

    `control_channel` declares that the dynamics route noise through the
    control channels, which makes the two correction matrices of the
    modified running cost identity.
    """

    state_cost: Callable          # q(x, t) -> (...,), nonnegative
    terminal_cost: Callable       # phi(x) -> (...,), nonnegative
    control_cost_matrix: np.ndarray  # R, (m, m) symmetric PSD
    lambda_: float
    c: float
    control_channel: bool = True
    cal_b: Optional[np.ndarray] = None     # G' Sigma^-1 B when not control-channel
    bb_term: Optional[np.ndarray] = None   # B' Sigma^-1 B when not control-channel

    def __post_init__(self):
        r = np.atleast_2d(np.asarray(self.control_cost_matrix, dtype=float))
        object.__setattr__(self, "control_cost_matrix", r)

    def modified_cost(self, q_vals, u, eps_rows, dt: float):
        cal_b = None if self.control_channel else self.cal_b
        bb = None if self.control_channel else self.bb_term
        return modified_running_cost(
            q_vals, u, eps_rows, self.control_cost_matrix,
            self.lambda_, self.c, dt, cal_b=cal_b, bb_term=bb,
        )


def control_cost_matrix_from_dynamics(
    model: DynamicsModel, x, t: float, lambda_: float
) -> np.ndarray:
    """R = lambda * G' (B B')^+ G evaluated at one state.

    Uses the pseudo-inverse so rank-deficient diffusion (noise spanning only
    part of the state space) still yields a consistent control cost.
    """
    g = np.asarray(model.control_matrix(x, t), dtype=float)
    b = np.asarray(model.diffusion_matrix(x, t), dtype=float)
    sigma = b @ b.T
    try:
        sigma_pinv = np.linalg.pinv(sigma, hermitian=True)
    except np.linalg.LinAlgError as exc:
        raise CostModelError("control cost undefined for this dynamics") from exc
    r = lambda_ * (g.T @ sigma_pinv @ g)
    if not np.all(np.isfinite(r)):
        raise CostModelError("control cost undefined for this dynamics")
    return r


def modified_running_cost(
    q_val,
    u,
    eps_combined_row,
    r_matrix,
    lambda_: float,
    c: float,
    dt: float,
    cal_b: Optional[np.ndarray] = None,
    bb_term: Optional[np.ndarray] = None,
):
    """Per-step modified running cost q~; broadcasts over leading axes of eps."""
    u = np.asarray(u, dtype=float)
    eps = np.asarray(eps_combined_row, dtype=float)
    r_matrix = np.asarray(r_matrix, dtype=float)
    if u.ndim == 1 and cal_b is None and bb_term is None:
        # hot path of the batched rollout loop: one shared control row
        # against (..., m) perturbations
        if u.shape[0] == 1:
            u_ru = u[0] * r_matrix[0, 0] * u[0]
            cross = u[0] * eps[..., 0]
            quad = eps[..., 0] * eps[..., 0]
        else:
            u_ru = float(u @ r_matrix @ u)
            cross = eps @ u
            quad = np.einsum("...i,...i->...", eps, eps)
        return (
            q_val
            + 0.5 * u_ru
            + lambda_ * cross / np.sqrt(dt)
            + 0.5 * lambda_ * (1.0 - 1.0 / c) * quad / dt
        )
    u_ru = np.einsum("...i,ij,...j->...", u, r_matrix, u)
    mapped = eps if cal_b is None else np.einsum("ij,...j->...i", cal_b, eps)
    cross = np.einsum("...i,...i->...", u, mapped)
    if bb_term is None:
        quad = np.einsum("...i,...i->...", eps, eps)
    else:
        quad = np.einsum("...i,ij,...j->...", eps, bb_term, eps)
    return (
        q_val
        + 0.5 * u_ru
        + lambda_ * cross / np.sqrt(dt)
        + 0.5 * lambda_ * (1.0 - 1.0 / c) * quad / dt
    )


def trajectory_cost(states, controls, noise, cost_model: CostModel, dt: float) -> float:
    """Accumulated modified cost of one rollout:
    phi(x_N) + sum_j q~(x_j, u_j, eps_j) * dt.  Non-finite values become +inf.
    """
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    n_steps = controls.shape[0]
    total = 0.0
    for j in range(n_steps):
        q = cost_model.state_cost(states[j], j * dt)
        total += float(cost_model.modified_cost(q, controls[j], noise.eps_combined[j], dt)) * dt
    total += float(cost_model.terminal_cost(states[n_steps]))
    if not np.isfinite(total):
        return float("inf")
    return total


# ---------------------------------------------------------------------------
# Experiment cost functions (plain dataclasses so they pickle across workers).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartpoleStateCost:
    """q = w_pos x^2 + w_vel xdot^2 + w_angle (1 + cos th)^2 + w_avel thdot^2.

    The angle term vanishes at the upright position theta = pi.
    """

    w_pos: float = 2.5
    w_vel: float = 1.0
    w_angle: float = 50.0
    w_avel: float = 1.0

    def __call__(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        return (
            self.w_pos * x[..., 0] ** 2
            + self.w_vel * x[..., 1] ** 2
            + self.w_angle * (1.0 + np.cos(x[..., 2])) ** 2
            + self.w_avel * x[..., 3] ** 2
        )


@dataclass(frozen=True)
class QuadrotorStateCost:
    """q = w_pos |p - p*|^2 + w_vel |v|^2 + w_att |(roll, pitch)|^2 + w_rate |omega|^2."""

    target: Tuple[float, float, float]
    w_pos: float = 4.0
    w_vel: float = 1.0
    w_att: float = 10.0
    w_rate: float = 1.0

    def __call__(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        target = np.asarray(self.target, dtype=float)
        pos_err = x[..., 0:3] - target
        return (
            self.w_pos * np.einsum("...i,...i->...", pos_err, pos_err)
            + self.w_vel * np.einsum("...i,...i->...", x[..., 3:6], x[..., 3:6])
            + self.w_att * (x[..., 6] ** 2 + x[..., 7] ** 2)
            + self.w_rate * np.einsum("...i,...i->...", x[..., 9:12], x[..., 9:12])
        )


@dataclass(frozen=True)
class ScaledTerminalCost:
    """phi(x) = scale * q(x); the default terminal cost of both tasks."""

    running: Callable
    scale: float = 10.0

    def __call__(self, x):
        return self.scale * self.running(x, 0.0)
