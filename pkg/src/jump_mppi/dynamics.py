"""Control-affine jump-diffusion dynamics with explicit-Euler stepping.

A model supplies the drift f(x,t), control matrix G(x,t), diffusion matrix
B(x,t) and jump matrix H(x,t).  One Euler step is

    x+ = x + (f + G u) dt + B eps_d sqrt(dt) + [jump] H eps_j sqrt(dt)

with the jump term scaled by sqrt(dt) exactly like the diffusion term (this
is the discretization the control update assumes; `jump_scale_mode="unit"`
is available for sensitivity studies with the conventional O(1) jump
increment).  All maps accept a single state (n,) or a batch (..., n) and
broadcast, which is how the controller evaluates thousands of rollouts at
once.

The concrete cartpole and quadrotor models route both noise sources through
the control channels: B == H == G.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .types import ControlSequence, NoiseRealization, RolloutResult, StateTrajectory


class StateDivergedError(RuntimeError):
    def __init__(self, step_index=None):
        self.step_index = step_index
        at = "" if step_index is None else f" at step {step_index}"
        super().__init__(f"state diverged{at}")


def _matvec(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    # (..., n, m) @ (..., m) -> (..., n) with broadcasting over leading axes.
    # Single-channel inputs reduce to one product; the general case uses
    # batched matmul.
    if mat.shape[-1] == 1:
        return mat[..., 0] * vec[..., 0, None]
    return (mat @ vec[..., None])[..., 0]


@dataclass(frozen=True)
class DynamicsModel:
    """Evaluable control-affine jump-diffusion dynamics."""

    state_dim: int
    control_dim: int
    drift: Callable                  # f(x, t) -> (..., n)
    control_matrix: Callable         # G(x, t) -> (..., n, m)
    diffusion_matrix: Callable       # B(x, t) -> (..., n, p)
    jump_matrix: Callable            # H(x, t) -> (..., n, q)
    control_limits: Optional[Tuple[np.ndarray, np.ndarray]] = None  # (lo, hi), each (m,)
    noise_through_controls: bool = False  # B == H == G; lets step evaluate G once
    # optional fused (f, G) evaluator sharing intermediate terms; must return
    # exactly the same values as drift/control_matrix
    fused_drift_control: Optional[Callable] = None

    def clamp(self, u: np.ndarray) -> np.ndarray:
        if self.control_limits is None:
            return u
        lo, hi = self.control_limits
        return np.clip(u, lo, hi)


def step(
    model: DynamicsModel,
    x: np.ndarray,
    u: np.ndarray,
    eps_d_row: np.ndarray,
    eps_j_row: np.ndarray,
    has_jump,
    dt: float,
    t: float = 0.0,
    step_index: Optional[int] = None,
    jump_scale_mode: str = "sqrt_dt",
) -> np.ndarray:
    """One explicit-Euler step; raises StateDivergedError on non-finite output."""
    x_new = step_unchecked(model, x, u, eps_d_row, eps_j_row, has_jump, dt, t, jump_scale_mode)
    if not np.all(np.isfinite(x_new)):
        raise StateDivergedError(step_index)
    return x_new


def step_unchecked(
    model: DynamicsModel,
    x: np.ndarray,
    u: np.ndarray,
    eps_d_row: np.ndarray,
    eps_j_row: np.ndarray,
    has_jump,
    dt: float,
    t: float = 0.0,
    jump_scale_mode: str = "sqrt_dt",
) -> np.ndarray:
    """Euler step without the finiteness check (batched rollouts mask per row)."""
    u = model.clamp(np.asarray(u, dtype=float))
    if model.fused_drift_control is not None:
        f, g = model.fused_drift_control(x, t)
    else:
        f = model.drift(x, t)
        g = model.control_matrix(x, t)
    if model.noise_through_controls:
        b = h = g
    else:
        b = model.diffusion_matrix(x, t)
        h = model.jump_matrix(x, t)
    sqrt_dt = np.sqrt(dt)
    jump_scale = sqrt_dt if jump_scale_mode == "sqrt_dt" else 1.0
    flag = np.asarray(has_jump, dtype=float)
    if flag.ndim:
        flag = flag[..., None]
    if b is g and h is g and g.shape[-1] > 1:
        # one batched matmul for all three noise/control products; each
        # output column is the same dot product the separate calls compute
        eps_d_row = np.asarray(eps_d_row, dtype=float)
        rhs = np.empty(eps_d_row.shape + (3,))
        rhs[..., 0] = u
        rhs[..., 1] = eps_d_row
        rhs[..., 2] = eps_j_row
        prod = g @ rhs
        out = f + prod[..., 0]
        out *= dt
        out += x
        out += prod[..., 1] * sqrt_dt
        out += flag * prod[..., 2] * jump_scale
        return out
    return (
        x
        + (f + _matvec(g, u)) * dt
        + _matvec(b, eps_d_row) * sqrt_dt
        + flag * _matvec(h, eps_j_row) * jump_scale
    )


def rollout(
    model: DynamicsModel,
    x0: np.ndarray,
    controls: ControlSequence,
    noise: NoiseRealization,
    cost_model,
) -> RolloutResult:
    """Propagate one noise realization and accumulate its modified cost.

    A pure function of its arguments.  If the state diverges the cost is
    +inf and `diverged_at` records the offending step; the remaining rows of
    the trajectory repeat the last finite state.
    """
    from .costs import trajectory_cost

    n_steps = len(controls)
    if len(noise) != n_steps:
        raise ValueError("controls and noise must have equal length")
    x = np.asarray(x0, dtype=float)
    states = np.empty((n_steps + 1, model.state_dim))
    states[0] = x
    u_eff = model.clamp(controls.controls)
    diverged_at = None
    for j in range(n_steps):
        try:
            x = step(
                model,
                x,
                u_eff[j],
                noise.eps_d[j],
                noise.eps_j[j],
                float(noise.jump_indicator[j]),
                controls.dt,
                t=j * controls.dt,
                step_index=j,
            )
        except StateDivergedError as exc:
            diverged_at = exc.step_index
            states[j + 1 :] = states[j]
            break
        states[j + 1] = x
    trajectory = StateTrajectory(states, controls.dt)
    if diverged_at is not None:
        cost = float("inf")
    else:
        cost = trajectory_cost(states, u_eff, noise, cost_model, controls.dt)
    return RolloutResult(trajectory, noise, float(cost), diverged_at)


# ---------------------------------------------------------------------------
# Cartpole: frictionless cart with a point-mass pole on a massless rod.
# State (x, xdot, theta, thetadot) with theta = 0 hanging down and theta = pi
# upright; the control is a horizontal force on the cart.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartpoleModel:
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    pole_half_length: float = 0.5
    gravity: float = 9.81

    def __post_init__(self):
        if min(self.cart_mass, self.pole_mass, self.pole_half_length, self.gravity) <= 0:
            raise ValueError("cartpole parameters must be positive")

    def drift(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        xdot, th, thdot = x[..., 1], x[..., 2], x[..., 3]
        s, co = np.sin(th), np.cos(th)
        mc, mp, l, g = self.cart_mass, self.pole_mass, self.pole_half_length, self.gravity
        denom = mc + mp * s * s
        xdd = mp * s * (g * co + l * thdot * thdot) / denom
        thdd = -(xdd * co + g * s) / l
        out = np.empty_like(x)
        out[..., 0] = xdot
        out[..., 1] = xdd
        out[..., 2] = thdot
        out[..., 3] = thdd
        return out

    def control_matrix(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        th = x[..., 2]
        s, co = np.sin(th), np.cos(th)
        mc, mp, l = self.cart_mass, self.pole_mass, self.pole_half_length
        denom = mc + mp * s * s
        g_mat = np.zeros(x.shape[:-1] + (4, 1))
        g_mat[..., 1, 0] = 1.0 / denom
        g_mat[..., 3, 0] = -co / (l * denom)
        return g_mat

    def drift_and_control(self, x, t=0.0):
        """Fused (f, G): identical expressions to drift/control_matrix with
        the trigonometry evaluated once."""
        x = np.asarray(x, dtype=float)
        xdot, th, thdot = x[..., 1], x[..., 2], x[..., 3]
        s, co = np.sin(th), np.cos(th)
        mc, mp, l, g = self.cart_mass, self.pole_mass, self.pole_half_length, self.gravity
        denom = mc + mp * s * s
        xdd = mp * s * (g * co + l * thdot * thdot) / denom
        thdd = -(xdd * co + g * s) / l
        out = np.empty_like(x)
        out[..., 0] = xdot
        out[..., 1] = xdd
        out[..., 2] = thdot
        out[..., 3] = thdd
        g_mat = np.zeros(x.shape[:-1] + (4, 1))
        g_mat[..., 1, 0] = 1.0 / denom
        g_mat[..., 3, 0] = -co / (l * denom)
        return out, g_mat

    def energy(self, x) -> np.ndarray:
        """Total mechanical energy, zero at rest in the hanging position."""
        x = np.asarray(x, dtype=float)
        xdot, th, thdot = x[..., 1], x[..., 2], x[..., 3]
        mc, mp, l, g = self.cart_mass, self.pole_mass, self.pole_half_length, self.gravity
        kinetic = (
            0.5 * (mc + mp) * xdot * xdot
            + mp * l * xdot * thdot * np.cos(th)
            + 0.5 * mp * l * l * thdot * thdot
        )
        return kinetic + mp * g * l * (1.0 - np.cos(th))


def cartpole_dynamics(
    params: Optional[CartpoleModel] = None,
    control_limits: Optional[Tuple[float, float]] = None,
) -> DynamicsModel:
    """Cartpole with force noise entering through the control channel (B = H = G)."""
    params = params or CartpoleModel()
    limits = None
    if control_limits is not None:
        lo, hi = control_limits
        limits = (np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float)))
    return DynamicsModel(
        state_dim=4,
        control_dim=1,
        drift=params.drift,
        control_matrix=params.control_matrix,
        diffusion_matrix=params.control_matrix,
        jump_matrix=params.control_matrix,
        control_limits=limits,
        noise_through_controls=True,
        fused_drift_control=params.drift_and_control,
    )


# ---------------------------------------------------------------------------
# Quadrotor: 12-state Euler-angle rigid body.
# State (px, py, pz, vx, vy, vz, roll, pitch, yaw, p, q, r), controls
# (total thrust, body torques x/y/z).
# ---------------------------------------------------------------------------

_COS_PITCH_FLOOR = 1e-6  # keeps Euler kinematics finite at pitch -> +-90 deg


@dataclass(frozen=True)
class QuadrotorModel:
    mass: float = 1.0
    arm_length: float = 0.2
    inertia_diag: Tuple[float, float, float] = (0.01, 0.01, 0.02)
    gravity: float = 9.81

    def __post_init__(self):
        if self.mass <= 0 or self.arm_length <= 0 or min(self.inertia_diag) <= 0:
            raise ValueError("quadrotor parameters must be positive")

    def drift(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        v = x[..., 3:6]
        roll, pitch = x[..., 6], x[..., 7]
        wx, wy, wz = x[..., 9], x[..., 10], x[..., 11]
        ixx, iyy, izz = self.inertia_diag

        sr, cr = np.sin(roll), np.cos(roll)
        cp = np.cos(pitch)
        cp_safe = np.where(np.abs(cp) < _COS_PITCH_FLOOR,
                           np.copysign(_COS_PITCH_FLOOR, cp), cp)
        tp = np.sin(pitch) / cp_safe

        out = np.zeros_like(x)
        out[..., 0:3] = v
        out[..., 5] = -self.gravity
        out[..., 6] = wx + sr * tp * wy + cr * tp * wz
        out[..., 7] = cr * wy - sr * wz
        out[..., 8] = (sr * wy + cr * wz) / cp_safe
        out[..., 9] = (iyy - izz) * wy * wz / ixx
        out[..., 10] = (izz - ixx) * wx * wz / iyy
        out[..., 11] = (ixx - iyy) * wx * wy / izz
        return out

    def control_matrix(self, x, t=0.0):
        x = np.asarray(x, dtype=float)
        roll, pitch, yaw = x[..., 6], x[..., 7], x[..., 8]
        sr, cr = np.sin(roll), np.cos(roll)
        sp, cp = np.sin(pitch), np.cos(pitch)
        sy, cy = np.sin(yaw), np.cos(yaw)
        g_mat = np.zeros(x.shape[:-1] + (12, 4))
        inv_m = 1.0 / self.mass
        # thrust direction: body z axis expressed in the world frame
        g_mat[..., 3, 0] = (cr * sp * cy + sr * sy) * inv_m
        g_mat[..., 4, 0] = (cr * sp * sy - sr * cy) * inv_m
        g_mat[..., 5, 0] = (cr * cp) * inv_m
        ixx, iyy, izz = self.inertia_diag
        g_mat[..., 9, 1] = 1.0 / ixx
        g_mat[..., 10, 2] = 1.0 / iyy
        g_mat[..., 11, 3] = 1.0 / izz
        return g_mat

    def drift_and_control(self, x, t=0.0):
        """Fused (f, G): identical expressions to drift/control_matrix with
        the trigonometry evaluated once."""
        x = np.asarray(x, dtype=float)
        v = x[..., 3:6]
        roll, pitch, yaw = x[..., 6], x[..., 7], x[..., 8]
        wx, wy, wz = x[..., 9], x[..., 10], x[..., 11]
        ixx, iyy, izz = self.inertia_diag

        sr, cr = np.sin(roll), np.cos(roll)
        sp, cp = np.sin(pitch), np.cos(pitch)
        sy, cy = np.sin(yaw), np.cos(yaw)
        cp_safe = np.where(np.abs(cp) < _COS_PITCH_FLOOR,
                           np.copysign(_COS_PITCH_FLOOR, cp), cp)
        tp = sp / cp_safe

        out = np.zeros_like(x)
        out[..., 0:3] = v
        out[..., 5] = -self.gravity
        out[..., 6] = wx + sr * tp * wy + cr * tp * wz
        out[..., 7] = cr * wy - sr * wz
        out[..., 8] = (sr * wy + cr * wz) / cp_safe
        out[..., 9] = (iyy - izz) * wy * wz / ixx
        out[..., 10] = (izz - ixx) * wx * wz / iyy
        out[..., 11] = (ixx - iyy) * wx * wy / izz

        g_mat = np.zeros(x.shape[:-1] + (12, 4))
        inv_m = 1.0 / self.mass
        g_mat[..., 3, 0] = (cr * sp * cy + sr * sy) * inv_m
        g_mat[..., 4, 0] = (cr * sp * sy - sr * cy) * inv_m
        g_mat[..., 5, 0] = (cr * cp) * inv_m
        g_mat[..., 9, 1] = 1.0 / ixx
        g_mat[..., 10, 2] = 1.0 / iyy
        g_mat[..., 11, 3] = 1.0 / izz
        return out, g_mat

    def hover_control(self) -> np.ndarray:
        return np.array([self.mass * self.gravity, 0.0, 0.0, 0.0])


def quadrotor_dynamics(
    params: Optional[QuadrotorModel] = None,
    control_limits: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> DynamicsModel:
    """Quadrotor with thrust/torque noise through the control channels (B = H = G)."""
    params = params or QuadrotorModel()
    limits = None
    if control_limits is not None:
        lo, hi = control_limits
        limits = (np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    return DynamicsModel(
        state_dim=12,
        control_dim=4,
        drift=params.drift,
        control_matrix=params.control_matrix,
        diffusion_matrix=params.control_matrix,
        jump_matrix=params.control_matrix,
        control_limits=limits,
        noise_through_controls=True,
        fused_drift_control=params.drift_and_control,
    )
