"""Independent mathematical objects used to cross-validate the controller.

This module implements, without reusing the controller's rollout machinery:

* the per-step exponential-family density of a control under the
  jump-diffusion sampling policy (a two-branch Gaussian selected by the jump
  indicator, with the nu*dt / (1 - nu*dt) branch weights),
* its log-likelihood gradient in the natural parameters,
* the gradient-descent update on the per-step means, and
* the discretized log likelihood ratio between the uncontrolled and the
  control-induced path measures.

They exist for testing (the library's update law must agree with them on
matched conventions) and for users validating custom dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import ControllerError, _weighted_noise_average, compute_weights


def _sqrtm_psd(mat: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Symmetric square root (or inverse square root) of a PSD matrix."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    eigvals, eigvecs = np.linalg.eigh(mat)
    if np.any(eigvals <= 0):
        raise ValueError("matrix must be positive-definite")
    root = 1.0 / np.sqrt(eigvals) if inverse else np.sqrt(eigvals)
    return (eigvecs * root) @ eigvecs.T


@dataclass(frozen=True)
class ExpFamilyParams:
    """Per-step sampling-policy parameters: means plus the shared covariances."""

    mu: np.ndarray       # (N, m) step means
    sigma_d: np.ndarray  # (m, m)
    sigma_j: np.ndarray  # (m, m)
    nu: float
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "mu", np.atleast_2d(np.asarray(self.mu, dtype=float)))
        object.__setattr__(self, "sigma_d", np.atleast_2d(np.asarray(self.sigma_d, dtype=float)))
        object.__setattr__(self, "sigma_j", np.atleast_2d(np.asarray(self.sigma_j, dtype=float)))

    def step_covariance(self, jump_indicator: int) -> np.ndarray:
        return self.sigma_d + (self.sigma_j if jump_indicator else 0.0)

    def natural_param(self, step: int, jump_indicator: int) -> np.ndarray:
        """theta_j = (Sigma_D + I_j Sigma_J)^(-1/2) mu_j."""
        inv_root = _sqrtm_psd(self.step_covariance(jump_indicator), inverse=True)
        return inv_root @ self.mu[step]

    def sufficient_stat(self, u_j, jump_indicator: int) -> np.ndarray:
        """T(u_j) = (Sigma_D + I_j Sigma_J)^(-1/2) u_j."""
        inv_root = _sqrtm_psd(self.step_covariance(jump_indicator), inverse=True)
        return inv_root @ np.asarray(u_j, dtype=float)


def log_pdf(u_j, params: ExpFamilyParams, jump_indicator: int, step: int = 0) -> float:
    """Log density of one step's control under the jump-diffusion policy.

    The jump branch carries weight nu*dt and covariance Sigma_D + Sigma_J;
    the no-jump branch carries 1 - nu*dt and covariance Sigma_D.
    """
    u_j = np.asarray(u_j, dtype=float)
    cov = params.step_covariance(jump_indicator)
    m = cov.shape[0]
    diff = u_j - params.mu[step]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("step covariance must be positive-definite")
    quad = diff @ np.linalg.solve(cov, diff)
    log_gauss = -0.5 * (m * math.log(2.0 * math.pi) + logdet + quad)
    branch = params.nu * params.dt if jump_indicator else 1.0 - params.nu * params.dt
    return float(math.log(branch) + log_gauss)


def log_pdf_gradient(u_j, params: ExpFamilyParams, jump_indicator: int, step: int = 0) -> np.ndarray:
    """Gradient of log_pdf in the natural parameter: T(u_j) - theta_j."""
    return params.sufficient_stat(u_j, jump_indicator) - params.natural_param(step, jump_indicator)


def stochastic_opt_update(
    mu: np.ndarray,
    costs,
    eps_d: np.ndarray,
    jump_indicators: np.ndarray,
    eps_j: np.ndarray,
    alpha: float,
    lambda_: float,
) -> np.ndarray:
    """Gradient-descent update of the per-step means.

    mu <- mu + alpha * E[exp(-J/lambda) (eps_D + I eps_J)] / E[exp(-J/lambda)],
    estimated with the same softmax weights the controller uses.  Unlike the
    controller update this operates directly on control-space perturbations
    (no 1/sqrt(dt) factor).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("step size alpha must lie in [0, 1]")
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    weights = compute_weights(costs, lambda_)
    perturbations = np.asarray(eps_d, dtype=float) + (
        np.asarray(jump_indicators)[:, :, None] * np.asarray(eps_j, dtype=float)
    )
    return mu + alpha * _weighted_noise_average(weights, perturbations)


def girsanov_log_ratio_p_over_q(
    controls,
    noise,
    c: float,
    dt: float,
    model=None,
    states=None,
) -> float:
    """Discretized log dP/dQ along one sampled path.

    P is the uncontrolled measure, Q the control-induced measure sampled
    with variance scale c.  For each step,

        -( 1/2 u' calG u dt + u' calB eps sqrt(dt)
           + 1/2 (1 - 1/c) eps' bb eps )

    with calG = G'(BB')^+ G, calB = G'(BB')^+ B, bb = B'(BB')^+ B.  With
    noise through the control channels (the default, model=None) all three
    matrices are identity.  The constant c-dependent normalization term is
    omitted: it is shared by every path and cancels from importance weights.
    """
    u = np.atleast_2d(np.asarray(getattr(controls, "controls", controls), dtype=float))
    eps = np.atleast_2d(np.asarray(getattr(noise, "eps_combined", noise), dtype=float))
    n_steps = u.shape[0]
    sqrt_dt = math.sqrt(dt)
    total = 0.0
    for j in range(n_steps):
        if model is None:
            cal_g = cal_b = bb = None
        else:
            x_j = states[j]
            g = np.asarray(model.control_matrix(x_j, j * dt), dtype=float)
            b = np.asarray(model.diffusion_matrix(x_j, j * dt), dtype=float)
            sigma_pinv = np.linalg.pinv(b @ b.T, hermitian=True)
            cal_g = g.T @ sigma_pinv @ g
            cal_b = g.T @ sigma_pinv @ b
            bb = b.T @ sigma_pinv @ b
        uj, ej = u[j], eps[j]
        quad_u = uj @ uj if cal_g is None else uj @ cal_g @ uj
        cross = uj @ ej if cal_b is None else uj @ cal_b @ ej
        quad_e = ej @ ej if bb is None else ej @ bb @ ej
        total -= 0.5 * quad_u * dt + cross * sqrt_dt + 0.5 * (1.0 - 1.0 / c) * quad_e
    return float(total)
