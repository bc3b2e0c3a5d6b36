"""Validating the sampling machinery against the theory oracles.

Three checks on random inputs, the same ones the test suite runs at scale:

1. the per-step control density integrates to one over both jump branches,
2. its natural-parameter gradient matches central finite differences,
3. the modified rollout cost equals the plain state cost minus lambda times
   the discretized measure-change log-ratio.
"""

import math

import numpy as np

from jump_mppi import (
    ExpFamilyParams,
    girsanov_log_ratio_p_over_q,
    log_pdf,
    log_pdf_gradient,
    trajectory_cost,
)
from jump_mppi.costs import CostModel
from jump_mppi.theory import _sqrtm_psd
from jump_mppi.types import NoiseRealization

rng = np.random.default_rng(0)

# 1. normalization by quadrature
params = ExpFamilyParams(np.array([[0.3]]), np.array([[1.2]]), np.array([[2.5]]), 0.25, 0.02)
grid = np.linspace(-25, 25, 20001)
mass = sum(
    np.trapezoid(np.array([math.exp(log_pdf(np.array([u]), params, ind)) for u in grid]), grid)
    for ind in (0, 1)
)
print(f"density mass over both branches: {mass:.6f} (expect 1)")

# 2. gradient vs finite differences at a random point
u = rng.normal(size=1)
ind = 1
grad = log_pdf_gradient(u, params, ind)
theta = params.natural_param(0, ind)
root = _sqrtm_psd(params.step_covariance(ind))
h = 1e-6
fd = (
    log_pdf(u, ExpFamilyParams((root @ (theta + h)).reshape(1, 1),
                               params.sigma_d, params.sigma_j, 0.25, 0.02), ind)
    - log_pdf(u, ExpFamilyParams((root @ (theta - h)).reshape(1, 1),
                                 params.sigma_d, params.sigma_j, 0.25, 0.02), ind)
) / (2 * h)
print(f"gradient: analytic {grad[0]:+.8f} finite-difference {fd:+.8f}")

# 3. cost identity on a random path
def q(x, t=0.0):
    return np.asarray(x, dtype=float)[..., 0] ** 2


n, dt, lam, c = 6, 0.05, 2.0, 1.8
states = rng.normal(size=(n + 1, 1))
controls = rng.normal(size=(n, 1))
ind_vec = rng.integers(0, 2, size=n)
noise = NoiseRealization.from_components(
    rng.normal(size=(n, 1)), ind_vec, rng.normal(size=(n, 1)) * ind_vec[:, None]
)
cm = CostModel(q, lambda x: q(x), lam * np.eye(1), lambda_=lam, c=c)
cm_plain = CostModel(q, lambda x: q(x), np.zeros((1, 1)), lambda_=lam, c=1.0)
zero = NoiseRealization.from_components(np.zeros((n, 1)), np.zeros(n, dtype=int), np.zeros((n, 1)))

s_tilde = trajectory_cost(states, controls, noise, cm, dt)
s_plain = trajectory_cost(states, np.zeros((n, 1)), zero, cm_plain, dt)
log_ratio = girsanov_log_ratio_p_over_q(controls, noise, c=c, dt=dt)
print(f"S~ = {s_tilde:.10f}")
print(f"S - lambda*log(dP/dQ) = {s_plain - lam * log_ratio:.10f}")
