"""Anatomy of one control update.

Builds a tiny scalar system, runs a single sampling-and-update pass, and
shows the pieces the update is made of: rollout costs, softmax weights,
effective sample size, and the weighted perturbation average -- then
verifies the alternative gradient-descent update produces the same step on
shared inputs (the two derivations agree at matched conventions).
"""

import math

import numpy as np

from jump_mppi import (
    ControlSequence,
    MppiConfig,
    compute_weights,
    mppi_iteration,
    stochastic_opt_update,
)
from jump_mppi.controller import ControllerState
from jump_mppi.costs import CostModel
from jump_mppi.dynamics import DynamicsModel


def zero_f(x, t=0.0):
    return np.zeros_like(np.asarray(x, dtype=float))


def unit_g(x, t=0.0):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (1, 1))
    out[..., 0, 0] = 1.0
    return out


model = DynamicsModel(
    state_dim=1, control_dim=1, drift=zero_f, control_matrix=unit_g,
    diffusion_matrix=unit_g, jump_matrix=unit_g, noise_through_controls=True,
)


def q(x, t=0.0):
    return np.asarray(x, dtype=float)[..., 0] ** 2


cost_model = CostModel(q, lambda x: q(x), np.eye(1), lambda_=1.0, c=1.0)

dt = 0.25  # sqrt(dt) = 0.5, so rescaling between conventions is exact
cfg = MppiConfig(
    lambda_=1.0, c=1.0, sigma_d=1.0, sigma_j=4.0, nu=0.3, dt=dt,
    horizon_n=4, samples_m=8, u_init=0.0,
)
ctrl = ControllerState(ControlSequence(np.zeros((4, 1)), dt), 0, cfg)

seq, diag, rollouts = mppi_iteration(
    ctrl, model, cost_model, np.array([1.0]), master_seed=123, return_rollouts=True
)

costs = np.array([r.cost for r in rollouts])
print("rollout costs: ", np.round(costs, 2))
print("weights:       ", np.round(diag.weights, 3))
print("ESS:           ", round(diag.effective_sample_size, 2), "of", cfg.samples_m)
print("new controls:  ", np.round(seq.controls[:, 0], 3))
assert np.allclose(diag.weights, compute_weights(costs, cfg.lambda_))

# the stochastic-optimization update on the same noise tables
eps_d = np.stack([r.noise.eps_d for r in rollouts])
ind = np.stack([r.noise.jump_indicator for r in rollouts])
eps_j = np.stack([r.noise.eps_j for r in rollouts])
mu_next = stochastic_opt_update(np.zeros((4, 1)), costs, eps_d, ind, eps_j, 1.0, cfg.lambda_)
assert np.array_equal(seq.controls * math.sqrt(dt), mu_next)
print("gradient-descent update (rescaled by sqrt(dt)) is bit-identical:", True)
