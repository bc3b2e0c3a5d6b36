import numpy as np
import pytest

from jump_mppi import CostModel, DynamicsModel, MppiConfig


def zero_f(x, t=0.0):
    return np.zeros_like(np.asarray(x, dtype=float))


def unit_g(x, t=0.0):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1] + (x.shape[-1], x.shape[-1]))
    idx = np.arange(x.shape[-1])
    out[..., idx, idx] = 1.0
    return out


def scalar_integrator(control_limits=None) -> DynamicsModel:
    """dx = u dt + eps sqrt(dt): the simplest control-channel system."""
    return DynamicsModel(
        state_dim=1,
        control_dim=1,
        drift=zero_f,
        control_matrix=unit_g,
        diffusion_matrix=unit_g,
        jump_matrix=unit_g,
        control_limits=control_limits,
        noise_through_controls=True,
    )


def zero_q(x, t=0.0):
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape[:-1])


def zero_phi(x):
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape[:-1])


def quadratic_q(x, t=0.0):
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,...i->...", x, x)


def quadratic_phi(x):
    return quadratic_q(x)


def zero_cost_model(lambda_=1.0, c=1.0, m=1) -> CostModel:
    return CostModel(
        state_cost=zero_q,
        terminal_cost=zero_phi,
        control_cost_matrix=np.zeros((m, m)),
        lambda_=lambda_,
        c=c,
    )


def quadratic_cost_model(lambda_=1.0, c=1.0, m=1, r=1.0) -> CostModel:
    return CostModel(
        state_cost=quadratic_q,
        terminal_cost=quadratic_phi,
        control_cost_matrix=r * np.eye(m),
        lambda_=lambda_,
        c=c,
    )


@pytest.fixture
def small_config():
    return MppiConfig(
        lambda_=1.0,
        c=1.5,
        sigma_d=1.0,
        sigma_j=2.0,
        nu=0.25,
        dt=0.02,
        horizon_n=5,
        samples_m=8,
        u_init=0.0,
    )
