import numpy as np
import pytest

from jump_mppi import (
    CartpoleStateCost,
    CostModel,
    QuadrotorStateCost,
    ScaledTerminalCost,
    control_cost_matrix_from_dynamics,
    modified_running_cost,
    trajectory_cost,
)
from jump_mppi.dynamics import DynamicsModel
from jump_mppi.types import NoiseRealization

from conftest import scalar_integrator, zero_f


def constant_matrix_model(g, b):
    g = np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    return DynamicsModel(
        state_dim=g.shape[0],
        control_dim=g.shape[1],
        drift=zero_f,
        control_matrix=lambda x, t=0.0: g,
        diffusion_matrix=lambda x, t=0.0: b,
        jump_matrix=lambda x, t=0.0: b,
    )


def test_control_cost_identity_dynamics():
    model = constant_matrix_model(np.eye(2), np.eye(2))
    r = control_cost_matrix_from_dynamics(model, np.zeros(2), 0.0, lambda_=1.0)
    assert np.allclose(r, np.eye(2), atol=1e-12)


def test_control_cost_control_channel_noise_is_lambda_identity():
    rng = np.random.default_rng(4)
    g = rng.normal(size=(2, 2)) + 3 * np.eye(2)  # square, well-conditioned
    model = constant_matrix_model(g, g)
    r = control_cost_matrix_from_dynamics(model, np.zeros(2), 0.0, lambda_=2.5)
    assert np.allclose(r, 2.5 * np.eye(2), atol=1e-9)


def test_control_cost_matches_independent_linear_algebra():
    scipy_linalg = pytest.importorskip("scipy.linalg")
    rng = np.random.default_rng(9)
    g = rng.normal(size=(3, 2))
    b = g @ np.diag([1.0, 2.0])
    model = constant_matrix_model(g, b)
    r = control_cost_matrix_from_dynamics(model, np.zeros(3), 0.0, lambda_=1.7)
    expected = 1.7 * g.T @ scipy_linalg.pinv(b @ b.T) @ g
    assert np.allclose(r, expected, rtol=1e-9)


def test_control_cost_symmetric_psd_at_random_states():
    from jump_mppi import cartpole_dynamics, quadrotor_dynamics

    rng = np.random.default_rng(5)
    for model in (cartpole_dynamics(), quadrotor_dynamics()):
        for _ in range(10):
            x = rng.normal(size=model.state_dim)
            r = control_cost_matrix_from_dynamics(model, x, 0.0, lambda_=1.0)
            assert np.max(np.abs(r - r.T)) < 1e-10
            assert np.all(np.linalg.eigvalsh((r + r.T) / 2) > -1e-10)


def test_modified_cost_reduces_to_q_when_uncontrolled_and_c_one():
    val = modified_running_cost(
        q_val=3.5, u=np.zeros(2), eps_combined_row=np.array([1.0, -2.0]),
        r_matrix=np.eye(2), lambda_=2.0, c=1.0, dt=0.05,
    )
    assert val == pytest.approx(3.5)


def test_modified_cost_scalar_hand_value():
    # q=1, u=1, R=2, lambda=1, c=1, eps=0.5, dt=0.01:
    # 1 + 0.5*1*2*1 + 1*1*0.5/0.1 = 7.0
    val = modified_running_cost(
        q_val=1.0, u=np.array([1.0]), eps_combined_row=np.array([0.5]),
        r_matrix=np.array([[2.0]]), lambda_=1.0, c=1.0, dt=0.01,
    )
    assert val == pytest.approx(7.0)


def test_modified_cost_variance_correction_hand_value():
    # c=2, u=0, eps=1, dt=1, lambda=2: 0.5*2*(1-1/2)*1 = 0.5
    val = modified_running_cost(
        q_val=0.0, u=np.zeros(1), eps_combined_row=np.array([1.0]),
        r_matrix=np.eye(1), lambda_=2.0, c=2.0, dt=1.0,
    )
    assert val == pytest.approx(0.5)


def test_modified_cost_only_control_terms_when_eps_zero():
    u = np.array([2.0, -1.0])
    r = np.array([[2.0, 0.5], [0.5, 1.0]])
    val = modified_running_cost(
        q_val=1.0, u=u, eps_combined_row=np.zeros(2),
        r_matrix=r, lambda_=3.0, c=4.0, dt=0.1,
    )
    assert val == pytest.approx(1.0 + 0.5 * u @ r @ u)


def test_modified_cost_general_correction_matrices():
    rng = np.random.default_rng(1)
    u = rng.normal(size=3)
    eps = rng.normal(size=3)
    cal_b = rng.normal(size=(3, 3))
    bb = rng.normal(size=(3, 3))
    bb = bb @ bb.T
    val = modified_running_cost(
        q_val=0.3, u=u, eps_combined_row=eps, r_matrix=np.eye(3),
        lambda_=1.4, c=1.6, dt=0.04, cal_b=cal_b, bb_term=bb,
    )
    expected = (
        0.3
        + 0.5 * u @ u
        + 1.4 * u @ (cal_b @ eps) / np.sqrt(0.04)
        + 0.5 * 1.4 * (1 - 1 / 1.6) * eps @ bb @ eps / 0.04
    )
    assert val == pytest.approx(expected, rel=1e-12)


def test_modified_cost_broadcasts_over_batches():
    rng = np.random.default_rng(2)
    u = rng.normal(size=2)
    eps = rng.normal(size=(7, 2))
    r = np.eye(2)
    batched = modified_running_cost(0.0, u, eps, r, 1.0, 1.5, 0.02)
    single = [modified_running_cost(0.0, u, eps[i], r, 1.0, 1.5, 0.02) for i in range(7)]
    assert np.allclose(batched, single, rtol=1e-15)


def zero_noise(n, m):
    return NoiseRealization.from_components(
        np.zeros((n, m)), np.zeros(n, dtype=int), np.zeros((n, m))
    )


def test_trajectory_cost_terminal_only_at_target():
    target = np.array([1.0, 2.0])

    def q(x, t=0.0):
        return np.zeros(np.asarray(x).shape[:-1])

    def phi(x):
        d = np.asarray(x) - target
        return np.einsum("...i,...i->...", d, d)

    cm = CostModel(q, phi, np.eye(2), 1.0, 1.0)
    states = np.vstack([np.zeros((3, 2)), target[None, :]])
    val = trajectory_cost(states, np.zeros((3, 2)), zero_noise(3, 2), cm, 0.1)
    assert val == 0.0


def test_trajectory_cost_constant_q_is_a_riemann_sum():
    def one(x, t=0.0):
        return np.ones(np.asarray(x).shape[:-1])

    def phi(x):
        return np.zeros(np.asarray(x).shape[:-1])

    cm = CostModel(one, phi, np.eye(1), 1.0, 1.0)
    val = trajectory_cost(
        np.zeros((11, 1)), np.zeros((10, 1)), zero_noise(10, 1), cm, 0.1
    )
    assert val == pytest.approx(1.0)


def test_trajectory_cost_two_step_scalar_oracle():
    import math

    dt = 0.5
    states = np.array([[0.2], [0.7], [-0.1]])
    controls = np.array([[1.0], [-2.0]])
    eps_d = np.array([[0.4], [0.9]])
    ind = np.array([1, 0])
    eps_j = np.array([[0.6], [0.0]])
    noise = NoiseRealization.from_components(eps_d, ind, eps_j)

    def q(x, t=0.0):
        return np.asarray(x)[..., 0] ** 2

    def phi(x):
        return 3.0 * np.asarray(x)[..., 0] ** 2

    cm = CostModel(q, phi, 2.0 * np.eye(1), lambda_=1.5, c=2.0)
    val = trajectory_cost(states, controls, noise, cm, dt)

    total = 0.0
    for j in range(2):
        eps = eps_d[j, 0] + eps_j[j, 0]
        q_t = (
            states[j, 0] ** 2
            + 0.5 * controls[j, 0] * 2.0 * controls[j, 0]
            + 1.5 * controls[j, 0] * eps / math.sqrt(dt)
            + 0.5 * 1.5 * (1 - 1 / 2.0) * eps * eps / dt
        )
        total += q_t * dt
    total += 3.0 * states[2, 0] ** 2
    assert val == pytest.approx(total, rel=1e-14)


def test_trajectory_cost_affine_in_q_values():
    rng = np.random.default_rng(7)
    states = rng.normal(size=(6, 1))
    controls = rng.normal(size=(5, 1))
    noise = NoiseRealization.from_components(
        rng.normal(size=(5, 1)), np.zeros(5, dtype=int), np.zeros((5, 1))
    )

    def make(scale):
        return CostModel(
            lambda x, t=0.0: scale * np.asarray(x)[..., 0] ** 2,
            lambda x: scale * np.asarray(x)[..., 0] ** 2,
            np.zeros((1, 1)), lambda_=1.0, c=1.0,
        )

    v1 = trajectory_cost(states, np.zeros((5, 1)), noise, make(1.0), 0.1)
    v2 = trajectory_cost(states, np.zeros((5, 1)), noise, make(2.0), 0.1)
    assert v2 == pytest.approx(2.0 * v1, rel=1e-12)


def test_trajectory_cost_propagates_non_finite_as_inf():
    def q(x, t=0.0):
        return np.full(np.asarray(x).shape[:-1], np.inf)

    cm = CostModel(q, lambda x: 0.0, np.eye(1), 1.0, 1.0)
    val = trajectory_cost(np.zeros((3, 1)), np.zeros((2, 1)), zero_noise(2, 1), cm, 0.1)
    assert val == float("inf")


def test_experiment_cost_shapes():
    q_cp = CartpoleStateCost()
    upright = np.array([0.0, 0.0, np.pi, 0.0])
    assert q_cp(upright) == pytest.approx(0.0, abs=1e-25)
    assert q_cp(np.zeros(4)) == pytest.approx(200.0)  # hanging: w_angle * (1+1)^2

    q_quad = QuadrotorStateCost(target=(4.0, 4.0, 2.0))
    at_target = np.zeros(12)
    at_target[0:3] = (4.0, 4.0, 2.0)
    assert q_quad(at_target) == pytest.approx(0.0)

    phi = ScaledTerminalCost(q_cp, 10.0)
    assert phi(np.zeros(4)) == pytest.approx(2000.0)
