import math

import numpy as np
import pytest

from jump_mppi import (
    CartpoleModel,
    ControlSequence,
    QuadrotorModel,
    StateDivergedError,
    cartpole_dynamics,
    quadrotor_dynamics,
    rollout,
    step,
)
from jump_mppi.types import NoiseRealization

from conftest import scalar_integrator, zero_cost_model, quadratic_cost_model


def zero_noise(n, m):
    return NoiseRealization.from_components(
        np.zeros((n, m)), np.zeros(n, dtype=int), np.zeros((n, m))
    )


def test_step_fixed_point_with_no_forcing():
    model = scalar_integrator()
    x = np.array([1.3])
    out = step(model, x, np.zeros(1), np.zeros(1), np.zeros(1), False, 0.02)
    assert np.array_equal(out, x)


def test_step_upright_cartpole_is_an_equilibrium():
    model = cartpole_dynamics()
    x = np.array([0.0, 0.0, np.pi, 0.0])
    out = step(model, x, np.zeros(1), np.zeros(1), np.zeros(1), False, 0.02)
    assert np.allclose(out, x, atol=1e-14)


def test_step_jump_term_is_linear():
    model = cartpole_dynamics()
    rng = np.random.default_rng(0)
    x = rng.normal(size=4)
    eps_j = rng.normal(size=1)
    with_jump = step(model, x, np.array([0.3]), np.zeros(1), eps_j, True, 0.02)
    without = step(model, x, np.array([0.3]), np.zeros(1), eps_j, False, 0.02)
    h = model.jump_matrix(x, 0.0)
    expected = (h @ eps_j) * math.sqrt(0.02)
    assert np.allclose(with_jump - without, expected, rtol=0, atol=1e-15)


def test_step_clamps_control_to_limits():
    model = scalar_integrator(control_limits=(np.array([-1.0]), np.array([1.0])))
    out = step(model, np.zeros(1), np.array([5.0]), np.zeros(1), np.zeros(1), False, 1.0)
    assert out[0] == pytest.approx(1.0)


def test_step_raises_on_divergence():
    def bad_drift(x, t=0.0):
        return np.full_like(np.asarray(x, dtype=float), np.nan)

    model = scalar_integrator()
    model = type(model)(
        state_dim=1, control_dim=1, drift=bad_drift,
        control_matrix=model.control_matrix,
        diffusion_matrix=model.diffusion_matrix,
        jump_matrix=model.jump_matrix,
        noise_through_controls=True,
    )
    with pytest.raises(StateDivergedError, match="step 3"):
        step(model, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), False, 0.02, step_index=3)


def test_cartpole_drift_matches_lagrangian_derivation():
    """Independent oracle: derive the equations of motion from the Lagrangian
    with sympy and compare both f(x) and G(x) on random states."""
    sympy = pytest.importorskip("sympy")

    mc_v, mp_v, l_v, g_v = 1.0, 0.1, 0.5, 9.81
    t = sympy.Symbol("t")
    force = sympy.Symbol("F")
    x_f = sympy.Function("x")(t)
    th_f = sympy.Function("th")(t)
    mc, mp, l, g = sympy.symbols("mc mp l g", positive=True)

    # point mass at (x + l sin th, -l cos th); th = 0 hangs down
    px = x_f + l * sympy.sin(th_f)
    py = -l * sympy.cos(th_f)
    ke = (
        mc * x_f.diff(t) ** 2 / 2
        + mp * (px.diff(t) ** 2 + py.diff(t) ** 2) / 2
    )
    pe = mp * g * py
    lag = ke - pe
    eq_x = sympy.Eq(lag.diff(x_f.diff(t)).diff(t) - lag.diff(x_f), force)
    eq_th = sympy.Eq(lag.diff(th_f.diff(t)).diff(t) - lag.diff(th_f), 0)
    xdd, thdd = sympy.symbols("xdd thdd")
    subs = {x_f.diff(t, 2): xdd, th_f.diff(t, 2): thdd}
    sol = sympy.solve([eq_x.subs(subs), eq_th.subs(subs)], [xdd, thdd], dict=True)[0]

    xd_s, thv_s, thd_s = sympy.symbols("xd thv thd")
    vel_subs = {x_f.diff(t): xd_s, th_f.diff(t): thd_s, th_f: thv_s}
    param_subs = {mc: mc_v, mp: mp_v, l: l_v, g: g_v}
    f_xdd = sympy.lambdify((thv_s, thd_s, force), sol[xdd].subs(vel_subs).subs(param_subs))
    f_thdd = sympy.lambdify((thv_s, thd_s, force), sol[thdd].subs(vel_subs).subs(param_subs))

    model = cartpole_dynamics(CartpoleModel(mc_v, mp_v, l_v, g_v))
    rng = np.random.default_rng(12)
    for _ in range(25):
        state = rng.normal(scale=[1.0, 2.0, np.pi, 3.0], size=4)
        u = rng.normal(scale=10.0)
        f = model.drift(state, 0.0)
        g_mat = model.control_matrix(state, 0.0)
        accel = f + g_mat @ np.array([u])
        assert accel[0] == pytest.approx(state[1])
        assert accel[2] == pytest.approx(state[3])
        assert accel[1] == pytest.approx(float(f_xdd(state[2], state[3], u)), rel=1e-10)
        assert accel[3] == pytest.approx(float(f_thdd(state[2], state[3], u)), rel=1e-10)


def test_cartpole_force_enters_velocity_rows_only():
    model = cartpole_dynamics()
    g = model.control_matrix(np.array([0.5, 0.1, 1.0, -0.2]), 0.0)
    assert g[0, 0] == 0.0 and g[2, 0] == 0.0
    assert g[1, 0] != 0.0 and g[3, 0] != 0.0


def test_control_channel_noise_structure():
    rng = np.random.default_rng(3)
    for model in (cartpole_dynamics(), quadrotor_dynamics()):
        x = rng.normal(size=model.state_dim)
        g = model.control_matrix(x, 0.0)
        assert np.array_equal(model.diffusion_matrix(x, 0.0), g)
        assert np.array_equal(model.jump_matrix(x, 0.0), g)


def test_quadrotor_hover_equilibrium():
    params = QuadrotorModel()
    model = quadrotor_dynamics(params)
    x = np.zeros(12)
    u = params.hover_control()
    for k in range(50):
        x = step(model, x, u, np.zeros(4), np.zeros(4), False, 0.02, t=k * 0.02)
    assert np.allclose(x, np.zeros(12), atol=1e-12)


def test_model_parameter_validation():
    with pytest.raises(ValueError):
        CartpoleModel(cart_mass=-1.0)
    with pytest.raises(ValueError):
        QuadrotorModel(inertia_diag=(0.01, -0.01, 0.02))


def test_rollout_zero_everything_gives_zero_cost():
    model = scalar_integrator()
    res = rollout(
        model, np.zeros(1), ControlSequence(np.zeros((4, 1)), 0.1),
        zero_noise(4, 1), zero_cost_model(),
    )
    assert res.cost == 0.0
    assert np.array_equal(res.trajectory.states, np.zeros((5, 1)))
    assert res.diverged_at is None


def test_rollout_cost_matches_independent_scalar_script():
    """Hand-rolled evaluation of the modified-cost recursion on a 3-step
    cartpole rollout with a fixed noise table, using plain python floats."""
    model = cartpole_dynamics()
    cart = CartpoleModel()
    dt = 0.02
    controls = np.array([[2.0], [-1.0], [0.5]])
    eps_d = np.array([[0.3], [-0.6], [0.1]])
    ind = np.array([0, 1, 0])
    eps_j = np.array([[0.0], [1.8], [0.0]])
    noise = NoiseRealization.from_components(eps_d, ind, eps_j)
    cm = quadratic_cost_model(lambda_=2.0, c=1.5, r=0.7)

    res = rollout(
        model, np.array([0.1, 0.0, 0.4, -0.2]), ControlSequence(controls, dt), noise, cm
    )

    # independent accumulation (math module only)
    def q(s):
        return s[0] ** 2 + s[1] ** 2 + s[2] ** 2 + s[3] ** 2

    mc, mp, l, g = cart.cart_mass, cart.pole_mass, cart.pole_half_length, cart.gravity
    state = [0.1, 0.0, 0.4, -0.2]
    total = 0.0
    for j in range(3):
        u = controls[j, 0]
        eps = eps_d[j, 0] + eps_j[j, 0]
        q_tilde = (
            q(state)
            + 0.5 * 0.7 * u * u
            + 2.0 * u * eps / math.sqrt(dt)
            + 0.5 * 2.0 * (1 - 1 / 1.5) * eps * eps / dt
        )
        total += q_tilde * dt
        s, co = math.sin(state[2]), math.cos(state[2])
        denom = mc + mp * s * s
        xdd = (u + mp * s * (g * co + l * state[3] ** 2)) / denom
        thdd = -(xdd * co + g * s) / l
        force_noise = eps_d[j, 0] * math.sqrt(dt) + ind[j] * eps_j[j, 0] * math.sqrt(dt)
        state = [
            state[0] + state[1] * dt,
            state[1] + xdd * dt + force_noise / denom,
            state[2] + state[3] * dt,
            state[3] + thdd * dt - co / (l * denom) * force_noise,
        ]
    total += q(state)  # terminal phi = q for the quadratic cost model
    assert res.cost == pytest.approx(total, rel=1e-12)
    assert np.allclose(res.trajectory.states[-1], state, rtol=1e-12)


def test_rollout_divergence_sets_infinite_cost():
    def exploding(x, t=0.0):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return np.full_like(x, 1e160) * np.maximum(np.abs(x), 1.0)

    model = scalar_integrator()
    model = type(model)(
        state_dim=1, control_dim=1, drift=exploding,
        control_matrix=model.control_matrix,
        diffusion_matrix=model.diffusion_matrix,
        jump_matrix=model.jump_matrix,
        noise_through_controls=True,
    )
    res = rollout(
        model, np.ones(1), ControlSequence(np.zeros((5, 1)), 0.5),
        zero_noise(5, 1), zero_cost_model(),
    )
    assert res.cost == float("inf")
    assert res.diverged_at is not None


def test_rollout_is_deterministic():
    model = cartpole_dynamics()
    rng = np.random.default_rng(8)
    controls = ControlSequence(rng.normal(size=(6, 1)), 0.02)
    noise = NoiseRealization.from_components(
        rng.normal(size=(6, 1)), np.array([1, 0, 0, 1, 0, 0]),
        rng.normal(size=(6, 1)) * np.array([1, 0, 0, 1, 0, 0])[:, None],
    )
    cm = quadratic_cost_model(m=1)
    x0 = np.array([0.0, 0.1, 3.0, 0.0])
    a = rollout(model, x0, controls, noise, cm)
    b = rollout(model, x0, controls, noise, cm)
    assert a.cost == b.cost
    assert np.array_equal(a.trajectory.states, b.trajectory.states)


def test_rollout_trajectory_continuous_in_jump_amplitude():
    model = cartpole_dynamics()
    ind = np.array([0, 1, 0, 0])
    cm = zero_cost_model()
    x0 = np.array([0.0, 0.0, 0.3, 0.0])
    controls = ControlSequence(np.zeros((4, 1)), 0.02)
    amps = np.linspace(0.0, 2.0, 9)
    finals = []
    for a in amps:
        noise = NoiseRealization.from_components(
            np.zeros((4, 1)), ind, a * ind[:, None].astype(float)
        )
        finals.append(rollout(model, x0, controls, noise, cm).trajectory.states[-1])
    finals = np.array(finals)
    diffs = np.linalg.norm(np.diff(finals, axis=0), axis=1)
    assert np.all(diffs < 0.2)  # no hidden thresholding between jump amplitudes


@pytest.mark.xfail(
    reason="explicit Euler on an oscillator multiplies energy by (1 + w^2 dt^2) "
    "per step; at w ~ 4.6 rad/s and dt = 0.02 that is ~50% over 1 s, so the "
    "2% drift bound is unattainable with the mandated integrator",
    strict=True,
)
def test_cartpole_energy_drift_small_amplitude():
    cart = CartpoleModel()
    model = cartpole_dynamics(cart)
    x = np.array([0.0, 0.0, 0.05, 0.0])
    e0 = float(cart.energy(x))
    for k in range(50):  # 1 s at dt = 0.02
        x = step(model, x, np.zeros(1), np.zeros(1), np.zeros(1), False, 0.02)
    drift = abs(float(cart.energy(x)) - e0)
    assert drift < 0.02 * e0
