import numpy as np
import pytest

from jump_mppi import (
    MppiConfig,
    NoiseError,
    RngStream,
    make_noise_realization,
    sample_diffusion,
    sample_jump_events,
    sample_jump_marks,
    sample_noise_batch,
)


def test_same_stream_gives_identical_arrays():
    a = sample_diffusion(RngStream(42, 7), 100, np.eye(2), c=1.5)
    b = sample_diffusion(RngStream(42, 7), 100, np.eye(2), c=1.5)
    assert np.array_equal(a, b)


def test_distinct_streams_are_uncorrelated():
    n = 10_000
    a = sample_diffusion(RngStream(42, 0), n, np.eye(1))[:, 0]
    b = sample_diffusion(RngStream(42, 1), n, np.eye(1))[:, 0]
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 3.0 / np.sqrt(n)


def test_diffusion_sample_covariance_matches_target():
    # element-wise standard errors of a sample covariance of N(0, I_2)
    n = 100_000
    draws = sample_diffusion(RngStream(3, 5), n, np.eye(2), c=1.0)
    cov = np.cov(draws.T)
    se_diag = np.sqrt(2.0 / n)
    se_off = np.sqrt(1.0 / n)
    assert abs(cov[0, 0] - 1.0) < 3 * se_diag
    assert abs(cov[1, 1] - 1.0) < 3 * se_diag
    assert abs(cov[0, 1]) < 3 * se_off


def test_diffusion_scale_c_multiplies_variance():
    n = 100_000
    draws = sample_diffusion(RngStream(11, 0), n, np.eye(1), c=4.0)
    var = draws.var()
    assert abs(var - 4.0) < 3 * 4.0 * np.sqrt(2.0 / n)


def test_diffusion_rejects_non_pd_covariance():
    with pytest.raises(NoiseError, match="covariance factorization failed"):
        sample_diffusion(RngStream(0, 0), 10, np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        sample_diffusion(RngStream(0, 0), 10, np.eye(1), c=0.5)


def test_jump_events_zero_rate():
    assert np.all(sample_jump_events(RngStream(1, 2), 1000, 0.0, 0.02) == 0)


@pytest.mark.parametrize("nu,expected", [(0.25, 0.005), (0.5, 0.01)])
def test_jump_event_frequency_within_binomial_error(nu, expected):
    n = 1_000_000
    events = sample_jump_events(RngStream(5, int(nu * 100)), n, nu, 0.02)
    se = np.sqrt(expected * (1 - expected) / n)
    assert abs(events.mean() - expected) < 3 * se
    assert set(np.unique(events)) <= {0, 1}  # never more than one jump per step


def test_jump_events_enforce_zero_one_law_precondition():
    with pytest.raises(ValueError, match="zero-one jump law"):
        sample_jump_events(RngStream(0, 0), 10, nu=10.0, dt=0.02)


def test_jump_marks_all_zero_without_events():
    marks = sample_jump_marks(RngStream(9, 1), np.zeros(50, dtype=int), np.eye(2))
    assert np.array_equal(marks, np.zeros((50, 2)))


def test_jump_marks_variance():
    n = 100_000
    marks = sample_jump_marks(RngStream(9, 2), np.ones(n, dtype=int), 4.0 * np.eye(2))
    var = marks.var(axis=0)
    se = 4.0 * np.sqrt(2.0 / n)
    assert np.all(np.abs(var - 4.0) < 3 * se)


def test_jump_marks_mask_follows_indicators():
    ind = np.array([0, 1, 1, 0, 1, 0])
    marks = sample_jump_marks(RngStream(9, 3), ind, np.eye(1))
    assert np.all(marks[ind == 0] == 0.0)
    assert np.all(marks[ind == 1] != 0.0)
    with pytest.raises(ValueError):
        sample_jump_marks(RngStream(9, 3), np.zeros((2, 2)), np.eye(1))


def _cfg(**kw):
    base = dict(
        lambda_=1.0, c=1.5, sigma_d=1.0, sigma_j=9.0, nu=0.25, dt=0.02,
        horizon_n=40, samples_m=4, u_init=0.0,
    )
    base.update(kw)
    return MppiConfig(**base)


def test_realization_disabled_mode_is_pure_diffusion():
    nr = make_noise_realization(RngStream(21, 4), _cfg(jump_sampling_enabled=False))
    assert np.array_equal(nr.eps_combined, nr.eps_d)
    assert np.all(nr.jump_indicator == 0)
    assert np.all(nr.eps_j == 0.0)


def test_realization_zero_rate_equals_disabled_mode():
    on = make_noise_realization(RngStream(21, 4), _cfg(nu=0.0, jump_sampling_enabled=True))
    off = make_noise_realization(RngStream(21, 4), _cfg(nu=0.0, jump_sampling_enabled=False))
    assert np.array_equal(on.eps_d, off.eps_d)
    assert np.array_equal(on.eps_combined, off.eps_combined)
    assert np.array_equal(on.jump_indicator, off.jump_indicator)


def test_realization_jump_rows_appear_at_the_configured_rate():
    # Table-1 style parameters: nu = 0.25, Sigma_J = 3^2 * I.
    cfg = _cfg(sigma_j=9.0, horizon_n=200)
    total_steps = 0
    total_jumps = 0
    for sid in range(200):
        nr = make_noise_realization(RngStream(77, sid), cfg)
        assert np.array_equal(nr.eps_combined, nr.eps_d + nr.eps_j)
        nonzero_rows = np.any(nr.eps_j != 0.0, axis=1)
        assert np.array_equal(nonzero_rows, nr.jump_indicator == 1)
        total_steps += len(nr)
        total_jumps += int(nr.jump_indicator.sum())
    p = cfg.nu * cfg.dt
    se = np.sqrt(p * (1 - p) / total_steps)
    assert abs(total_jumps / total_steps - p) < 3 * se


def test_batch_sampler_is_deterministic_and_consistent():
    cfg = _cfg(samples_m=16)
    a = sample_noise_batch(RngStream(5, 3), cfg, cfg.samples_m)
    b = sample_noise_batch(RngStream(5, 3), cfg, cfg.samples_m)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    eps_d, ind, eps_j, eps_c = a
    assert eps_d.shape == (16, cfg.horizon_n, 1)
    assert np.array_equal(eps_c, eps_d + eps_j)
    assert np.all(eps_j[ind == 0] == 0.0)


def test_batch_sampler_old_mode_shares_the_diffusion_block():
    cfg_new = _cfg(samples_m=8)
    cfg_old = _cfg(samples_m=8, jump_sampling_enabled=False)
    eps_d_new = sample_noise_batch(RngStream(6, 1), cfg_new, 8)[0]
    eps_d_old = sample_noise_batch(RngStream(6, 1), cfg_old, 8)[0]
    assert np.array_equal(eps_d_new, eps_d_old)
