"""Shared value types: configuration, control/state trajectories, sampled noise.

All types are immutable after construction (arrays are marked read-only), so
they can be shared freely between concurrent rollout workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Validity guard for the zero-one jump law: at most one jump per step is a
# good approximation only while the per-step jump probability nu*dt stays
# small.  At 0.1 the neglected two-jump probability is below 0.5%.
ZERO_ONE_LAW_LIMIT = 0.1

_PD_EIG_TOL = 0.0  # eigenvalues must be strictly positive
_SYM_TOL = 1e-12


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration: " + "; ".join(self.violations))


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def as_covariance(value, dim: int) -> np.ndarray:
    """Expand a scalar variance to var * I(dim); pass matrices through."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(dim)
    if arr.shape != (dim, dim):
        raise ValueError(f"covariance must be scalar or {dim}x{dim}, got shape {arr.shape}")
    return arr


def _is_spd(mat: np.ndarray) -> bool:
    if not np.allclose(mat, mat.T, atol=_SYM_TOL, rtol=0.0):
        return False
    try:
        eigs = np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(eigs > _PD_EIG_TOL))


@dataclass(frozen=True)
class MppiConfig:
    """All scalar knobs of the controller and its sampling distribution.

    sigma_d / sigma_j accept either a full m x m covariance or a scalar
    variance (expanded to var * I).  `jump_sampling_enabled` switches between
    the jump-aware sampler ("new" controller) and the diffusion-only sampler
    ("old" controller); the plant noise is not affected by this flag.
    """

    lambda_: float
    c: float
    sigma_d: np.ndarray
    sigma_j: np.ndarray
    nu: float
    dt: float
    horizon_n: int
    samples_m: int
    u_init: np.ndarray
    jump_sampling_enabled: bool = True

    def __post_init__(self):
        u_init = np.atleast_1d(np.asarray(self.u_init, dtype=float))
        m = u_init.shape[0]
        object.__setattr__(self, "u_init", _freeze(u_init))
        object.__setattr__(self, "sigma_d", _freeze(as_covariance(self.sigma_d, m)))
        object.__setattr__(self, "sigma_j", _freeze(as_covariance(self.sigma_j, m)))

    @property
    def control_dim(self) -> int:
        return self.u_init.shape[0]


def config_violations(cfg: MppiConfig) -> list:
    """Return the list of violated invariants (empty when the config is valid)."""
    bad = []
    if not cfg.lambda_ > 0:
        bad.append("lambda must be positive")
    if not cfg.c >= 1.0:
        bad.append("c must be at least 1")
    if not cfg.dt > 0:
        bad.append("dt must be positive")
    if not cfg.nu >= 0:
        bad.append("nu must be nonnegative")
    elif not cfg.nu * cfg.dt < ZERO_ONE_LAW_LIMIT:
        bad.append(
            f"zero-one jump law violated (nu*dt = {cfg.nu * cfg.dt:g} >= {ZERO_ONE_LAW_LIMIT})"
        )
    if cfg.horizon_n < 1:
        bad.append("horizon_n must be a positive integer")
    if cfg.samples_m < 1:
        bad.append("samples_m must be a positive integer")
    if not _is_spd(cfg.sigma_d):
        bad.append("sigma_d not symmetric positive-definite")
    if not _is_spd(cfg.sigma_j):
        bad.append("sigma_j not symmetric positive-definite")
    return bad


def validate_config(cfg: MppiConfig) -> MppiConfig:
    """Return the config unchanged if valid, else raise ConfigError listing violations."""
    bad = config_violations(cfg)
    if bad:
        raise ConfigError(bad)
    return cfg


@dataclass(frozen=True)
class ControlSequence:
    """Piecewise-constant control sequence over the horizon, one row per step."""

    controls: np.ndarray  # (N, m)
    dt: float

    def __post_init__(self):
        arr = np.asarray(self.controls, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"controls must be 2-D (N, m), got shape {arr.shape}")
        object.__setattr__(self, "controls", _freeze(arr))

    def __len__(self) -> int:
        return self.controls.shape[0]


@dataclass(frozen=True)
class StateTrajectory:
    """State history of one rollout; row 0 is the initial state."""

    states: np.ndarray  # (N+1, n)
    dt: float

    def __post_init__(self):
        arr = np.asarray(self.states, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"states must be 2-D (N+1, n), got shape {arr.shape}")
        object.__setattr__(self, "states", _freeze(arr))

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True)
class NoiseRealization:
    """Per-rollout sampled noise: diffusion draws, jump indicators and marks.

    eps_j rows are exactly zero wherever jump_indicator is 0, and
    eps_combined = eps_d + eps_j is the perturbation used by the control
    update and the modified running cost.
    """

    eps_d: np.ndarray           # (N, m), sampled with covariance c * Sigma_D
    jump_indicator: np.ndarray  # (N,), entries in {0, 1}
    eps_j: np.ndarray           # (N, m), masked by the indicator
    eps_combined: np.ndarray    # (N, m)

    def __post_init__(self):
        object.__setattr__(self, "eps_d", _freeze(self.eps_d))
        ind = np.asarray(self.jump_indicator)
        ind = np.array(ind, dtype=np.int64, copy=True)
        ind.setflags(write=False)
        object.__setattr__(self, "jump_indicator", ind)
        object.__setattr__(self, "eps_j", _freeze(self.eps_j))
        object.__setattr__(self, "eps_combined", _freeze(self.eps_combined))

    @classmethod
    def from_components(cls, eps_d, jump_indicator, eps_j) -> "NoiseRealization":
        eps_d = np.asarray(eps_d, dtype=float)
        eps_j = np.asarray(eps_j, dtype=float)
        return cls(eps_d, jump_indicator, eps_j, eps_d + eps_j)

    def __len__(self) -> int:
        return self.eps_d.shape[0]


@dataclass(frozen=True)
class RolloutResult:
    """One sampled trajectory with its accumulated modified cost."""

    trajectory: StateTrajectory
    noise: NoiseRealization
    cost: float
    diverged_at: Optional[int] = None
