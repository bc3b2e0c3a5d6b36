"""MPPI control for jump-diffusion systems.

Sampling-based model predictive control where the sampled rollout noise can
include compound-Poisson jumps alongside the usual Gaussian diffusion, plus
a deterministic batch-experiment harness for comparing the jump-aware
("new") sampler against the diffusion-only ("old") one.
"""

from .controller import (
    ControllerError,
    ControllerState,
    UpdateDiagnostics,
    compute_weights,
    initial_controller_state,
    mppi_iteration,
    update_controls,
    warm_start_shift,
)
from .costs import (
    CartpoleStateCost,
    CostModel,
    QuadrotorStateCost,
    ScaledTerminalCost,
    control_cost_matrix_from_dynamics,
    modified_running_cost,
    trajectory_cost,
)
from .dynamics import (
    CartpoleModel,
    DynamicsModel,
    QuadrotorModel,
    StateDivergedError,
    cartpole_dynamics,
    quadrotor_dynamics,
    rollout,
    step,
)
from .experiment import (
    ExperimentConfig,
    ExperimentConfigError,
    build_mppi_config,
    build_task,
    config_from_dict,
    load_config,
    sweep_cells,
)
from .harness import (
    BatchSummary,
    CartpoleSuccess,
    QuadrotorSuccess,
    Task,
    TrialRecord,
    run_batch,
    run_trial,
    success_predicate,
    total_variance,
    trial_seed,
)
from .noise import (
    PLANT_STREAM_ID,
    NoiseError,
    RngStream,
    make_noise_realization,
    sample_diffusion,
    sample_jump_events,
    sample_jump_marks,
    sample_noise_batch,
)
from .theory import (
    ExpFamilyParams,
    girsanov_log_ratio_p_over_q,
    log_pdf,
    log_pdf_gradient,
    stochastic_opt_update,
)
from .types import (
    ConfigError,
    ControlSequence,
    MppiConfig,
    NoiseRealization,
    RolloutResult,
    StateTrajectory,
    config_violations,
    validate_config,
)

__version__ = "0.1.0"
