"""Outage minimization for an IRS-aided MISO downlink.

Joint data-driven design of a BS beamforming vector (power-ball constrained)
and an IRS phase-shift vector (unimodular) that minimizes the empirical
outage probability over a set of channel samples, via alternating projected
stochastic gradient descent on a sigmoid-smoothed outage objective.
"""

from irsmin.channel import (
    ChannelSample,
    ChannelSampleSet,
    Position3D,
    ScenarioGeometry,
    dbm_to_watts,
    draw_user_position,
    generate_channel_sample,
    generate_sample_set,
    path_loss,
)
from irsmin.experiments import (
    ExperimentConfig,
    SweepResult,
    SweepRow,
    emit_csv,
    run_realization,
    run_sweep,
)
from irsmin.objective import (
    SystemParams,
    cascaded_channel,
    empirical_outage,
    indicator,
    lift_v,
    lift_w,
    margin,
    sigmoid,
    surrogate_objective,
)
from irsmin.sampleio import load_sample_set, save_sample_set
from irsmin.solver import (
    SolverConfig,
    SolverResult,
    alternating_sgd,
    grad_v,
    grad_w,
    gradient_check,
    init_point,
    inner_loop_v,
    inner_loop_w,
    project_ball,
    project_unimodular,
)

__version__ = "0.1.0"
