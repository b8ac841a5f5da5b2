"""Planning and Monte-Carlo simulation of joint transmit/jamming power
allocation for an energy-harvesting source-destination pair observed by an
eavesdropper."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .mdp import (
    Action,
    Kernel,
    StateDims,
    SystemState,
    build_kernel,
    feasible_actions,
    joint_dims,
    state_from_index,
    state_index,
)
from .model import (
    ChannelModel,
    EnergyModel,
    ModelValidationError,
    RadioModel,
    SystemModel,
    battery_next,
    energy_cost,
    secrecy_reward,
    sinr_pair,
)
from .planner import (
    Policy,
    bellman_residual,
    policy_evaluation,
    policy_improvement,
    policy_iteration,
    reduced_state_plan,
    value_iteration_oracle,
)
from .policy_io import PolicyFormatError, load_policy, save_policy
from .selectors import Algorithm, build_restricted_mdp, greedy_actions, naive_actions
from .simulate import (
    EpisodeRecord,
    MetricsSummary,
    SimConfig,
    energy_efficiency_of,
    estimate,
    run_episode,
    sample_lifetime,
)
from .sweeps import bench_planning, run_sweep, write_csv

__version__ = "0.1.0"
