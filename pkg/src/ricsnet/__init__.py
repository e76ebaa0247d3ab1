"""Surface-assisted vehicular network simulator with multi-agent learning.

A reconfigurable surface simultaneously reflects AV uplink signals toward the
base station and relays interference-shaping energy toward V2V receivers.
Discrete per-sub-block phase agents and hybrid per-AV offloading agents are
trained against a shared driving-safety objective with a V2V outage margin
term.

Layout:

* :mod:`ricsnet.config`   - run configuration, flat key=value file format
* :mod:`ricsnet.channel`  - geometry, mobility, fading draws
* :mod:`ricsnet.phy`      - surface phase control, SINR, rates, outage level
* :mod:`ricsnet.mec`      - task offloading delays and the safety objective
* :mod:`ricsnet.env`      - the multi-agent Markov game
* :mod:`ricsnet.neural`   - dense nets, exact backprop, Adam, checkpoints
* :mod:`ricsnet.agents`   - replay, discrete Q agent, hybrid split agent
* :mod:`ricsnet.training` - training/eval loops, metrics, persistence
* :mod:`ricsnet.oracle`   - exhaustive search for small instances
* :mod:`ricsnet.cli`      - ``ricsnet train|eval|sweep|oracle``
"""

from .config import (ComputeConfig, ConfigError, FadingParams, PhyConfig,
                     RicsConfig, RunConfig, TopologyConfig, TrainConfig,
                     dbm_to_watt, load_config)
from .channel import Csi, MobilityState, draw_csi, init_positions
from .phy import RicsAction, expand_action, outage_threshold, phase_codebook
from .mec import TaskSpec, best_offload_ratio, safety_factor
from .env import (GlobalState, JointAction, RewardBreakdown, StepOutcome,
                  VehicularEnv, actions_to_sharing, discounted_return)
from .agents import DdqnAgent, MpdqnAgent, ReplayBuffer, Transition, decay_lr
from .training import (AgentTeam, EpisodeStats, RunArtifacts, build_team,
                       evaluate, load_run, run_episode, save_run, train)
from .oracle import best_rics_action, enumerate_rics_actions, \
    exhaustive_joint_search

__version__ = "0.1.0"

__all__ = [
    "ComputeConfig", "ConfigError", "FadingParams", "PhyConfig", "RicsConfig",
    "RunConfig", "TopologyConfig", "TrainConfig", "dbm_to_watt", "load_config",
    "Csi", "MobilityState", "draw_csi", "init_positions",
    "RicsAction", "expand_action", "outage_threshold", "phase_codebook",
    "TaskSpec", "best_offload_ratio", "safety_factor",
    "GlobalState", "JointAction", "RewardBreakdown", "StepOutcome",
    "VehicularEnv", "actions_to_sharing", "discounted_return",
    "DdqnAgent", "MpdqnAgent", "ReplayBuffer", "Transition", "decay_lr",
    "AgentTeam", "EpisodeStats", "RunArtifacts", "build_team", "evaluate",
    "load_run", "run_episode", "save_run", "train",
    "best_rics_action", "enumerate_rics_actions", "exhaustive_joint_search",
    "__version__",
]
