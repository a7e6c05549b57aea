"""Single-loop BRT bus scheduling with rolling look-ahead dynamic programming."""

from .dynamics import BusState, Disturbance, initial_state, transition
from .errors import BrtSchedError
from .feasibility import ControlSet, feasible_controls
from .harness import EpisodeResult, run_batch, run_episode, waiting_area
from .network import LoopNetwork, ScenarioParams, Timetable
from .passengers import DemandSchedule, DiscreteCmf
from .scenario import Scenario, default_scenario, load_scenario
from .solver import PolicyDecision, SolverConfig, baseline_policy, dp_lookahead, exhaustive_oracle

__version__ = "0.1.0"

__all__ = [
    "BrtSchedError",
    "BusState",
    "ControlSet",
    "DemandSchedule",
    "DiscreteCmf",
    "Disturbance",
    "EpisodeResult",
    "LoopNetwork",
    "PolicyDecision",
    "Scenario",
    "ScenarioParams",
    "SolverConfig",
    "Timetable",
    "baseline_policy",
    "default_scenario",
    "dp_lookahead",
    "exhaustive_oracle",
    "feasible_controls",
    "initial_state",
    "load_scenario",
    "run_batch",
    "run_episode",
    "transition",
    "waiting_area",
]
