"""Multi-objective stage cost: waiting passengers, schedule deficit, speed-range deviation."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .dynamics import BusState
from .errors import ConfigurationError
from .network import LoopNetwork, ScenarioParams, Timetable, desired_position
from .passengers import DemandSchedule, expected_arrivals, sampled_arrivals_mean


@dataclass(frozen=True)
class CostBreakdown:
    queue_term: float
    schedule_term: float
    speed_term: float
    total: float
    depot_gate: int


def desired_position_clamped(timetable: Timetable, network: LoopNetwork, params: ScenarioParams, k):
    """Desired position with k clamped to the scheduled trip."""
    k = min(max(k, 0), timetable.depot_return_s)
    return desired_position(timetable, network, params, k)


def speed_penalty(u, params: ScenarioParams):
    lo, hi = params.desired_speed_range
    return (u - lo) ** 2 + (u - hi) ** 2


def bus_terms(state: BusState, pd, network: LoopNetwork, params: ScenarioParams):
    """(schedule, speed, gate) contribution of one bus given its desired position."""
    _, a2, a3 = params.weights
    returned = state.recent_stop == network.depot_stop and state.speed == 0
    gate = 0 if returned else 1
    return a2 * (pd - state.position), gate * a3 * speed_penalty(state.speed, params), gate


def stage_cost(
    states: Sequence[BusState],
    queues: Sequence,
    k,
    timetable: Timetable,
    network: LoopNetwork,
    params: ScenarioParams,
    departure_offsets: Sequence | None = None,
) -> CostBreakdown:
    """J_k for the whole fleet.

    Each bus tracks the single-bus desired position shifted by its scheduled
    depot departure (``departure_offsets``, zero by default). The schedule
    term keeps its sign: running ahead of schedule lowers the cost.
    """
    if len(states) != params.fleet_size:
        raise ConfigurationError(f"{len(states)} bus states for a fleet of {params.fleet_size}")
    offsets = departure_offsets or (0,) * len(states)
    if len(offsets) != len(states):
        raise ConfigurationError("one departure offset per bus is required")
    queue_term = params.weights[0] * sum(queues)
    schedule_term = 0
    speed_term = 0
    gate = 1
    for state, offset in zip(states, offsets):
        pd = desired_position_clamped(timetable, network, params, k - offset)
        s, v, gate = bus_terms(state, pd, network, params)
        schedule_term += s
        speed_term += v
    return CostBreakdown(queue_term, schedule_term, speed_term, queue_term + schedule_term + speed_term, gate)


def expected_stage_cost(
    state: BusState,
    k,
    schedule: DemandSchedule,
    timetable: Timetable,
    network: LoopNetwork,
    params: ScenarioParams,
    mode: str = "closed-form",
    samples: int = 10_000,
):
    """E over this second's arrivals of J_k, for a single bus.

    J is affine in the queues, so the expectation is J evaluated at the
    expected queues. ``mode="sampled"`` replaces the closed-form mean with a
    Monte-Carlo estimate, for checking the closed form.
    """
    n = network.n_stops
    if mode == "closed-form":
        mean = expected_arrivals(schedule, k, n)
    elif mode == "sampled":
        mean = sampled_arrivals_mean(schedule, k, n, samples)
    else:
        raise ConfigurationError(f"unknown expectation mode {mode!r}")
    queues = [q + g for q, g in zip(state.queues, mean)]
    single = params if params.fleet_size == 1 else replace(params, fleet_size=1)
    return stage_cost([state], queues, k, timetable, network, single).total

