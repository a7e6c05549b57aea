"""Bus state and its one-second transition.

The transition at second ``k`` adds the arrivals sampled at ``k - 1`` to the
queues (the one-step lag in the queue recursion), so the state carries those
pending arrivals forward. Alighting happens in a single step, when the bus
stops at the stop it was heading to.
"""

from __future__ import annotations

import logging
from typing import NamedTuple

from .errors import CapacityError, InfeasibleDisturbanceError, QueueError
from .network import LoopNetwork, ScenarioParams, in_window, stop_window

log = logging.getLogger(__name__)


class BusState(NamedTuple):
    position: float
    speed: float
    recent_stop: int
    capacity_free: float
    queues: tuple
    alight_flag: int
    onboard: float
    clock: int
    pending_arrivals: tuple


class Disturbance(NamedTuple):
    """Arrivals per stop sampled this second, and the alighting demand for the
    stop the bus is heading to (already truncated to the passengers on board)."""

    arrivals: tuple
    alight: float = 0


def initial_state(network: LoopNetwork, params: ScenarioParams, clock: int = 0) -> BusState:
    zeros = (0,) * network.n_stops
    return BusState(
        position=0,
        speed=0,
        recent_stop=0,
        capacity_free=params.bus_capacity,
        queues=zeros,
        alight_flag=0,
        onboard=0,
        clock=clock,
        pending_arrivals=zeros,
    )


def is_returned(state: BusState, network: LoopNetwork) -> bool:
    return state.recent_stop == network.depot_stop and state.speed == 0


def step_position(state: BusState, u_next, c):
    return state.position + u_next * c


def step_recent_stop(state: BusState, network: LoopNetwork) -> int:
    """Claim the next stop once the bus stands still inside its window.

    A bus that leaves the window without stopping (no demand, already past
    its departure time) is also counted as having visited the stop, so the
    index keeps tracking the stop ahead.
    """
    m = state.recent_stop
    if m >= network.depot_stop:
        return m
    if state.speed == 0 and in_window(network, m + 1, state.position):
        return m + 1
    if state.position >= stop_window(network, m + 1)[1]:
        return m + 1
    return m


def boarded_this_step(state: BusState, dist: Disturbance, boarding_rate) -> float:
    """Passengers boarding while the bus stands at ``state.recent_stop``.

    Limited by the boarding rate, the queue, and the free seats after alighting.
    """
    m = state.recent_stop
    if state.speed > 0 or m == 0 or m >= len(state.queues):
        return 0
    room = state.capacity_free + state.alight_flag * dist.alight
    return max(0, min(state.queues[m - 1], boarding_rate, room))


def step_capacity(state: BusState, dist: Disturbance, boarding_rate, bus_capacity=None, strict: bool = True):
    """Free capacity after one second; ``state.speed`` is the applied control."""
    if dist.alight > state.onboard:
        raise InfeasibleDisturbanceError(
            f"{dist.alight} passengers alighting with only {state.onboard} on board"
        )
    if state.speed > 0:
        return state.capacity_free
    boarded = boarded_this_step(state, dist, boarding_rate)
    free = state.capacity_free - boarded + state.alight_flag * dist.alight
    upper = bus_capacity if bus_capacity is not None else state.capacity_free + state.onboard
    if free < 0 or free > upper:
        if strict:
            raise CapacityError(f"free capacity {free} outside [0, {upper}]")
        log.warning("clamping free capacity %s into [0, %s]", free, upper)
        free = min(max(free, 0), upper)
    return free


def open_stops(state: BusState) -> tuple:
    """Per stop, whether the bus can still pick up there on this lap."""
    m = state.recent_stop
    return tuple(j > m or (j == m and state.speed == 0) for j in range(1, len(state.queues) + 1))


def admitted_arrivals(state: BusState, arrivals) -> tuple:
    """Arrivals that join the queues of ``state`` (zero at stops already left)."""
    return tuple(g if ok else 0 for g, ok in zip(arrivals, open_stops(state)))


def step_queues(state: BusState, dist: Disturbance, boarded) -> tuple:
    """Queues after boarding at the current stop and adding arrivals at open stops.

    ``state`` is the bus after this second's move (position, speed and stop updated).
    """
    m = state.recent_stop
    queues = list(state.queues)
    if boarded:
        if not 1 <= m <= len(queues) or boarded > queues[m - 1]:
            raise QueueError(f"cannot board {boarded} at stop {m} with queues {state.queues}")
        queues[m - 1] -= boarded
    return tuple(n + g for n, g in zip(queues, admitted_arrivals(state, dist.arrivals)))


def transition(
    state: BusState,
    u_next,
    dist: Disturbance,
    network: LoopNetwork,
    params: ScenarioParams,
    strict: bool = True,
) -> BusState:
    """X_{k+1} = f_k(X_k, u_next, W_k).

    ``dist.arrivals`` are this second's samples; they join the queues on the
    next transition. Feasibility of ``u_next`` is the caller's responsibility
    (see :func:`brt_sched.feasibility.feasible_controls`).
    """
    position = step_position(state, u_next, params.traffic_factor)
    moved = state._replace(position=position, speed=u_next)
    stop = step_recent_stop(moved, network)
    entering = u_next == 0 and stop != state.recent_stop
    alight = dist.alight if entering else 0
    if alight > state.onboard:
        raise InfeasibleDisturbanceError(
            f"{alight} passengers alighting with only {state.onboard} on board"
        )
    here = moved._replace(recent_stop=stop)
    applied = Disturbance(state.pending_arrivals, alight)
    boarded = boarded_this_step(here, applied, params.boarding_rate)
    free = step_capacity(here, applied, params.boarding_rate, params.bus_capacity, strict)
    queues = step_queues(here, applied, boarded)
    if u_next == 0:
        flag = state.alight_flag
    else:
        flag = 1 if dist.alight > 0 else 0
    return BusState(
        position=position,
        speed=u_next,
        recent_stop=stop,
        capacity_free=free,
        queues=queues,
        alight_flag=flag,
        onboard=params.bus_capacity - free,
        clock=state.clock + 1,
        pending_arrivals=tuple(dist.arrivals),
    )
