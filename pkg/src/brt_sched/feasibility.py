"""Feasible speed sets for every bus state.

Regimes are resolved in priority order: stop, dwell-hold/depart, approach,
cruise. Speeds are in speed units throughout; the traffic factor only enters
through distances.
"""

from __future__ import annotations

from typing import NamedTuple

from .dynamics import BusState
from .errors import InfeasibleControlError
from .network import LoopNetwork, ScenarioParams, Timetable, in_window, stop_window

CRUISE = "cruise"
APPROACH = "approach"
STOP = "stop"
DEPART = "depart"
DWELL_HOLD = "dwell-hold"
REGIMES = (CRUISE, APPROACH, STOP, DEPART, DWELL_HOLD)


class ControlSet(NamedTuple):
    speeds: tuple
    regime: str


def braking_distance(u, lam, c):
    """Distance covered while ramping down from ``u`` in steps of ``lam``.

    Sums c * v over v = lam, 2 lam, ..., u; zero when u < lam.
    """
    n = int(u // lam)
    return c * lam * (n * (n + 1) // 2)


def stop_required(state: BusState, m: int, network: LoopNetwork, timetable: Timetable) -> bool:
    """Must the bus halt at stop ``m`` when it reaches the window?

    Waiting passengers or an alighting request force a stop, and so does a
    timetable departure still in the future. The depot return always stops.
    """
    if m == network.depot_stop:
        return True
    return state.queues[m - 1] > 0 or state.alight_flag == 1 or state.clock < timetable.departure_s(m)


def _brake_safe(gap, w, lam, c) -> bool:
    # after moving at speed w the bus is `gap` metres short of the window and
    # must still be able to ramp down to lam before entering it
    if w <= lam:
        return True
    return gap > braking_distance(w - lam, lam, c) - lam * c


def feasible_controls(
    state: BusState, network: LoopNetwork, timetable: Timetable, params: ScenarioParams
) -> ControlSet:
    lam = params.lam
    c = params.traffic_factor
    u = state.speed
    m = state.recent_stop
    target = m + 1

    if m >= network.depot_stop:
        # back at the depot: u_T = 0 is the only action left
        return ControlSet((0,), DWELL_HOLD)

    if u > 0 and in_window(network, target, state.position) and stop_required(state, target, network, timetable):
        return ControlSet((0,), STOP)

    if u == 0:
        dep = timetable.departure_s(m)
        queue_empty = m == 0 or state.queues[m - 1] == 0
        if state.clock == dep or (state.clock >= dep and (queue_empty or state.capacity_free <= 0)):
            return ControlSet((u + lam,), DEPART)
        return ControlSet((0,), DWELL_HOLD)

    gap = stop_window(network, target)[0] - state.position
    if gap <= braking_distance(u, lam, c):
        return ControlSet((max(u - lam, lam),), APPROACH)

    speeds = tuple(
        w
        for w in (u - lam, u, u + lam)
        if 0 < w <= params.max_speed and _brake_safe(gap - w * c, w, lam, c)
    )
    if not speeds:
        raise InfeasibleControlError(f"empty control set in state {state}")
    return ControlSet(speeds, CRUISE)
