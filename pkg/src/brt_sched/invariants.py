"""Per-step checks applied online by the episode runner."""

from __future__ import annotations

from .dynamics import BusState, Disturbance, admitted_arrivals
from .network import in_window
from .scenario import Scenario


def step_violations(prev: BusState, u, dist: Disturbance, new: BusState, scenario: Scenario) -> list:
    """Every invariant broken by the transition ``prev -> new`` under control ``u``."""
    p = scenario.params
    net = scenario.network
    out = []
    if abs(u - prev.speed) > p.lam:
        out.append(f"speed jump {prev.speed} -> {u} exceeds lam={p.lam}")
    if new.position - prev.position != u * p.traffic_factor:
        out.append(f"position moved {new.position - prev.position}, expected {u * p.traffic_factor}")
    if not 0 <= new.capacity_free <= p.bus_capacity:
        out.append(f"free capacity {new.capacity_free} outside [0, {p.bus_capacity}]")
    if new.onboard != p.bus_capacity - new.capacity_free:
        out.append("onboard count out of sync with free capacity")
    if any(q < 0 for q in new.queues):
        out.append(f"negative queue {new.queues}")

    step = new.recent_stop - prev.recent_stop
    if step not in (0, 1):
        out.append(f"recent stop jumped {prev.recent_stop} -> {new.recent_stop}")
    elif step == 1:
        stopped_inside = u == 0 and in_window(net, new.recent_stop, new.position)
        if not stopped_inside and u == 0:
            out.append(f"stop {new.recent_stop} claimed outside its window")

    entered = step == 1 and u == 0
    served = prev.alight_flag * dist.alight if entered else 0
    if served > prev.onboard:
        out.append(f"{served} alighting with {prev.onboard} on board")
    joined = sum(admitted_arrivals(new, prev.pending_arrivals))
    change = (sum(new.queues) - sum(prev.queues)) + (new.onboard - prev.onboard)
    if change != joined - served:
        out.append(f"passenger ledger off: change {change} vs arrivals {joined} - alighted {served}")

    if prev.speed == 0 and u > 0 and prev.recent_stop < net.depot_stop:
        dep = scenario.timetable.departure_s(prev.recent_stop)
        if prev.clock < dep:
            out.append(f"left stop {prev.recent_stop} at {prev.clock}, before its departure time {dep}")
    return out
