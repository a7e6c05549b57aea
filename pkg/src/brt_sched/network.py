"""Loop geometry, timetable, scenario constants and the desired-position profile.

Stops are indexed 1..M along the loop. The depot is index 0 at the start of a
trip, and the return to the depot is served as one extra stop, index M + 1,
whose window sits at ``loop_length``. Queue vectors therefore have M + 1
entries: the intermediate stops followed by the depot-return stop.

All arithmetic is kept generic so that ``fractions.Fraction`` inputs stay
exact end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import OutOfRangeError, ValidationError


@dataclass(frozen=True)
class LoopNetwork:
    stop_positions: tuple
    delta: float
    loop_length: float

    def __post_init__(self):
        object.__setattr__(self, "stop_positions", tuple(self.stop_positions))
        pos = self.stop_positions
        if not pos:
            raise ValidationError("network.stop_positions", "at least one intermediate stop is required")
        if self.delta <= 0:
            raise ValidationError("network.delta", f"must be > 0, got {self.delta}")
        if pos[0] <= 0:
            raise ValidationError("network.stop_positions", f"first stop must lie beyond the depot, got {pos[0]}")
        for a, b in zip(pos, pos[1:]):
            if b <= a:
                raise ValidationError("network.stop_positions", f"must be strictly increasing ({a} then {b})")
        if pos[-1] + self.delta > self.loop_length:
            raise ValidationError(
                "network.loop_length", f"last stop window ends at {pos[-1] + self.delta}, beyond loop_length {self.loop_length}"
            )
        # windows, including the depot-return one, must not overlap
        edges = [(p - self.delta, p + self.delta) for p in pos]
        edges.append((self.loop_length - self.delta, self.loop_length + self.delta))
        if edges[0][0] < self.delta:
            raise ValidationError("network.stop_positions", "first stop window overlaps the depot")
        for (_, hi), (lo, _) in zip(edges, edges[1:]):
            if lo < hi:
                raise ValidationError("network.delta", "detection windows overlap")

    @property
    def n_stops(self) -> int:
        """Number of served stops, the depot return included."""
        return len(self.stop_positions) + 1

    @property
    def depot_stop(self) -> int:
        return len(self.stop_positions) + 1

    def position_of(self, m: int):
        if m == 0 or m == self.depot_stop:
            return self.loop_length if m else 0
        if 1 <= m <= len(self.stop_positions):
            return self.stop_positions[m - 1]
        raise OutOfRangeError(f"invalid stop index {m}")


def stop_window(network: LoopNetwork, m: int) -> tuple:
    """Half-open detection interval ``[lo, hi)`` of stop ``m``.

    ``m = 0`` and ``m = M + 1`` both refer to the depot-return window.
    """
    if m == 0 or m == network.depot_stop:
        centre = network.loop_length
    elif 1 <= m <= len(network.stop_positions):
        centre = network.stop_positions[m - 1]
    else:
        raise OutOfRangeError(f"invalid stop index {m}")
    return centre - network.delta, centre + network.delta


def in_window(network: LoopNetwork, m: int, position) -> bool:
    lo, hi = stop_window(network, m)
    return lo <= position < hi


@dataclass(frozen=True)
class Timetable:
    """Scheduled (arrival_s, departure_s) per intermediate stop, in seconds from trip start."""

    entries: tuple
    depot_return_s: float
    depot_departure_s: float = 0

    def __post_init__(self):
        entries = tuple(tuple(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.depot_departure_s < 0:
            raise ValidationError("timetable.depot_departure_s", "must be >= 0")
        prev = self.depot_departure_s
        for i, row in enumerate(entries, start=1):
            if len(row) != 2:
                raise ValidationError(f"timetable.stops[{i}]", "expected (arrival_s, departure_s)")
            arr, dep = row
            if arr > dep:
                raise ValidationError(f"timetable.stops[{i}]", f"arrival {arr} after departure {dep}")
            if arr <= prev:
                raise ValidationError(f"timetable.stops[{i}]", "times must increase along the loop")
            prev = dep
        if self.depot_return_s < prev:
            raise ValidationError("timetable.depot_return_s", f"{self.depot_return_s} precedes last departure {prev}")

    def departure_s(self, m: int):
        """tt(k) for a bus whose most recent stop is ``m``."""
        if m == 0:
            return self.depot_departure_s
        if 1 <= m <= len(self.entries):
            return self.entries[m - 1][1]
        if m == len(self.entries) + 1:
            return self.depot_return_s
        raise OutOfRangeError(f"invalid stop index {m}")

    def arrival_s(self, m: int):
        if m == 0:
            return self.depot_departure_s
        if 1 <= m <= len(self.entries):
            return self.entries[m - 1][0]
        if m == len(self.entries) + 1:
            return self.depot_return_s
        raise OutOfRangeError(f"invalid stop index {m}")


@dataclass(frozen=True)
class ScenarioParams:
    traffic_factor: float = 5
    speed_step: float = 0.5
    max_speed: float = 2
    lam: float = 0.5
    boarding_rate: int = 1
    bus_capacity: int = 40
    weights: tuple = (1.0, 0.1, 0.01)
    desired_speed_range: tuple = (1.0, 1.5)
    fleet_size: int = 1

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "desired_speed_range", tuple(self.desired_speed_range))
        if self.traffic_factor <= 0:
            raise ValidationError("params.traffic_factor", "must be > 0")
        if self.speed_step <= 0:
            raise ValidationError("params.speed_step", "must be > 0")
        if not 0 < self.lam <= self.max_speed:
            raise ValidationError("params.lam", f"need 0 < lam <= max_speed, got {self.lam}")
        for name in ("lam", "max_speed"):
            ratio = getattr(self, name) / self.speed_step
            if ratio != int(ratio):
                raise ValidationError(f"params.{name}", "must be a multiple of speed_step")
        if self.boarding_rate < 1:
            raise ValidationError("params.boarding_rate", "must be >= 1")
        if self.bus_capacity < 1:
            raise ValidationError("params.bus_capacity", "must be >= 1")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise ValidationError("params.weights", "need three non-negative weights")
        if len(self.desired_speed_range) != 2:
            raise ValidationError("params.desired_speed_range", "need [min, max]")
        lo, hi = self.desired_speed_range
        if lo < self.speed_step or hi < lo:
            raise ValidationError("params.desired_speed_range", f"need speed_step <= min <= max, got {lo}, {hi}")
        if hi >= self.max_speed:
            raise ValidationError("params.desired_speed_range", "max must stay below max_speed")
        if self.fleet_size < 1:
            raise ValidationError("params.fleet_size", "must be >= 1")

    @property
    def speeds(self) -> tuple:
        n = int(self.max_speed / self.speed_step)
        return tuple(i * self.speed_step for i in range(n + 1))

    @property
    def nominal_speed(self):
        """Timetable cruising speed in metres per second."""
        return self.desired_speed_range[0] * self.traffic_factor


def check_compatible(network: LoopNetwork, timetable: Timetable, params: ScenarioParams) -> None:
    """Cross-checks between geometry and timetable; raises on the first problem."""
    if len(timetable.entries) != len(network.stop_positions):
        raise ValidationError(
            "timetable.stops", f"{len(timetable.entries)} rows for {len(network.stop_positions)} stops"
        )
    v = params.nominal_speed
    for m in range(network.depot_stop):
        leg = network.position_of(m + 1) - network.position_of(m)
        slot = timetable.arrival_s(m + 1) - timetable.departure_s(m)
        if leg > v * slot:
            raise ValidationError(
                f"timetable.stops[{m + 1}]" if m + 1 < network.depot_stop else "timetable.depot_return_s",
                f"leg of {leg} m cannot be covered at {v} m/s in {slot} s",
            )


def desired_position(timetable: Timetable, network: LoopNetwork, params: ScenarioParams, k):
    """Minimum on-schedule position at second ``k``."""
    horizon = timetable.depot_return_s
    if k < 0 or k > horizon:
        raise OutOfRangeError(f"k={k} outside [0, {horizon}]")
    if k == horizon:
        return network.loop_length
    v = params.nominal_speed
    for m in range(network.depot_stop - 1, -1, -1):
        dep = timetable.departure_s(m)
        if k >= dep:
            return min(network.position_of(m) + v * (k - dep), network.position_of(m + 1))
        if m and k >= timetable.arrival_s(m):
            return network.position_of(m)
    return 0


def observer_horizon(timetable: Timetable, network: LoopNetwork, params: ScenarioParams):
    """Round-trip horizon T fixed before the trip starts.

    The timetable already encodes route length, dwell plan and the traffic
    factor through the nominal speed, so T is its scheduled depot return.
    """
    check_compatible(network, timetable, params)
    return timetable.depot_return_s


def default_network() -> LoopNetwork:
    return LoopNetwork(stop_positions=(600, 1200, 1800), delta=5, loop_length=2400)


def default_timetable(
    n_stops: int = 3, leg_s: int = 120, dwell_s: int = 30, start_s: int = 0
) -> Timetable:
    rows = []
    t = start_s
    for _ in range(n_stops):
        t += leg_s
        rows.append((t, t + dwell_s))
        t += dwell_s
    return Timetable(entries=tuple(rows), depot_return_s=t + leg_s, depot_departure_s=start_s)
