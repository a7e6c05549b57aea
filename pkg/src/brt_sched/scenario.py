"""Scenario bundle and the TOML scenario file format.

A scenario file has up to five tables; every key is optional except the
network geometry::

    [network]
    stop_positions = [600, 1200, 1800]   # metres from the depot
    delta = 5                            # detection half-width, metres
    loop_length = 2400                   # metres

    [timetable]                          # omitted: 120 s legs, 30 s dwells
    depot_departure_s = 0
    stops = [[120, 150], [270, 300], [420, 450]]   # (arrival_s, departure_s)
    depot_return_s = 570

    [params]
    traffic_factor = 5          # metres per speed unit per second
    speed_step = 0.5
    max_speed = 2
    lam = 0.5                   # max speed change per second
    boarding_rate = 1           # passengers per second
    bus_capacity = 40
    weights = [1.0, 0.1, 0.01]  # queue, schedule, speed
    desired_speed_range = [1.0, 1.5]
    fleet_size = 1

    [demand]
    arrival_period = 60
    arrival_cmf = [0.14, 0.81, 0.97, 0.99, 1.0]   # or one list per stop
    alight_cmf = [0.51, 0.77, 0.88, 0.95, 1.0]
    seed = 0

    [episode]
    grace_s = 30               # extra seconds allowed past the horizon to reach the depot

CMF supports are 1..len(cmf).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ResultIOError, ValidationError
from .network import (
    LoopNetwork,
    ScenarioParams,
    Timetable,
    default_network,
    default_timetable,
    desired_position,
    observer_horizon,
)
from .passengers import DemandSchedule, DiscreteCmf


@dataclass(frozen=True)
class Scenario:
    network: LoopNetwork
    timetable: Timetable
    params: ScenarioParams = ScenarioParams()
    demand: DemandSchedule = DemandSchedule()
    grace_s: int = 30
    _pd: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.grace_s < 0:
            raise ValidationError("episode.grace_s", "must be >= 0")
        horizon = observer_horizon(self.timetable, self.network, self.params)
        if horizon != int(horizon):
            raise ValidationError("timetable.depot_return_s", "must be a whole number of seconds")
        table = tuple(
            desired_position(self.timetable, self.network, self.params, k) for k in range(int(horizon) + 1)
        )
        object.__setattr__(self, "_pd", table)

    @property
    def horizon(self) -> int:
        return len(self._pd) - 1

    @property
    def n_stops(self) -> int:
        return self.network.n_stops

    @property
    def max_clock(self) -> int:
        return self.horizon + self.grace_s

    def pd(self, k):
        """Desired position, clamped to the scheduled trip."""
        return self._pd[min(max(int(k), 0), len(self._pd) - 1)]

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, demand=self.demand.with_seed(seed))


def default_scenario(seed: int = 0) -> Scenario:
    network = default_network()
    return Scenario(
        network=network,
        timetable=default_timetable(len(network.stop_positions)),
        demand=DemandSchedule(seed=seed),
    )


_SECTIONS = {"network", "timetable", "params", "demand", "episode"}


def _check_keys(section: str, data: dict, allowed) -> None:
    for key in data:
        if key not in allowed:
            raise ValidationError(f"{section}.{key}", "unknown key")


def _cmf(name: str, values) -> DiscreteCmf:
    try:
        return DiscreteCmf.from_cmf(values)
    except ValidationError as exc:
        raise ValidationError(name, str(exc).split(": ", 1)[-1]) from None
    except TypeError:
        raise ValidationError(name, f"expected a list of probabilities, got {values!r}") from None


def scenario_from_mapping(data: dict) -> Scenario:
    """Build and validate a scenario; the first violation is raised with its field name."""
    _check_keys("scenario", data, _SECTIONS)
    net = dict(data.get("network", {}))
    _check_keys("network", net, {"stop_positions", "delta", "loop_length"})
    for key in ("stop_positions", "delta", "loop_length"):
        if key not in net:
            raise ValidationError(f"network.{key}", "missing")
    try:
        network = LoopNetwork(tuple(net["stop_positions"]), net["delta"], net["loop_length"])
    except TypeError as exc:
        raise ValidationError("network", str(exc)) from None

    pnames = {f.name for f in fields(ScenarioParams)}
    praw = dict(data.get("params", {}))
    _check_keys("params", praw, pnames)
    try:
        params = ScenarioParams(**praw)
    except TypeError as exc:
        raise ValidationError("params", str(exc)) from None

    tt = dict(data.get("timetable", {}))
    _check_keys("timetable", tt, {"stops", "depot_return_s", "depot_departure_s"})
    if not tt:
        timetable = default_timetable(len(network.stop_positions))
    else:
        for key in ("stops", "depot_return_s"):
            if key not in tt:
                raise ValidationError(f"timetable.{key}", "missing")
        timetable = Timetable(
            entries=tuple(tuple(row) for row in tt["stops"]),
            depot_return_s=tt["depot_return_s"],
            depot_departure_s=tt.get("depot_departure_s", 0),
        )

    dem = dict(data.get("demand", {}))
    _check_keys("demand", dem, {"arrival_period", "arrival_cmf", "alight_cmf", "seed"})
    kwargs = {}
    if "arrival_cmf" in dem:
        raw = dem["arrival_cmf"]
        if raw and isinstance(raw[0], (list, tuple)):
            if len(raw) != network.n_stops:
                raise ValidationError("demand.arrival_cmf", f"need {network.n_stops} per-stop distributions")
            kwargs["arrival_cmf"] = tuple(_cmf(f"demand.arrival_cmf[{i}]", r) for i, r in enumerate(raw, 1))
        else:
            kwargs["arrival_cmf"] = _cmf("demand.arrival_cmf", raw)
    if "alight_cmf" in dem:
        kwargs["alight_cmf"] = _cmf("demand.alight_cmf", dem["alight_cmf"])
    for key in ("arrival_period", "seed"):
        if key in dem:
            kwargs[key] = dem[key]
    demand = DemandSchedule(**kwargs)

    ep = dict(data.get("episode", {}))
    _check_keys("episode", ep, {"grace_s"})
    return Scenario(network, timetable, params, demand, ep.get("grace_s", 30))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ResultIOError(f"{path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(str(path), f"not valid TOML ({exc})") from None
    return scenario_from_mapping(data)
