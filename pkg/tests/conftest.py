from __future__ import annotations

from fractions import Fraction

import pytest

from brt_sched.dynamics import initial_state
from brt_sched.network import LoopNetwork, ScenarioParams, Timetable, default_network, default_timetable
from brt_sched.passengers import DemandSchedule
from brt_sched.scenario import Scenario, default_scenario

NEVER = 10**9  # arrival period longer than any episode: no passengers at all


@pytest.fixture
def scenario():
    return default_scenario()


@pytest.fixture
def net():
    return default_network()


@pytest.fixture
def tt():
    return default_timetable()


@pytest.fixture
def params():
    return ScenarioParams()


def make_state(**overrides):
    """Default-scenario bus at the depot, with fields overridden."""
    base = initial_state(default_network(), ScenarioParams())
    if "capacity_free" in overrides and "onboard" not in overrides:
        overrides["onboard"] = ScenarioParams().bus_capacity - overrides["capacity_free"]
    return base._replace(**overrides)


def tiny_zero_demand(weights=(1, Fraction(1, 10), Fraction(1, 100))) -> Scenario:
    """Two-stop 300 m loop with a 70 s round trip and no passengers."""
    half = Fraction(1, 2)
    return Scenario(
        network=LoopNetwork((150,), 5, 300),
        timetable=Timetable(((30, 40),), 70),
        params=ScenarioParams(
            speed_step=half,
            lam=half,
            weights=tuple(Fraction(w) for w in weights),
            desired_speed_range=(Fraction(1), Fraction(3, 2)),
        ),
        demand=DemandSchedule(arrival_period=NEVER),
    )
