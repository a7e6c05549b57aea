from __future__ import annotations

import pytest

from brt_sched.feasibility import (
    APPROACH,
    CRUISE,
    DEPART,
    DWELL_HOLD,
    STOP,
    braking_distance,
    feasible_controls,
    stop_required,
)

from conftest import make_state


def controls(net, tt, params, **state):
    return feasible_controls(make_state(**state), net, tt, params)


def test_cruise_mid_leg(net, tt, params):
    got = controls(net, tt, params, position=300, speed=1, clock=60)
    assert got == ((0.5, 1, 1.5), CRUISE)


def test_cruise_capped_at_max_speed(net, tt, params):
    got = controls(net, tt, params, position=100, speed=2, clock=20)
    assert got == ((1.5, 2), CRUISE)


def test_approach_ramps_down(net, tt, params):
    got = controls(net, tt, params, position=1190, speed=1, recent_stop=1, clock=250)
    assert got == ((0.5,), APPROACH)


def test_approach_floor_is_lam(net, tt, params):
    got = controls(net, tt, params, position=592.5, speed=0.5, clock=100)
    assert got == ((0.5,), APPROACH)


def test_stop_captures_bus_with_waiting_passengers(net, tt, params):
    got = controls(net, tt, params, position=597.5, speed=0.5, queues=(4, 0, 0, 0), clock=200)
    assert got == ((0,), STOP)


def test_stop_captures_bus_before_departure_time(net, tt, params):
    got = controls(net, tt, params, position=597.5, speed=0.5, clock=100)
    assert got == ((0,), STOP)


def test_empty_late_stop_is_passed(net, tt, params):
    got = controls(net, tt, params, position=597.5, speed=0.5, clock=200)
    assert got == ((0.5,), APPROACH)


def test_hold_until_departure(net, tt, params):
    got = controls(net, tt, params, position=600, speed=0, recent_stop=1, queues=(4, 0, 0, 0), clock=140)
    assert got == ((0,), DWELL_HOLD)


def test_forced_departure_on_time(net, tt, params):
    got = controls(net, tt, params, position=600, speed=0, recent_stop=1, clock=150)
    assert got == ((0.5,), DEPART)


def test_late_bus_keeps_boarding_then_leaves(net, tt, params):
    busy = controls(net, tt, params, position=600, speed=0, recent_stop=1, queues=(2, 0, 0, 0), clock=160)
    assert busy == ((0,), DWELL_HOLD)
    full = controls(net, tt, params, position=600, speed=0, recent_stop=1, queues=(2, 0, 0, 0), clock=160, capacity_free=0)
    assert full == ((0.5,), DEPART)


def test_depot_departure_at_zero(net, tt, params):
    assert controls(net, tt, params) == ((0.5,), DEPART)


def test_returned_bus_holds(net, tt, params):
    got = controls(net, tt, params, position=2400, speed=0, recent_stop=4, clock=515)
    assert got == ((0,), DWELL_HOLD)


@pytest.mark.parametrize("u, expected", [(2, 25), (0.5, 2.5), (0, 0), (1, 7.5)])
def test_braking_distance(u, expected):
    assert braking_distance(u, 0.5, 5) == expected


def test_stop_required(net, tt):
    assert stop_required(make_state(clock=200), 4, net, tt)
    assert stop_required(make_state(clock=200, alight_flag=1), 1, net, tt)
    assert not stop_required(make_state(clock=200), 1, net, tt)
