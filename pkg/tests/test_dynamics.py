from __future__ import annotations

import pytest

from brt_sched.dynamics import (
    Disturbance,
    admitted_arrivals,
    initial_state,
    is_returned,
    step_capacity,
    step_position,
    step_queues,
    step_recent_stop,
    transition,
)
from brt_sched.errors import CapacityError, InfeasibleDisturbanceError, QueueError
from brt_sched.network import ScenarioParams

from conftest import make_state

NO_ARRIVALS = (0, 0, 0, 0)


@pytest.mark.parametrize("p, u, expected", [(100, 2, 110), (100, 0, 100), (595, 1, 600)])
def test_step_position(p, u, expected):
    assert step_position(make_state(position=p), u, 5) == expected


@pytest.mark.parametrize(
    "p, u, m, expected",
    [(602, 0, 0, 1), (602, 1, 0, 0), (300, 0, 0, 0), (605, 0, 0, 1), (2400, 0, 3, 4)],
)
def test_step_recent_stop(net, p, u, m, expected):
    # P=605 is outside the half-open window, but the bus is past it, so stop 1 counts as passed
    assert step_recent_stop(make_state(position=p, speed=u, recent_stop=m), net) == expected


def test_recent_stop_is_terminal_after_return(net):
    assert step_recent_stop(make_state(position=2400, speed=0, recent_stop=4), net) == 4


def test_capacity_boards_at_rate():
    s = make_state(recent_stop=1, speed=0, capacity_free=20, queues=(7, 0, 0, 0))
    assert step_capacity(s, Disturbance(NO_ARRIVALS), 3) == 17


def test_capacity_boards_queue_and_frees_alighting_seats():
    s = make_state(recent_stop=1, speed=0, capacity_free=20, queues=(2, 0, 0, 0), alight_flag=1)
    assert step_capacity(s, Disturbance(NO_ARRIVALS, 4), 3) == 22


def test_capacity_unchanged_while_moving():
    s = make_state(recent_stop=1, speed=1, capacity_free=20, queues=(7, 0, 0, 0))
    assert step_capacity(s, Disturbance(NO_ARRIVALS, 4), 3) == 20


def test_capacity_rejects_more_alighting_than_onboard():
    s = make_state(recent_stop=1, speed=0, capacity_free=38, queues=(0, 0, 0, 0), alight_flag=1)
    with pytest.raises(InfeasibleDisturbanceError):
        step_capacity(s, Disturbance(NO_ARRIVALS, 3), 1)


def test_capacity_overflow_strict_and_lenient():
    s = make_state(recent_stop=1, speed=0, capacity_free=39, onboard=2, alight_flag=1)
    with pytest.raises(CapacityError):
        step_capacity(s, Disturbance(NO_ARRIVALS, 2), 1, bus_capacity=40)
    assert step_capacity(s, Disturbance(NO_ARRIVALS, 2), 1, bus_capacity=40, strict=False) == 40


def test_boarding_limited_by_free_seats():
    s = make_state(recent_stop=1, speed=0, capacity_free=0, queues=(5, 0, 0, 0))
    assert step_capacity(s, Disturbance(NO_ARRIVALS), 3) == 0


def test_queues_dwelling_board_and_arrivals():
    s = make_state(recent_stop=1, speed=0, queues=(5, 2, 0, 0))
    assert step_queues(s, Disturbance((1, 0, 2, 0)), 3) == (3, 2, 2, 0)


def test_queues_moving_no_arrivals():
    s = make_state(recent_stop=1, speed=1, queues=(5, 2, 0, 0))
    assert step_queues(s, Disturbance(NO_ARRIVALS), 0) == (5, 2, 0, 0)


def test_queues_pure_arrivals():
    assert step_queues(make_state(), Disturbance((2, 2, 2, 2)), 0) == (2, 2, 2, 2)


def test_queues_ignore_arrivals_at_stops_already_left():
    s = make_state(recent_stop=2, speed=1, queues=(0, 1, 0, 0))
    assert admitted_arrivals(s, (2, 2, 2, 2)) == (0, 0, 2, 2)
    assert step_queues(s, Disturbance((2, 2, 2, 2)), 0) == (0, 1, 2, 2)


def test_queues_reject_overboarding():
    s = make_state(recent_stop=1, speed=0, queues=(1, 0, 0, 0))
    with pytest.raises(QueueError):
        step_queues(s, Disturbance(NO_ARRIVALS), 2)


def test_transition_first_acceleration(net, params):
    s = initial_state(net, params)
    nxt = transition(s, 0.5, Disturbance(NO_ARRIVALS), net, params)
    assert (nxt.position, nxt.speed, nxt.recent_stop, nxt.queues, nxt.clock) == (2.5, 0.5, 0, NO_ARRIVALS, 1)


def test_transition_dwell_boards_at_rate(net):
    params = ScenarioParams(boarding_rate=3)
    s = make_state(position=600, speed=0, recent_stop=1, queues=(7, 0, 0, 0), capacity_free=30, clock=130)
    nxt = transition(s, 0, Disturbance(NO_ARRIVALS), net, params)
    assert nxt.queues[0] == 4
    assert nxt.capacity_free == 27
    assert nxt.onboard == 13


def test_transition_entry_applies_alighting_once(net, params):
    s = make_state(position=597.5, speed=0.5, recent_stop=0, capacity_free=30, alight_flag=1, clock=100)
    entered = transition(s, 0, Disturbance(NO_ARRIVALS, 4), net, params)
    assert entered.recent_stop == 1
    assert entered.capacity_free == 34
    again = transition(entered, 0, Disturbance(NO_ARRIVALS, 4), net, params)
    assert again.capacity_free == 34


def test_transition_arrivals_lag_one_step(net, params):
    s = initial_state(net, params)
    a = transition(s, 0.5, Disturbance((1, 2, 3, 4)), net, params)
    assert a.queues == NO_ARRIVALS
    b = transition(a, 1, Disturbance(NO_ARRIVALS), net, params)
    assert b.queues == (1, 2, 3, 4)


def test_alight_flag_tracks_request(net, params):
    s = make_state(position=300, speed=1, capacity_free=35)
    assert transition(s, 1, Disturbance(NO_ARRIVALS, 2), net, params).alight_flag == 1
    assert transition(s, 1, Disturbance(NO_ARRIVALS, 0), net, params).alight_flag == 0


def test_is_returned(net):
    assert is_returned(make_state(position=2400, recent_stop=4, speed=0), net)
    assert not is_returned(make_state(position=2400, recent_stop=4, speed=0.5), net)
    assert not is_returned(make_state(position=2400, recent_stop=3, speed=0), net)
