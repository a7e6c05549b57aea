from __future__ import annotations

import pytest

from brt_sched.errors import OutOfRangeError, ValidationError
from brt_sched.network import (
    LoopNetwork,
    ScenarioParams,
    Timetable,
    check_compatible,
    desired_position,
    in_window,
    observer_horizon,
    stop_window,
)


@pytest.mark.parametrize("k, expected", [(0, 0), (60, 300), (130, 600), (150, 600), (270, 1200), (570, 2400)])
def test_desired_position_examples(tt, net, params, k, expected):
    assert desired_position(tt, net, params, k) == expected


@pytest.mark.parametrize("k", [-1, 571])
def test_desired_position_out_of_range(tt, net, params, k):
    with pytest.raises(OutOfRangeError):
        desired_position(tt, net, params, k)


def test_desired_position_monotone_and_lipschitz(tt, net, params):
    pd = [desired_position(tt, net, params, k) for k in range(571)]
    steps = [b - a for a, b in zip(pd, pd[1:])]
    assert min(steps) >= 0
    assert max(steps) <= params.nominal_speed


def test_observer_horizon_default(tt, net, params):
    assert observer_horizon(tt, net, params) == 570
    assert 540 <= observer_horizon(tt, net, params) <= 600


def test_observer_horizon_rejects_unreachable_schedule(net, params):
    rushed = Timetable(((60, 90), (270, 300), (420, 450)), 570)
    with pytest.raises(ValidationError, match="stops\\[1\\]"):
        observer_horizon(rushed, net, params)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(stop_positions=(0,), delta=5, loop_length=0),
        dict(stop_positions=(), delta=5, loop_length=100),
        dict(stop_positions=(600, 500), delta=5, loop_length=2400),
        dict(stop_positions=(600,), delta=0, loop_length=2400),
        dict(stop_positions=(600, 605), delta=5, loop_length=2400),
        dict(stop_positions=(2398,), delta=5, loop_length=2400),
    ],
)
def test_invalid_networks_rejected(kwargs):
    with pytest.raises(ValidationError):
        LoopNetwork(**kwargs)


def test_stop_windows(net):
    assert stop_window(net, 2) == (1195, 1205)
    assert stop_window(net, 4) == (2395, 2405)
    assert stop_window(net, 0) == (2395, 2405)
    assert in_window(net, 1, 595)
    assert not in_window(net, 1, 605)
    with pytest.raises(OutOfRangeError):
        stop_window(net, 5)


def test_windows_disjoint_and_inside_loop(net):
    wins = [stop_window(net, m) for m in range(1, net.depot_stop + 1)]
    for (_, hi), (lo, _) in zip(wins, wins[1:]):
        assert hi <= lo
    assert wins[0][0] >= 0
    assert wins[-1][1] <= net.loop_length + net.delta


def test_timetable_lookup(tt):
    assert tt.departure_s(0) == 0
    assert tt.departure_s(1) == 150
    assert tt.arrival_s(3) == 420
    assert tt.departure_s(4) == 570
    with pytest.raises(OutOfRangeError):
        tt.departure_s(5)


@pytest.mark.parametrize(
    "entries, ret",
    [(((150, 120),), 300), (((120, 150), (140, 200)), 300), (((120, 150),), 100)],
)
def test_invalid_timetables_rejected(entries, ret):
    with pytest.raises(ValidationError):
        Timetable(entries, ret)


def test_timetable_row_count_must_match(net, params):
    with pytest.raises(ValidationError, match="rows"):
        check_compatible(net, Timetable(((120, 150),), 600), params)


@pytest.mark.parametrize(
    "field, value",
    [
        ("traffic_factor", 0),
        ("lam", 0),
        ("lam", 0.3),
        ("boarding_rate", 0),
        ("bus_capacity", 0),
        ("weights", (1, -1, 0)),
        ("desired_speed_range", (1, 2)),
        ("desired_speed_range", (0.25, 1)),
        ("fleet_size", 0),
    ],
)
def test_params_validation_names_the_field(field, value):
    with pytest.raises(ValidationError) as info:
        ScenarioParams(**{field: value})
    assert info.value.field == f"params.{field}"


def test_speed_set(params):
    assert params.speeds == (0, 0.5, 1.0, 1.5, 2.0)
    assert params.nominal_speed == 5
