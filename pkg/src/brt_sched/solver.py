"""Rolling look-ahead dynamic programming, an exhaustive oracle, and the timetable follower.

Inside the look-ahead tree the unknown arrivals are replaced by their
expectation (the stage cost is affine in the queues), so every tree node is a
single deterministic successor. Nodes reaching the same state at the same
depth are merged; the merge key quantises position to the ``c * speed_step``
grid on which all reachable positions lie.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .dynamics import BusState, Disturbance, is_returned, transition
from .errors import ConfigurationError, OracleTooLargeError
from .feasibility import feasible_controls
from .passengers import expected_alight, expected_arrivals, sampled_arrivals_mean
from .scenario import Scenario

TIE_BREAKS = ("lowest-speed",)
EXPECTATION_MODES = ("closed-form", "sampled")


@dataclass(frozen=True)
class SolverConfig:
    lookahead: int = 5
    horizon: int | None = None
    tie_break: str = "lowest-speed"
    expectation_mode: str = "closed-form"
    samples: int = 10_000

    def __post_init__(self):
        if self.lookahead < 1:
            raise ConfigurationError(f"lookahead must be >= 1, got {self.lookahead}")
        if self.horizon is not None and self.lookahead > self.horizon:
            raise ConfigurationError(f"lookahead {self.lookahead} exceeds horizon {self.horizon}")
        if self.tie_break not in TIE_BREAKS:
            raise ConfigurationError(f"unknown tie_break {self.tie_break!r}")
        if self.expectation_mode not in EXPECTATION_MODES:
            raise ConfigurationError(f"unknown expectation_mode {self.expectation_mode!r}")


@dataclass(frozen=True)
class PolicyDecision:
    chosen_speed: float
    predicted_cost: float
    expanded_nodes: int
    solve_time: float  # microseconds
    plan: tuple = ()


class TreeModel:
    """Deterministic surrogate of the demand used inside search trees."""

    def __init__(self, scenario: Scenario, mode: str = "closed-form", samples: int = 10_000):
        self.scenario = scenario
        self.mode = mode
        self.samples = samples
        self._arrivals = {}

    def arrivals(self, k: int) -> tuple:
        got = self._arrivals.get(k)
        if got is None:
            sc = self.scenario
            if self.mode == "sampled":
                got = sampled_arrivals_mean(sc.demand, k, sc.n_stops, self.samples)
            else:
                got = expected_arrivals(sc.demand, k, sc.n_stops)
            self._arrivals[k] = got
        return got

    def disturbance(self, state: BusState) -> Disturbance:
        sc = self.scenario
        alight = expected_alight(sc.demand, state.recent_stop + 1, state.onboard, sc.n_stops)
        return Disturbance(self.arrivals(state.clock), alight)

    def cost(self, state: BusState):
        """Stage cost of a successor state (queues already hold expected arrivals)."""
        sc = self.scenario
        p = sc.params
        a1, a2, a3 = p.weights
        total = a1 * sum(state.queues) + a2 * (sc.pd(state.clock) - state.position)
        if not is_returned(state, sc.network):
            lo, hi = p.desired_speed_range
            u = state.speed
            total += a3 * ((u - lo) ** 2 + (u - hi) ** 2)
        return total

    def successors(self, state: BusState):
        """(speed, child) pairs in ascending speed order."""
        sc = self.scenario
        controls = feasible_controls(state, sc.network, sc.timetable, sc.params)
        dist = self.disturbance(state)
        return [(u, transition(state, u, dist, sc.network, sc.params)) for u in controls.speeds]

    def key(self, state: BusState):
        """Hashable merge key. Rationals become (numerator, denominator) pairs,
        which hash far faster than ``Fraction`` objects."""
        grid = self.scenario.params.traffic_factor * self.scenario.params.speed_step
        s = state
        return (
            round(s.position / grid),
            _exact(s.speed),
            s.recent_stop,
            _exact(s.capacity_free),
            tuple(map(_exact, s.queues)),
            s.alight_flag,
            s.clock,
            tuple(map(_exact, s.pending_arrivals)),
        )


def _exact(x):
    return (x.numerator, x.denominator) if isinstance(x, Fraction) else x


def dp_lookahead(state: BusState, config: SolverConfig, scenario: Scenario, model: TreeModel | None = None) -> PolicyDecision:
    """Solve the truncated finite-horizon problem rooted at ``state`` and return its first action.

    Depth is ``min(lookahead, T - k)``; past the horizon (bus still out
    during the grace period) the full look-ahead is used. Frontier and
    depot-return leaves are worth zero.
    """
    started = time.perf_counter()
    if model is None:
        model = TreeModel(scenario, config.expectation_mode, config.samples)
    horizon = scenario.horizon if config.horizon is None else config.horizon
    k = state.clock
    depth = min(config.lookahead, horizon - k) if k < horizon else config.lookahead

    if is_returned(state, scenario.network):
        return PolicyDecision(0, 0, 1, (time.perf_counter() - started) * 1e6, (0,))

    # forward pass: distinct states per layer, edges kept for the backward pass
    layers = [{model.key(state): state}]
    edges = []
    for _ in range(depth):
        nxt = {}
        layer_edges = {}
        for key, node in layers[-1].items():
            if is_returned(node, scenario.network):
                continue
            out = []
            for u, child in model.successors(node):
                ck = model.key(child)
                if ck not in nxt:
                    nxt[ck] = child
                out.append((u, ck))
            layer_edges[key] = out
        layers.append(nxt)
        edges.append(layer_edges)

    # backward pass; ties keep the first (lowest) speed
    value = {key: 0 for key in layers[-1]}
    best = []
    for j in range(depth - 1, -1, -1):
        stage = {ck: model.cost(child) for ck, child in layers[j + 1].items()}
        cur = {}
        choice = {}
        for key in layers[j]:
            out = edges[j].get(key)
            if out is None:
                cur[key] = 0
                continue
            best_v = None
            for u, ck in out:
                v = stage[ck] + value[ck]
                if best_v is None or v < best_v:
                    best_v, best_u, best_ck = v, u, ck
            cur[key] = best_v
            choice[key] = (best_u, best_ck)
        value = cur
        best.append(choice)
    best.reverse()

    plan = []
    key = model.key(state)
    for j in range(depth):
        step = best[j].get(key)
        if step is None:
            break
        plan.append(step[0])
        key = step[1]
    nodes = sum(len(layer) for layer in layers)
    elapsed = (time.perf_counter() - started) * 1e6
    return PolicyDecision(plan[0], value[model.key(state)], nodes, elapsed, tuple(plan))


def exhaustive_oracle(
    initial: BusState,
    horizon: int,
    scenario: Scenario,
    node_budget: int = 2_000_000,
    mode: str = "closed-form",
):
    """Exact minimum cost over every feasible control sequence up to ``horizon``.

    Depth-first with memoisation on the state (clock included), keyed like the
    look-ahead's merge key; the onboard count is implied by the free capacity. Uses the
    same expected-demand surrogate and the same lowest-speed tie-break as the
    look-ahead solver. Returns ``(cost, actions)``.
    """
    model = TreeModel(scenario, mode)
    if is_returned(initial, scenario.network) or initial.clock >= horizon:
        return 0, (0,)
    memo = {}

    def solve(node: BusState):
        if node.clock >= horizon or is_returned(node, scenario.network):
            return 0
        key = model.key(node)
        got = memo.get(key)
        if got is not None:
            return got[0]
        if len(memo) >= node_budget:
            raise OracleTooLargeError(f"more than {node_budget} states below clock {initial.clock}")
        best = None
        for u, child in model.successors(node):
            v = model.cost(child) + solve(child)
            if best is None or v < best[0]:
                best = (v, u, child)
        memo[key] = best
        return best[0]

    total = solve(initial)
    actions = []
    key = model.key(initial)
    while key in memo:
        _, u, node = memo[key]
        actions.append(u)
        key = model.key(node)
    return total, tuple(actions)


def baseline_policy(state: BusState, scenario: Scenario):
    """Timetable follower: the feasible speed landing closest to the next desired position.

    Ties go to the lower speed.
    """
    sc = scenario
    controls = feasible_controls(state, sc.network, sc.timetable, sc.params)
    target = sc.pd(state.clock + 1)
    c = sc.params.traffic_factor
    return min(controls.speeds, key=lambda w: (abs(state.position + w * c - target), w))
