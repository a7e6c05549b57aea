"""Self-checks: look-ahead DP against the exhaustive oracle, and an invariant fuzz."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EpisodeInvariantError
from .harness import run_episode
from .network import LoopNetwork, ScenarioParams, Timetable
from .passengers import DemandSchedule, DiscreteCmf
from .scenario import Scenario, default_scenario
from .dynamics import initial_state
from .solver import SolverConfig, dp_lookahead, exhaustive_oracle


def _random_cmf(rng: random.Random) -> DiscreteCmf:
    """One point mass or a two-outcome law on {1, 2}."""
    if rng.random() < 0.4:
        return DiscreteCmf((1,), (Fraction(1),))
    return DiscreteCmf((1, 2), (Fraction(rng.randint(1, 9), 10), Fraction(1)))


def tiny_scenario(rng: random.Random, max_horizon: int | None = None) -> Scenario:
    """A random two-stop loop (one stop plus the depot return) with exact rational numbers.

    Half the instances use the default half-unit speed grid on loops up to
    250 m and T <= 50. The rest use a unit speed grid, whose smaller trees
    allow loops up to 400 m and T <= 80.
    """
    c = 5
    coarse = rng.random() < 0.5
    loops = (150, 200, 250, 300, 350, 400) if coarse else (100, 150, 200, 250)
    limit = max_horizon if max_horizon is not None else (80 if coarse else 50)
    while True:
        loop = rng.choice(loops)
        stop = 5 * rng.randint(loop // 15, 2 * loop // 15)
        leg1 = stop // c + rng.randint(0, 4)
        dwell = rng.randint(0, 8)
        leg2 = (loop - stop) // c + rng.randint(0, 4)
        horizon = leg1 + dwell + leg2
        if horizon <= limit:
            break
    if coarse:
        speeds = dict(speed_step=1, max_speed=2, lam=1, desired_speed_range=(1, 1))
    else:
        half = Fraction(1, 2)
        speeds = dict(speed_step=half, max_speed=2, lam=half, desired_speed_range=(Fraction(1), Fraction(3, 2)))
    params = ScenarioParams(
        traffic_factor=c,
        boarding_rate=1,
        bus_capacity=rng.randint(3, 10),
        weights=(Fraction(1), Fraction(rng.randint(0, 20), 100), Fraction(rng.randint(0, 5), 100)),
        **speeds,
    )
    demand = DemandSchedule(
        arrival_cmf=_random_cmf(rng),
        alight_cmf=_random_cmf(rng),
        arrival_period=rng.choice((5, 10, 15, 20, 30)),
        seed=rng.getrandbits(32),
    )
    return Scenario(
        network=LoopNetwork((stop,), 5, loop),
        timetable=Timetable(((leg1, leg1 + dwell),), horizon),
        params=params,
        demand=demand,
    )


@dataclass
class OracleReport:
    instances: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_oracle_equivalence(instances: int = 25, seed: int = 0) -> OracleReport:
    """Full-horizon look-ahead must reproduce the oracle's cost and action sequence exactly."""
    rng = random.Random(seed)
    report = OracleReport()
    for i in range(instances):
        sc = tiny_scenario(rng)
        root = initial_state(sc.network, sc.params)
        decision = dp_lookahead(root, SolverConfig(lookahead=sc.horizon), sc)
        cost, actions = exhaustive_oracle(root, sc.horizon, sc)
        report.instances += 1
        if decision.predicted_cost != cost or decision.plan != actions:
            report.mismatches.append(
                f"instance {i}: dp cost {decision.predicted_cost} plan {decision.plan} "
                f"vs oracle cost {cost} plan {actions}"
            )
    return report


@dataclass
class FuzzReport:
    episodes: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def fuzz_invariants(episodes: int = 100, base_seed: int = 0, scenario: Scenario | None = None, lookahead: int = 5) -> FuzzReport:
    """Run seeded episodes, alternating baseline and look-ahead policies, with strict checks."""
    sc = scenario or default_scenario()
    report = FuzzReport()
    for i in range(episodes):
        policy = "baseline" if i % 2 == 0 else "dp"
        seed = base_seed + i // 2
        try:
            run_episode(sc, policy, seed=seed, lookahead=lookahead, strict=True)
        except EpisodeInvariantError as exc:
            report.violations.append(f"{policy} seed {seed}: {exc}")
        report.episodes += 1
    return report
