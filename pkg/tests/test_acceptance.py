"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``. The lines are printed
straight to the terminal, so they show up without ``-s``.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from brt_sched.harness import emit_results, read_trace_csv, run_batch, run_episode, waiting_area
from brt_sched.passengers import (
    ALIGHT_CMF,
    ARRIVAL_CMF,
    DemandSchedule,
    DiscreteCmf,
    expected_arrivals,
    sample_cmf_many,
    sampled_arrivals_mean,
)
from brt_sched.scenario import default_scenario
from brt_sched.verify import check_oracle_equivalence, fuzz_invariants

REFERENCE_IMPROVEMENT = (89, 37, 29, 21)  # target % improvement per stop
TOLERANCE_PP = 20


@pytest.fixture
def report(capsys):
    def emit(number: int, name: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
        return ok

    return emit


@pytest.fixture(scope="module")
def scenario():
    return default_scenario()


def test_criterion_1_oracle_equivalence(report):
    started = time.perf_counter()
    result = check_oracle_equivalence(instances=25, seed=2024)
    elapsed = time.perf_counter() - started
    ok = result.ok and result.instances >= 25 and elapsed < 60
    report(1, "oracle equivalence", ok, f"{result.instances - len(result.mismatches)}/{result.instances} exact matches in {elapsed:.1f} s (limit 60 s)")
    assert ok, result.mismatches


def test_criterion_2_waiting_area_improvement(report, scenario):
    started = time.perf_counter()
    summary = run_batch(scenario, [5], runs_per_la=20, base_seed=0)
    elapsed = time.perf_counter() - started
    per_seed = summary.improvement_by_seed[5]
    dominated = sum(all(x >= 0 for x in row) for row in per_seed)
    mean = summary.improvement_pct[5]
    positive = all(x > 0 for x in mean)
    decreasing = all(a > b for a, b in zip(mean, mean[1:]))
    close = all(abs(x - ref) <= TOLERANCE_PP for x, ref in zip(mean, REFERENCE_IMPROVEMENT))
    ok = dominated >= 19 and positive and decreasing and close and elapsed < 300
    detail = (
        f"mean improvement {', '.join(f'{x:.1f}' for x in mean)} % vs reference {REFERENCE_IMPROVEMENT}; "
        f"every stop improved in {dominated}/20 seeds; {elapsed:.0f} s"
    )
    report(2, "waiting-area improvement at LA=5", ok, detail)
    assert ok


def test_criterion_3_round_trip_time(report, scenario):
    ends = [run_episode(scenario, "baseline", seed=s) for s in range(20)]
    good = [r.termination == "returned" and 540 <= r.final_clock <= 600 for r in ends]
    ok = all(good)
    report(3, "baseline round trip", ok, f"{sum(good)}/20 seeds back at the depot within [540, 600] s (k = {sorted({r.final_clock for r in ends})})")
    assert ok


def test_criterion_4_solver_timing(report, scenario):
    las = [4, 5, 6, 7, 8, 9]
    summary = run_batch(scenario, las, runs_per_la=3, base_seed=100)
    mean_ms = summary.timing_mean_us[5] / 1000
    nodes = [summary.nodes_mean[la] for la in las]
    growing = all(a < b for a, b in zip(nodes, nodes[1:]))
    ok = mean_ms < 10 and growing
    report(
        4,
        "solver timing",
        ok,
        f"LA=5 mean {mean_ms:.2f} ms/step (limit 10 ms); mean nodes LA 4..9 = {', '.join(f'{n:.1f}' for n in nodes)}",
    )
    assert ok


def test_criterion_5_invariant_fuzz(report, scenario):
    result = fuzz_invariants(episodes=100, base_seed=500, scenario=scenario)
    report(5, "invariant fuzz", result.ok, f"{len(result.violations)} violations in {result.episodes} episodes")
    assert result.ok and result.episodes == 100, result.violations


def test_criterion_6_distribution_fidelity(report):
    rng = np.random.Generator(np.random.Philox(key=[6, 0]))
    worst = 0.0
    for raw in (ARRIVAL_CMF, ALIGHT_CMF):
        dist = DiscreteCmf.from_cmf(raw)
        draws = sample_cmf_many(dist, rng.random(100_000))
        empirical = [(draws <= v).mean() for v in dist.support]
        worst = max(worst, max(abs(e - c) for e, c in zip(empirical, dist.cmf)))
    sched = DemandSchedule(seed=6)
    exact = expected_arrivals(sched, 60, 4)
    sampled = sampled_arrivals_mean(sched, 60, 4, 10_000)
    rel = max(abs(s - e) / e for s, e in zip(sampled, exact))
    ok = worst <= 0.01 and rel <= 0.01
    report(6, "distribution fidelity", ok, f"max CMF error {worst:.4f} (limit 0.01); max mean error {100 * rel:.2f} % (limit 1 %)")
    assert ok


def test_criterion_7_determinism_and_round_trip(report, scenario, tmp_path):
    same_bytes = True
    exact_metrics = True
    for policy in ("baseline", "dp"):
        a = run_episode(scenario, policy, seed=77, lookahead=5)
        b = run_episode(scenario, policy, seed=77, lookahead=5)
        pa = emit_results(a, tmp_path / f"{policy}-a")[0]
        pb = emit_results(b, tmp_path / f"{policy}-b")[0]
        same_bytes &= pa.read_bytes() == pb.read_bytes()
        back = read_trace_csv(pa)
        exact_metrics &= tuple(waiting_area(back, m) for m in range(1, 5)) == a.per_stop_area
        exact_metrics &= sum(r.stage_cost for r in back) == a.total_cost
    ok = same_bytes and exact_metrics
    report(7, "determinism and round trip", ok, f"byte-identical traces: {same_bytes}; metrics recomputed exactly from CSV: {exact_metrics}")
    assert ok
