"""Episode runner, paired Monte-Carlo batches, waiting-area metrics and result files."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Sequence

from .cost import stage_cost
from .dynamics import BusState, initial_state, is_returned, transition
from .errors import BrtSchedError, EpisodeInvariantError, ResultIOError
from .feasibility import DWELL_HOLD, feasible_controls
from .invariants import step_violations
from .passengers import alight_raw, demand_digest, disturbance_at
from .scenario import Scenario
from .solver import SolverConfig, TreeModel, baseline_policy, dp_lookahead

log = logging.getLogger(__name__)

RETURNED = "returned"
HORIZON_EXHAUSTED = "horizon-exhausted"


class TraceRow(NamedTuple):
    k: int
    position: float
    speed: float
    recent_stop: int
    capacity_free: float
    queues: tuple
    stage_cost: float
    regime: str
    solve_us: float


@dataclass
class EpisodeResult:
    policy: str
    lookahead: int | None
    seed: int
    trace: list
    per_stop_area: tuple
    total_cost: float
    step_timings: list
    expanded_nodes: list
    termination: str
    truncations: int = 0
    arrivals_seen: dict = field(default_factory=dict)
    alights_seen: dict = field(default_factory=dict)
    stream_digest: str = ""

    @property
    def final_clock(self) -> int:
        return self.trace[-1].k

    @property
    def label(self) -> str:
        return "baseline" if self.policy == "baseline" else f"dp{self.lookahead}"


def waiting_area(trace: Sequence[TraceRow], m: int):
    """Passenger-seconds waited at stop ``m`` (1-based): sum of queue counts over 1 s steps."""
    return sum(row.queues[m - 1] for row in trace)


def run_episode(
    scenario: Scenario,
    policy: str = "baseline",
    seed: int | None = None,
    lookahead: int = 5,
    strict: bool = True,
    config: SolverConfig | None = None,
) -> EpisodeResult:
    """Drive one round trip until the bus stands in the depot-return window.

    The run stops at ``horizon + grace_s`` at the latest. With the same seed,
    every policy sees the same demand draws.
    """
    if policy not in ("baseline", "dp"):
        raise ValueError(f"unknown policy {policy!r}")
    sc = scenario if seed is None else scenario.with_seed(seed)
    seed = sc.demand.seed
    net, tt, params = sc.network, sc.timetable, sc.params
    n = net.n_stops
    if policy == "dp":
        config = config or SolverConfig(lookahead=lookahead)
        lookahead = config.lookahead
        model = TreeModel(sc, config.expectation_mode, config.samples)
    else:
        lookahead = None

    solo = params if params.fleet_size == 1 else replace(params, fleet_size=1)
    state = initial_state(net, params)
    trace = []
    timings = []
    nodes = []
    truncations = 0
    arrivals_seen = {}
    alights_seen = {}
    termination = HORIZON_EXHAUSTED
    while True:
        k = state.clock
        cost = stage_cost([state], state.queues, k, tt, net, solo).total
        if is_returned(state, net) or k >= sc.max_clock:
            if is_returned(state, net):
                termination = RETURNED
            trace.append(_row(state, cost, DWELL_HOLD, 0.0))
            break

        controls = feasible_controls(state, net, tt, params)
        solve_us = 0.0
        if policy == "dp":
            decision = dp_lookahead(state, config, sc, model)
            u = decision.chosen_speed
            solve_us = decision.solve_time
            timings.append(solve_us)
            nodes.append(decision.expanded_nodes)
        else:
            u = baseline_policy(state, sc)
        trace.append(_row(state, cost, controls.regime, solve_us))
        if u not in controls.speeds:
            raise EpisodeInvariantError(k, f"control {u} not in feasible set {controls.speeds}", seed)

        dist = disturbance_at(k, state, sc.demand, n)
        if any(dist.arrivals):
            arrivals_seen[k] = dist.arrivals
        target = state.recent_stop + 1
        if target < n and target not in alights_seen:
            alights_seen[target] = alight_raw(sc.demand, target)
        try:
            new = transition(state, u, dist, net, params, strict=strict)
        except BrtSchedError as exc:
            raise EpisodeInvariantError(k, str(exc), seed) from exc
        if new.recent_stop == target and u == 0 and target < n and alights_seen[target] > state.onboard:
            truncations += 1
        problems = step_violations(state, u, dist, new, sc)
        if problems:
            if strict:
                raise EpisodeInvariantError(k, "; ".join(problems), seed)
            log.warning("k=%s: %s", k, "; ".join(problems))
        state = new

    area = tuple(waiting_area(trace, m) for m in range(1, n + 1))
    return EpisodeResult(
        policy=policy,
        lookahead=lookahead,
        seed=seed,
        trace=trace,
        per_stop_area=area,
        total_cost=sum(r.stage_cost for r in trace),
        step_timings=timings,
        expanded_nodes=nodes,
        termination=termination,
        truncations=truncations,
        arrivals_seen=arrivals_seen,
        alights_seen=alights_seen,
        stream_digest=demand_digest(sc.demand, n, sc.max_clock),
    )


def _row(state: BusState, cost, regime: str, solve_us) -> TraceRow:
    return TraceRow(
        state.clock, state.position, state.speed, state.recent_stop, state.capacity_free, state.queues, cost, regime, solve_us
    )


def paired_streams_agree(a: EpisodeResult, b: EpisodeResult) -> bool:
    """Whether two episodes consumed identical demand wherever both ran."""
    common = min(a.final_clock, b.final_clock)
    arr_a = {k: v for k, v in a.arrivals_seen.items() if k < common}
    arr_b = {k: v for k, v in b.arrivals_seen.items() if k < common}
    shared = a.alights_seen.keys() & b.alights_seen.keys()
    return arr_a == arr_b and all(a.alights_seen[m] == b.alights_seen[m] for m in shared)


# -- batches -----------------------------------------------------------------


@dataclass
class BatchSummary:
    runs: int
    seeds: list
    la_values: list
    area_mean: dict = field(default_factory=dict)
    area_max: dict = field(default_factory=dict)
    area_min: dict = field(default_factory=dict)
    improvement_pct: dict = field(default_factory=dict)
    improvement_by_seed: dict = field(default_factory=dict)
    timing_mean_us: dict = field(default_factory=dict)
    timing_max_us: dict = field(default_factory=dict)
    nodes_mean: dict = field(default_factory=dict)
    cost_mean: dict = field(default_factory=dict)
    records: list = field(default_factory=list)


def _improvement(opt, base) -> float:
    if base == 0:
        return 0.0 if opt == 0 else -math.inf
    return 100.0 * (1 - opt / base)


def _episode_task(args):
    scenario, policy, la, seed = args
    return run_episode(scenario, policy, seed=seed, lookahead=la)


def episode_record(res: EpisodeResult) -> dict:
    timings = res.step_timings
    return {
        "policy": res.policy,
        "la": res.lookahead,
        "seed": res.seed,
        "per_stop_area": list(res.per_stop_area),
        "total_cost": res.total_cost,
        "termination": res.termination,
        "final_k": res.final_clock,
        "mean_solve_us": sum(timings) / len(timings) if timings else 0.0,
        "max_solve_us": max(timings) if timings else 0.0,
        "mean_nodes": sum(res.expanded_nodes) / len(res.expanded_nodes) if res.expanded_nodes else 0.0,
    }


def run_batch(
    scenario: Scenario,
    la_values: Sequence[int],
    runs_per_la: int,
    base_seed: int = 0,
    workers: int = 1,
) -> BatchSummary:
    """Paired baseline / look-ahead episodes over ``runs_per_la`` consecutive seeds.

    The baseline does not depend on the look-ahead, so it runs once per seed
    and is paired with every look-ahead value. ``workers > 1`` farms
    episodes out to processes; keep 1 when timings matter.
    """
    if runs_per_la < 0:
        raise ValueError("runs_per_la must be >= 0")
    seeds = [base_seed + i for i in range(runs_per_la)]
    tasks = [(scenario, "baseline", None, s) for s in seeds]
    tasks += [(scenario, "dp", la, s) for la in la_values for s in seeds]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_episode_task, tasks))
    else:
        results = [_episode_task(t) for t in tasks]

    summary = BatchSummary(runs=runs_per_la, seeds=seeds, la_values=list(la_values))
    if not results:
        return summary
    base = {r.seed: r for r in results if r.policy == "baseline"}
    groups = {"baseline": [base[s] for s in seeds]}
    for la in la_values:
        groups[f"dp{la}"] = [r for r in results if r.policy == "dp" and r.lookahead == la]
    for label, group in groups.items():
        areas = [r.per_stop_area for r in group]
        cols = list(zip(*areas))
        summary.area_mean[label] = [sum(c) / len(c) for c in cols]
        summary.area_max[label] = [max(c) for c in cols]
        summary.area_min[label] = [min(c) for c in cols]
        summary.cost_mean[label] = sum(r.total_cost for r in group) / len(group)
    for la in la_values:
        per_seed = [
            [_improvement(o, b) for o, b in zip(r.per_stop_area, base[r.seed].per_stop_area)]
            for r in groups[f"dp{la}"]
        ]
        summary.improvement_by_seed[la] = per_seed
        summary.improvement_pct[la] = [sum(c) / len(c) for c in zip(*per_seed)]
        timings = [t for r in groups[f"dp{la}"] for t in r.step_timings]
        nodes = [x for r in groups[f"dp{la}"] for x in r.expanded_nodes]
        summary.timing_mean_us[la] = sum(timings) / len(timings)
        summary.timing_max_us[la] = max(timings)
        summary.nodes_mean[la] = sum(nodes) / len(nodes)
    summary.records = [episode_record(r) for r in results]
    return summary


# -- result files ------------------------------------------------------------


def trace_columns(n_stops: int) -> list:
    return (
        ["k", "position_m", "speed", "recent_stop", "capacity_free"]
        + [f"n_stop_{m}" for m in range(1, n_stops + 1)]
        + ["stage_cost", "regime", "solve_us"]
    )


def _fmt(x):
    return repr(x) if isinstance(x, float) else str(x)


def _trace_dicts(result: EpisodeResult, timings: bool):
    """Trace rows as dicts. Wall-clock solve times are left out (None) unless
    ``timings`` is set, so reruns produce identical files."""
    n = len(result.per_stop_area)
    cols = trace_columns(n)
    for row in result.trace:
        solve = row.solve_us if timings else None
        values = [row.k, row.position, row.speed, row.recent_stop, row.capacity_free, *row.queues, row.stage_cost, row.regime, solve]
        yield dict(zip(cols, values))


def write_trace_csv(result: EpisodeResult, path, timings: bool = False) -> Path:
    path = Path(path)
    cols = trace_columns(len(result.per_stop_area))
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for rec in _trace_dicts(result, timings):
                writer.writerow(["" if rec[c] is None else _fmt(rec[c]) for c in cols])
    except OSError as exc:
        raise ResultIOError(f"{path}: {exc.strerror or exc}") from exc
    return path


def write_trace_jsonl(result: EpisodeResult, path, timings: bool = False) -> Path:
    path = Path(path)
    try:
        with path.open("w") as fh:
            for rec in _trace_dicts(result, timings):
                fh.write(json.dumps(rec) + "\n")
    except OSError as exc:
        raise ResultIOError(f"{path}: {exc.strerror or exc}") from exc
    return path


def read_trace_csv(path) -> list:
    """Parse a trace written by :func:`write_trace_csv` back into rows."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ResultIOError(f"{path}: {exc.strerror or exc}") from exc
    out = []
    for rec in rows:
        qcols = sorted((c for c in rec if c.startswith("n_stop_")), key=lambda c: int(c[7:]))
        out.append(
            TraceRow(
                int(rec["k"]),
                _num(rec["position_m"]),
                _num(rec["speed"]),
                int(rec["recent_stop"]),
                _num(rec["capacity_free"]),
                tuple(_num(rec[c]) for c in qcols),
                _num(rec["stage_cost"]),
                rec["regime"],
                _num(rec["solve_us"]) if rec["solve_us"] else None,
            )
        )
    return out


def _num(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


SUMMARY_COLUMNS = ["policy", "stop", "area_mean", "area_min", "area_max", "improvement_pct", "timing_mean_us", "timing_max_us", "nodes_mean"]


def write_batch(summary: BatchSummary, out_dir) -> list:
    """``records.jsonl`` (one line per policy, look-ahead and seed) and ``summary.csv``."""
    out_dir = Path(out_dir)
    rec_path = out_dir / "records.jsonl"
    sum_path = out_dir / "summary.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with rec_path.open("w") as fh:
            for rec in summary.records:
                fh.write(json.dumps(rec) + "\n")
        with sum_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SUMMARY_COLUMNS)
            for label, means in summary.area_mean.items():
                la = None if label == "baseline" else int(label[2:])
                for m, mean in enumerate(means, start=1):
                    writer.writerow(
                        [
                            label,
                            m,
                            _fmt(mean),
                            _fmt(summary.area_min[label][m - 1]),
                            _fmt(summary.area_max[label][m - 1]),
                            "" if la is None else _fmt(summary.improvement_pct[la][m - 1]),
                            "" if la is None else _fmt(summary.timing_mean_us[la]),
                            "" if la is None else _fmt(summary.timing_max_us[la]),
                            "" if la is None else _fmt(summary.nodes_mean[la]),
                        ]
                    )
    except OSError as exc:
        raise ResultIOError(f"{out_dir}: {exc.strerror or exc}") from exc
    return [rec_path, sum_path]


def emit_results(obj, out_dir, fmt: str = "csv", timings: bool = False) -> list:
    """Write an :class:`EpisodeResult` trace or a :class:`BatchSummary` under ``out_dir``.

    Trace files carry solver wall-clock times only with ``timings=True``.
    """
    out_dir = Path(out_dir)
    if isinstance(obj, BatchSummary):
        return write_batch(obj, out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ResultIOError(f"{out_dir}: {exc.strerror or exc}") from exc
    stem = f"trace_{obj.label}_seed{obj.seed}"
    if fmt == "csv":
        return [write_trace_csv(obj, out_dir / f"{stem}.csv", timings)]
    if fmt in ("jsonl", "json-lines"):
        return [write_trace_jsonl(obj, out_dir / f"{stem}.jsonl", timings)]
    raise ValueError(f"unknown format {fmt!r}")
