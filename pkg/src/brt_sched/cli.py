"""Command-line entry point ``brt-sched``.

Exit codes: 0 success, 1 invalid input, 2 episode invariant violation (or a
failed self-check), 3 file I/O error.

Environment:
    BRT_SCHED_OUT      default output directory (``--out`` wins)
    BRT_SCHED_THREADS  worker processes for ``batch`` (``--workers`` wins)
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import BrtSchedError, EpisodeInvariantError, ResultIOError
from .harness import emit_results, run_batch, run_episode
from .scenario import default_scenario, load_scenario

EXIT_OK, EXIT_INVALID, EXIT_INVARIANT, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def parse_la(text: str) -> list:
    """``"5"``, ``"4..9"`` or ``"4,6,8"`` to a list of look-ahead steps."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad look-ahead {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"look-ahead values must be >= 1, got {text!r}")
    return values


def _default_out() -> str:
    return os.environ.get("BRT_SCHED_OUT", "results")


def _default_workers() -> int:
    raw = os.environ.get("BRT_SCHED_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="brt-sched", description="Single-loop BRT bus scheduling simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one episode and write its trace")
    run.add_argument("--scenario", help="TOML scenario file (default: built-in scenario)")
    run.add_argument("--policy", choices=("baseline", "dp"), default="dp")
    run.add_argument("--la", type=int, default=5, help="look-ahead steps for --policy dp")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default=None, help="output directory (env BRT_SCHED_OUT, else ./results)")
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    run.add_argument("--lenient", action="store_true", help="log capacity clamps instead of aborting")
    run.add_argument("--timings", action="store_true", help="write solver wall-clock times into solve_us")

    batch = sub.add_parser("batch", help="paired baseline / look-ahead Monte-Carlo runs")
    batch.add_argument("--scenario")
    batch.add_argument("--la", type=parse_la, default=[4, 5, 6, 7, 8, 9], help="e.g. 5, 4..9 or 4,6")
    batch.add_argument("--runs", type=int, default=20)
    batch.add_argument("--base-seed", type=int, default=0)
    batch.add_argument("--out", default=None)
    batch.add_argument("--workers", type=int, default=None, help="processes (env BRT_SCHED_THREADS, else 1)")

    ver = sub.add_parser("verify", help="oracle-equivalence and invariant self-checks")
    ver.add_argument("--instances", type=int, default=25)
    ver.add_argument("--episodes", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    return p


def _scenario(path):
    return load_scenario(path) if path else default_scenario()


def _cmd_run(args) -> int:
    sc = _scenario(args.scenario)
    res = run_episode(sc, args.policy, seed=args.seed, lookahead=args.la, strict=not args.lenient)
    paths = emit_results(res, args.out or _default_out(), args.format, timings=args.timings)
    area = ", ".join(f"{a}" for a in res.per_stop_area)
    print(f"{res.label} seed={res.seed}: {res.termination} at k={res.final_clock}; waiting area per stop: {area}")
    if res.step_timings:
        print(f"mean solve {sum(res.step_timings) / len(res.step_timings):.1f} us over {len(res.step_timings)} steps")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_batch(args) -> int:
    if args.runs < 0:
        raise BrtSchedError("--runs must be >= 0")
    sc = _scenario(args.scenario)
    workers = args.workers if args.workers is not None else _default_workers()
    summary = run_batch(sc, args.la, args.runs, args.base_seed, workers=max(1, workers))
    paths = emit_results(summary, args.out or _default_out())
    for la in summary.la_values:
        if la in summary.improvement_pct:
            imp = " ".join(f"{x:6.1f}" for x in summary.improvement_pct[la])
            print(f"LA={la}: improvement % per stop {imp}; mean solve {summary.timing_mean_us[la]:.0f} us")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import check_oracle_equivalence, fuzz_invariants

    oracle = check_oracle_equivalence(args.instances, args.seed)
    print(f"oracle equivalence: {oracle.instances - len(oracle.mismatches)}/{oracle.instances} instances agree")
    for line in oracle.mismatches:
        print(f"  {line}")
    fuzz = fuzz_invariants(args.episodes, args.seed)
    print(f"invariant fuzz: {len(fuzz.violations)} violations in {fuzz.episodes} episodes")
    for line in fuzz.violations:
        print(f"  {line}")
    return EXIT_OK if oracle.ok and fuzz.ok else EXIT_INVARIANT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "batch": _cmd_batch, "verify": _cmd_verify}[args.command]
    try:
        return handler(args)
    except EpisodeInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ResultIOError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BrtSchedError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
