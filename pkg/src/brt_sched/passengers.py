"""Seeded arrival and alighting demand.

Every random draw is keyed: the uniform behind the arrivals at stop ``m`` in
second ``k`` comes from a Philox4x64-10 counter-based generator with key
``(seed, stream)`` and counter ``(k, m, 0, 0)``. The 53 high bits of the
first 64-bit output give a double in [0, 1). Draws therefore do not depend on
call order, so two policies run with the same seed see the same demand no
matter how long their episodes are.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import BusState, Disturbance
from .errors import OutOfRangeError, ValidationError

ARRIVAL_STREAM = 1
ALIGHT_STREAM = 2
EXPECTATION_STREAM = 3
_U64 = (1 << 64) - 1

ARRIVAL_CMF = (0.14, 0.81, 0.97, 0.99, 1.0)
ALIGHT_CMF = (0.51, 0.77, 0.88, 0.95, 1.0)


@dataclass(frozen=True)
class DiscreteCmf:
    support: tuple
    cmf: tuple

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "cmf", tuple(self.cmf))
        if not self.cmf or len(self.support) != len(self.cmf):
            raise ValidationError("cmf", "support and cmf must be non-empty and the same length")
        prev = 0
        for p in self.cmf:
            if p < prev or p > 1:
                raise ValidationError("cmf", f"values must be non-decreasing within [0, 1], got {self.cmf}")
            prev = p
        if self.cmf[-1] != 1:
            raise ValidationError("cmf", f"last value must be exactly 1, got {self.cmf[-1]}")

    @classmethod
    def from_cmf(cls, cmf: Sequence, start: int = 1) -> "DiscreteCmf":
        return cls(tuple(range(start, start + len(cmf))), tuple(cmf))

    @property
    def pmf(self) -> tuple:
        return tuple(b - a for a, b in zip((0,) + self.cmf[:-1], self.cmf))

    @property
    def mean(self):
        return sum(v * p for v, p in zip(self.support, self.pmf))


@dataclass(frozen=True)
class DemandSchedule:
    """Arrival cadence and distributions.

    ``arrival_cmf`` is either one distribution shared by all stops or a tuple
    with one per stop. Arrivals are drawn at k = period, 2 period, ...; the
    initial queues are the state at k = 0.
    """

    arrival_cmf: object = DiscreteCmf.from_cmf(ARRIVAL_CMF)
    alight_cmf: DiscreteCmf = DiscreteCmf.from_cmf(ALIGHT_CMF)
    arrival_period: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.arrival_period < 1:
            raise ValidationError("demand.arrival_period", "must be >= 1")
        if not 0 <= self.seed <= _U64:
            raise ValidationError("demand.seed", "must fit in an unsigned 64-bit integer")
        if isinstance(self.arrival_cmf, (list, tuple)):
            object.__setattr__(self, "arrival_cmf", tuple(self.arrival_cmf))

    def arrival_cmf_for(self, m: int) -> DiscreteCmf:
        if isinstance(self.arrival_cmf, tuple):
            return self.arrival_cmf[m - 1]
        return self.arrival_cmf

    def with_seed(self, seed: int) -> "DemandSchedule":
        return DemandSchedule(self.arrival_cmf, self.alight_cmf, self.arrival_period, seed)


def sample_cmf(cmf: DiscreteCmf, r) -> object:
    """Inverse-CMF draw: the smallest support value whose CMF exceeds ``r``."""
    if not 0 <= r < 1:
        raise OutOfRangeError(f"uniform draw {r} outside [0, 1)")
    return cmf.support[bisect_right(cmf.cmf, r)]


def sample_cmf_many(cmf: DiscreteCmf, r: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(np.asarray(cmf.cmf, dtype=float), r, side="right")
    return np.asarray(cmf.support)[idx]


def keyed_uniform(seed: int, stream: int, a: int, b: int = 0) -> float:
    gen = np.random.Philox(key=[seed & _U64, stream], counter=[a, b, 0, 0])
    return (int(gen.random_raw()) >> 11) * 2.0**-53


def arrivals_due(schedule: DemandSchedule, k: int) -> bool:
    return k > 0 and k % schedule.arrival_period == 0


def sample_arrivals(schedule: DemandSchedule, k: int, n_stops: int) -> tuple:
    if not arrivals_due(schedule, k):
        return (0,) * n_stops
    return tuple(
        sample_cmf(schedule.arrival_cmf_for(m), keyed_uniform(schedule.seed, ARRIVAL_STREAM, k, m))
        for m in range(1, n_stops + 1)
    )


def alight_raw(schedule: DemandSchedule, m: int) -> object:
    """Untruncated alighting demand drawn for stop ``m`` on this trip."""
    return sample_cmf(schedule.alight_cmf, keyed_uniform(schedule.seed, ALIGHT_STREAM, m))


def alight_demand(schedule: DemandSchedule, m: int, onboard, n_stops: int):
    """Passengers leaving at stop ``m``. Everyone leaves at the depot return."""
    if m > n_stops:
        return 0
    if m == n_stops:
        return onboard
    return min(alight_raw(schedule, m), onboard)


def disturbance_at(k: int, state: BusState, schedule: DemandSchedule, n_stops: int) -> Disturbance:
    return Disturbance(
        arrivals=sample_arrivals(schedule, k, n_stops),
        alight=alight_demand(schedule, state.recent_stop + 1, state.onboard, n_stops),
    )


def expected_arrivals(schedule: DemandSchedule, k: int, n_stops: int) -> tuple:
    if not arrivals_due(schedule, k):
        return (0,) * n_stops
    return tuple(schedule.arrival_cmf_for(m).mean for m in range(1, n_stops + 1))


def expected_alight(schedule: DemandSchedule, m: int, onboard, n_stops: int):
    """E[min(A, onboard)] for stop ``m``."""
    if m > n_stops:
        return 0
    if m == n_stops:
        return onboard
    cmf = schedule.alight_cmf
    return sum(p * min(v, onboard) for v, p in zip(cmf.support, cmf.pmf))


def sampled_arrivals_mean(schedule: DemandSchedule, k: int, n_stops: int, samples: int) -> tuple:
    """Monte-Carlo counterpart of :func:`expected_arrivals`."""
    if not arrivals_due(schedule, k):
        return (0.0,) * n_stops
    out = []
    for m in range(1, n_stops + 1):
        rng = np.random.Generator(np.random.Philox(key=[schedule.seed & _U64, EXPECTATION_STREAM], counter=[k, m, 0, 0]))
        draws = sample_cmf_many(schedule.arrival_cmf_for(m), rng.random(samples))
        out.append(float(draws.mean()))
    return tuple(out)


def demand_digest(schedule: DemandSchedule, n_stops: int, until_k: int) -> str:
    """SHA-256 over every arrival draw up to ``until_k`` and the raw alighting draws."""
    h = hashlib.sha256()
    for k in range(until_k + 1):
        if arrivals_due(schedule, k):
            h.update(repr((k, sample_arrivals(schedule, k, n_stops))).encode())
    for m in range(1, n_stops):
        h.update(repr((m, alight_raw(schedule, m))).encode())
    return h.hexdigest()
