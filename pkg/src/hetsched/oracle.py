"""Exhaustive reference scheduler for tiny instances.

Time is cut into equal quanta; in every quantum each core either idles or
runs one released, unfinished job at one of its type's levels. A dynamic
programme over (quantum index, remaining work) finds the cheapest
assignment that finishes every job by its deadline. Work may overshoot (a
job finishing mid-quantum still occupies the whole quantum).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .model import JobInstance, Platform, ProcessorType, as_fraction, make_job

MAX_JOBS = 3
MAX_CORES = 2
MAX_LEVELS = 3
MAX_QUANTA = 8
WORK_TOL = 1e-9


@dataclass(frozen=True)
class QuantizedInstance:
    jobs: tuple
    platform: Platform
    quantum: float
    n_quanta: int

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))
        if len(self.jobs) > MAX_JOBS:
            raise ValueError(f"oracle limited to {MAX_JOBS} jobs, got {len(self.jobs)}")
        cores = sum(t.cores for t in self.platform.types)
        if cores > MAX_CORES:
            raise ValueError(f"oracle limited to {MAX_CORES} cores, got {cores}")
        for t in self.platform.types:
            if t.cores and len(t.speeds) > MAX_LEVELS:
                raise ValueError(f"oracle limited to {MAX_LEVELS} levels per type ({t.name})")
        if not 1 <= self.n_quanta <= MAX_QUANTA:
            raise ValueError(f"oracle limited to {MAX_QUANTA} quanta, got {self.n_quanta}")
        q = as_fraction(self.quantum)
        for job in self.jobs:
            for ticks in (job.release_ticks, job.deadline_ticks):
                if (ticks * job.tick / q).denominator != 1:
                    raise ValueError(f"quantum {self.quantum} does not divide the window of {job.id}")
            if job.deadline_ticks * job.tick > q * self.n_quanta:
                raise ValueError(f"job {job.id} ends after the oracle horizon")

    @classmethod
    def from_jobs(cls, jobs: Sequence[JobInstance], platform: Platform, quantum,
                  n_quanta: Optional[int] = None) -> "QuantizedInstance":
        """Horizon defaults to the latest deadline."""
        if n_quanta is None:
            end = max(j.deadline_ticks * j.tick for j in jobs)
            ratio = end / as_fraction(quantum)
            if ratio.denominator != 1:
                raise ValueError("quantum does not divide the latest deadline")
            n_quanta = int(ratio)
        return cls(tuple(jobs), platform, float(quantum), n_quanta)

    @property
    def horizon(self) -> float:
        return self.quantum * self.n_quanta


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    energy: Optional[float]
    states: int


def brute_force(instance: QuantizedInstance) -> OracleResult:
    """Minimum total energy (active plus idle, mJ) over all quantised
    schedules, or infeasible."""
    q = instance.quantum
    q_frac = as_fraction(q)
    jobs = instance.jobs
    cores = [r for r, t in enumerate(instance.platform.types) for _ in range(t.cores)]
    types = instance.platform.types
    release = [int(j.release_ticks * j.tick / q_frac) for j in jobs]
    deadline = [int(j.deadline_ticks * j.tick / q_frac) for j in jobs]

    # per core: idle plus every (job, level) choice; the job index is checked later
    options = []
    for r in cores:
        t = types[r]
        opts = [(None, 0.0, q * t.p_idle)]
        for s in t.speeds:
            opts.append(("run", s, q * float(t.power(s))))
        options.append(opts)

    visited = set()

    @lru_cache(maxsize=None)
    def best(k: int, remaining: tuple) -> Optional[float]:
        visited.add((k, remaining))
        for i, left in enumerate(remaining):
            if deadline[i] <= k and left > WORK_TOL:
                return None
        if k == instance.n_quanta:
            return 0.0
        ready = [i for i in range(len(jobs)) if release[i] <= k < deadline[i] and remaining[i] > WORK_TOL]
        choices = [None] + ready
        result = None
        for picks in itertools.product(choices, repeat=len(cores)):
            named = [p for p in picks if p is not None]
            if len(named) != len(set(named)):
                continue
            per_core = []
            for c, p in enumerate(picks):
                per_core.append(options[c][:1] if p is None else options[c][1:])
            for combo in itertools.product(*per_core):
                cost = 0.0
                left = list(remaining)
                for p, (_, s, e) in zip(picks, combo):
                    cost += e
                    if p is not None:
                        left[p] = max(0.0, left[p] - s * q)
                key = tuple(round(v, 12) for v in left)
                tail = best(k + 1, key)
                if tail is not None and (result is None or cost + tail < result):
                    result = cost + tail
        return result

    start = tuple(round(j.min_exec_time, 12) for j in jobs)
    energy = best(0, start)
    return OracleResult(energy is not None, energy, len(visited))


def random_tiny_platform(rng) -> Platform:
    """One or two cores, two levels per type, ARM-style power models."""
    big = int(rng.integers(0, 2))
    little = 1 if big == 0 else int(rng.integers(0, 2))
    return Platform((ProcessorType("big", big, (0.5, 1.0), 1063.9, 2.2, 95.9075, 70.0),
                     ProcessorType("LITTLE", little, (0.25, 0.5), 1103.17, 2.3034, 18.3549, 12.0)))


def representable_unit(platform: Platform) -> float:
    """Smallest work that every level of every populated type completes in
    a whole number of unit quanta."""
    num, den = 1, 0
    for t in platform.types:
        if not t.cores:
            continue
        for s in t.speeds:
            f = as_fraction(s)
            num = math.lcm(num, f.numerator)
            den = math.gcd(den, f.denominator)
    return float(num / den) if den else 1.0


def random_tiny_jobs(rng, platform: Platform, max_jobs: int = MAX_JOBS,
                     n_quanta: int = MAX_QUANTA) -> list:
    """Jobs on unit quanta with demands that are whole multiples of
    :func:`representable_unit`."""
    unit = representable_unit(platform)
    jobs = []
    for i in range(int(rng.integers(1, max_jobs + 1))):
        r = int(rng.integers(0, n_quanta // 2))
        d = int(rng.integers(r + 1, min(r + 5, n_quanta) + 1))
        jobs.append(make_job(f"J{i + 1}", r, d, unit * int(rng.integers(1, 4))))
    return jobs


def quantum_aligned(schedule, quantum: float, tol: float = 1e-9) -> bool:
    """True when every segment of a timed schedule starts and ends on a
    quantum boundary, i.e. the oracle can express it exactly."""
    for seg in schedule.segments:
        for t in (seg.start / quantum, seg.end / quantum):
            if abs(t - round(t)) > tol:
                return False
    return True


def lp_reference(jobs, platform: Platform):
    """LP-DVFS partition and its timed schedule for an oracle instance
    (``None`` schedule when infeasible)."""
    from .ordering import order_partition
    from .partition import reduce_intercluster, solve_lp_dvfs
    from .validate import expand_schedule

    part = solve_lp_dvfs(jobs, None, platform)
    if not part.feasible:
        return part, None
    part = reduce_intercluster(part)
    return part, expand_schedule(part, order_partition(part))
