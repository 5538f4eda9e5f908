"""Tasks, jobs, two-type platforms and the deadline-partitioned time grid.

Times are held as integer ticks internally (default tick 1 ms) so that LCM and
grid de-duplication are exact; everything user facing is in seconds and mW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_TICK = Fraction(1, 1000)


def as_fraction(value) -> Fraction:
    """Exact rational for a user-supplied number (goes through ``str`` so
    decimal literals like 0.1 stay 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


def to_ticks(seconds, tick: Fraction = DEFAULT_TICK) -> int:
    """Convert seconds to an integer tick count; raise if not commensurable."""
    q = as_fraction(seconds) / tick
    if q.denominator != 1:
        raise ValueError(f"{seconds} s is not a whole number of {tick} s ticks")
    return int(q)


@dataclass(frozen=True)
class TaskSpec:
    """A periodic task (``period`` set) or an aperiodic one (``period=None``).

    Either ``cycles`` or ``min_exec_time`` must be given; the latter is the
    execution time at the maximum system frequency.
    """

    id: str
    deadline: float
    period: Optional[float] = None
    cycles: Optional[float] = None
    min_exec_time: Optional[float] = None
    arrival: float = 0.0

    def __post_init__(self):
        if self.cycles is None and self.min_exec_time is None:
            raise ValueError(f"task {self.id}: need cycles or min_exec_time")
        work = self.min_exec_time if self.min_exec_time is not None else self.cycles
        if work <= 0:
            raise ValueError(f"task {self.id}: execution demand must be positive")
        if self.deadline <= 0:
            raise ValueError(f"task {self.id}: deadline must be positive")
        if self.period is not None:
            if self.period <= 0:
                raise ValueError(f"task {self.id}: period must be positive")
            if self.deadline > self.period:
                raise ValueError(
                    f"task {self.id}: deadline {self.deadline} exceeds period "
                    f"{self.period} (constrained-deadline model)")
        if self.arrival < 0:
            raise ValueError(f"task {self.id}: arrival must be non-negative")

    @property
    def periodic(self) -> bool:
        return self.period is not None

    def exec_time(self, f_max: float = 1.0) -> float:
        """Minimum execution time in seconds."""
        if self.min_exec_time is not None:
            return float(self.min_exec_time)
        return float(self.cycles) / f_max

    def density(self, f_max: float = 1.0, speed: float = 1.0) -> float:
        window = self.deadline if self.period is None else min(self.deadline, self.period)
        return self.exec_time(f_max) / (speed * window)


@dataclass(frozen=True)
class JobInstance:
    id: str
    task_id: str
    release_ticks: int
    deadline_ticks: int
    min_exec_time: float
    tick: Fraction = DEFAULT_TICK

    def __post_init__(self):
        if self.deadline_ticks <= self.release_ticks:
            raise ValueError(f"job {self.id}: deadline must follow release")
        if self.min_exec_time <= 0:
            raise ValueError(f"job {self.id}: min_exec_time must be positive")

    @property
    def release(self) -> float:
        return float(self.release_ticks * self.tick)

    @property
    def deadline(self) -> float:
        return float(self.deadline_ticks * self.tick)

    @property
    def window(self) -> float:
        return float((self.deadline_ticks - self.release_ticks) * self.tick)


def make_job(id: str, release, deadline, min_exec_time: float,
             tick: Fraction = DEFAULT_TICK, task_id: Optional[str] = None) -> JobInstance:
    """Convenience constructor taking release/deadline in seconds."""
    return JobInstance(id, task_id if task_id is not None else id,
                       to_ticks(release, tick), to_ticks(deadline, tick),
                       float(min_exec_time), tick)


@dataclass(frozen=True)
class ProcessorType:
    """One cluster of identical cores with a discrete speed set and the
    power model ``alpha * s**beta + p_static`` (mW)."""

    name: str
    cores: int
    speeds: tuple
    alpha: float
    beta: float
    p_static: float
    p_idle: float

    def __post_init__(self):
        speeds = tuple(float(s) for s in self.speeds)
        object.__setattr__(self, "speeds", speeds)
        if self.cores < 0:
            raise ValueError(f"{self.name}: negative core count")
        if not speeds:
            raise ValueError(f"{self.name}: empty speed set")
        if any(b <= a for a, b in zip(speeds, speeds[1:])):
            raise ValueError(f"{self.name}: speeds must be strictly increasing")
        if speeds[0] <= 0 or speeds[-1] > 1:
            raise ValueError(f"{self.name}: speeds must lie in (0, 1]")
        if self.alpha <= 0 or self.beta < 1:
            raise ValueError(f"{self.name}: need alpha > 0 and beta >= 1")
        if self.p_idle >= self.power(speeds[0]):
            raise ValueError(f"{self.name}: idle power must be below the "
                             "lowest active power")

    @property
    def s_min(self) -> float:
        return self.speeds[0]

    @property
    def s_max(self) -> float:
        return self.speeds[-1]

    def power(self, s):
        return self.alpha * np.power(s, self.beta) + self.p_static


@dataclass(frozen=True)
class Platform:
    types: tuple
    f_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if len(self.types) != 2:
            raise ValueError("platform must have exactly two processor types")
        top = max(t.s_max for t in self.types)
        if not math.isclose(top, 1.0, abs_tol=1e-12):
            raise ValueError(f"fastest speed must be 1.0, got {top}")

    def __getitem__(self, r) -> ProcessorType:
        return self.types[r]

    @property
    def capacity(self) -> float:
        return sum(t.s_max * t.cores for t in self.types)

    @property
    def idle_power_total(self) -> float:
        """Power (mW) drawn by the whole platform when every core idles."""
        return sum(t.cores * t.p_idle for t in self.types)

    def with_cores(self, *cores) -> "Platform":
        return Platform(tuple(_replace(t, cores=c) for t, c in zip(self.types, cores)),
                        self.f_max)

    def with_speeds(self, *speed_sets) -> "Platform":
        return Platform(tuple(_replace(t, speeds=tuple(s)) for t, s in zip(self.types, speed_sets)),
                        self.f_max)


def _replace(ptype: ProcessorType, **changes) -> ProcessorType:
    from dataclasses import replace
    return replace(ptype, **changes)


@dataclass(frozen=True)
class MajorGrid:
    ticks: tuple
    tick: Fraction = DEFAULT_TICK

    def __post_init__(self):
        ticks = tuple(sorted(set(int(t) for t in self.ticks)))
        if len(ticks) < 2:
            raise ValueError("grid needs at least two boundaries")
        object.__setattr__(self, "ticks", ticks)

    @property
    def times(self) -> np.ndarray:
        return np.array([float(t * self.tick) for t in self.ticks])

    @property
    def h(self) -> np.ndarray:
        return np.array([float((b - a) * self.tick)
                         for a, b in zip(self.ticks, self.ticks[1:])])

    @property
    def n_intervals(self) -> int:
        return len(self.ticks) - 1

    @property
    def horizon(self) -> float:
        return float((self.ticks[-1] - self.ticks[0]) * self.tick)

    def index(self, ticks: int) -> int:
        try:
            return self.ticks.index(ticks)
        except ValueError:
            raise ValueError(f"instant {float(ticks * self.tick)} s is not a grid boundary") from None

    def window(self, job: JobInstance) -> range:
        """Interval indices covered by the job's [release, deadline) window."""
        return range(self.index(job.release_ticks), self.index(job.deadline_ticks))


@dataclass(frozen=True)
class TasksetStats:
    densities: tuple
    density: float
    capacity: float
    hyperperiod: Optional[float]


def hyperperiod(taskset: Sequence[TaskSpec], tick: Fraction = DEFAULT_TICK) -> float:
    if not taskset:
        raise ValueError("hyperperiod undefined for an empty taskset")
    if any(not t.periodic for t in taskset):
        raise ValueError("hyperperiod undefined: taskset contains aperiodic tasks")
    periods = [to_ticks(t.period, tick) for t in taskset]
    return float(reduce(math.lcm, periods) * tick)


def expand_periodic(taskset: Iterable[TaskSpec], horizon, f_max: float = 1.0,
                    tick: Fraction = DEFAULT_TICK) -> list:
    """Unroll tasks into jobs over ``[0, horizon)``. Aperiodic tasks pass
    through as a single job."""
    horizon_ticks = to_ticks(horizon, tick)
    jobs = []
    for task in taskset:
        x = task.exec_time(f_max)
        if not task.periodic:
            r = to_ticks(task.arrival, tick)
            jobs.append(JobInstance(task.id, task.id, r, r + to_ticks(task.deadline, tick), x, tick))
            continue
        p = to_ticks(task.period, tick)
        d = to_ticks(task.deadline, tick)
        if horizon_ticks % p:
            raise ValueError(f"horizon {horizon} is not a multiple of task {task.id}'s period")
        for j in range(horizon_ticks // p):
            jobs.append(JobInstance(f"{task.id}#{j + 1}", task.id, j * p, j * p + d, x, tick))
    return jobs


def taskset_stats(taskset: Sequence[TaskSpec], platform: Platform,
                  tick: Fraction = DEFAULT_TICK) -> TasksetStats:
    densities = tuple(t.density(platform.f_max) for t in taskset)
    try:
        L = hyperperiod(taskset, tick)
    except ValueError:
        L = None
    return TasksetStats(densities, float(sum(densities)), platform.capacity, L)


def build_major_grid(jobs: Sequence[JobInstance], horizon=None) -> MajorGrid:
    """Distinct release and deadline instants, plus 0 and ``horizon`` (the
    hyperperiod for periodic sets) when given."""
    if not jobs:
        raise ValueError("cannot build a grid without jobs")
    tick = jobs[0].tick
    if any(j.tick != tick for j in jobs):
        raise ValueError("jobs use different tick sizes")
    points = {0}
    if horizon is not None:
        end = to_ticks(horizon, tick)
        if any(j.deadline_ticks > end for j in jobs):
            raise ValueError(f"a job ends after the horizon {horizon}")
        points.add(end)
    for j in jobs:
        points.add(j.release_ticks)
        points.add(j.deadline_ticks)
    return MajorGrid(tuple(points), tick)


def eval_power(platform: Platform, r: int, s):
    """Active power (mW) of a type-``r`` core at speed ``s``."""
    ptype = platform[r]
    arr = np.asarray(s, dtype=float)
    if np.any(arr < ptype.s_min - 1e-12) or np.any(arr > ptype.s_max + 1e-12):
        raise ValueError(f"speed {s} outside [{ptype.s_min}, {ptype.s_max}] for {ptype.name}")
    out = ptype.power(arr)
    return float(out) if out.ndim == 0 else out


def mape(predicted, measured) -> float:
    """Mean absolute percentage error, in percent."""
    predicted = np.asarray(predicted, dtype=float)
    measured = np.asarray(measured, dtype=float)
    return float(np.mean(np.abs(predicted - measured) / np.abs(measured)) * 100)
