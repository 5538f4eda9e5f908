"""Timed schedules: expansion from ordered intervals, constraint checking,
energy accounting and Gantt/event export."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .model import Platform

WORK_TOL = 1e-7
TIME_TOL = 1e-9
SPEED_TOL = 1e-12
MERGE_TOL = 1e-12   # relative; fusing must never widen a segment by more than round-off


@dataclass(frozen=True)
class Segment:
    """Core ``(cluster, core)`` runs ``job`` at ``speed`` during ``[start, end)``."""

    cluster: int
    core: int
    start: float
    end: float
    job: str
    speed: float

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class Schedule:
    """Busy segments per core over ``[0, horizon)``; any uncovered time on a
    core is idle."""

    platform: Platform
    horizon: float
    segments: list = field(default_factory=list)

    def cores(self) -> list:
        return [(r, k) for r, t in enumerate(self.platform.types) for k in range(1, t.cores + 1)]

    def core_segments(self, cluster: int, core: int) -> list:
        return sorted((s for s in self.segments if s.cluster == cluster and s.core == core),
                      key=lambda s: s.start)

    def job_segments(self, job: str) -> list:
        return sorted((s for s in self.segments if s.job == job), key=lambda s: (s.start, s.cluster, s.core))


def _merge(segments: list) -> list:
    """Fuse abutting segments of the same job and speed on the same core."""
    out = []
    for seg in sorted(segments, key=lambda s: (s.cluster, s.core, s.start)):
        if out:
            prev = out[-1]
            if (prev.cluster, prev.core, prev.job) == (seg.cluster, seg.core, seg.job) and \
                    abs(prev.end - seg.start) <= MERGE_TOL * max(1.0, abs(seg.start)) and abs(prev.speed - seg.speed) <= SPEED_TOL:
                out[-1] = Segment(prev.cluster, prev.core, prev.start, seg.end, prev.job, prev.speed)
                continue
        out.append(seg)
    return out


def expand_schedule(partition, ordered: Sequence, grid=None, platform: Optional[Platform] = None) -> Schedule:
    """Scale each interval's normalised windows by its length and place them
    at the interval's start time."""
    grid = grid if grid is not None else partition.grid
    platform = platform if platform is not None else partition.platform
    if len(ordered) != grid.n_intervals:
        raise ValueError(f"{len(ordered)} ordered intervals for a grid of {grid.n_intervals}")
    speeds = partition.speeds
    times, h = grid.times, grid.h
    segments = []
    for mu, interval in enumerate(ordered):
        if tuple(interval.cores) != tuple(t.cores for t in platform.types):
            raise ValueError(f"interval {mu}: core counts do not match the platform")
        for w in interval.windows:
            if w.length <= 0:
                continue
            job = partition.jobs[w.task]
            level = w.level if w.level is not None else int(np.argmax(partition.omega[mu, w.task, w.cluster]))
            segments.append(Segment(w.cluster, w.core, times[mu] + w.start * h[mu],
                                    times[mu] + w.end * h[mu], job.id, float(speeds[w.cluster, level])))
    return Schedule(platform, grid.horizon, _merge(segments))


@dataclass
class FluidTrace:
    """Remaining minimum execution time per job at each of its event times."""

    times: dict
    remaining: dict

    def at_deadline(self, job_id: str) -> float:
        return self.remaining[job_id][-1]


def fluid_trace(schedule: Schedule, jobs: Sequence) -> FluidTrace:
    times, remaining = {}, {}
    for job in jobs:
        segs = [s for s in schedule.job_segments(job.id)]
        marks = sorted({job.release, job.deadline} | {s.start for s in segs} | {s.end for s in segs})
        marks = [t for t in marks if job.release - TIME_TOL <= t <= job.deadline + TIME_TOL]
        x = job.min_exec_time
        values = [x]
        for a, b in zip(marks, marks[1:]):
            done = sum(s.speed * max(0.0, min(s.end, b) - max(s.start, a)) for s in segs)
            x -= done
            values.append(x)
        times[job.id] = marks
        remaining[job.id] = values
    return FluidTrace(times, remaining)


@dataclass
class ScheduleReport:
    active_energy: float
    idle_energy: float
    total_energy: float
    intra_migrations: tuple
    inter_migrations: int
    preemptions: int
    deadline_misses: list            # (job id, residual work)
    violations: list                 # human readable descriptions
    max_residual: float

    @property
    def passed(self) -> bool:
        return not self.deadline_misses and not self.violations


def energy(schedule: Schedule) -> tuple:
    """``(active, idle, total)`` in mJ over the schedule horizon."""
    active = 0.0
    busy = [0.0, 0.0]
    for s in schedule.segments:
        ptype = schedule.platform.types[s.cluster]
        active += s.duration * float(ptype.power(s.speed))
        busy[s.cluster] += s.duration
    idle = sum((t.cores * schedule.horizon - b) * t.p_idle
               for t, b in zip(schedule.platform.types, busy))
    return active, idle, active + idle


def count_context_switches(schedule: Schedule) -> tuple:
    """``(preemptions, (intra_1, intra_2), inter)``.

    A preemption is a gap in a job's execution that is later resumed. A job
    counts as an intra-cluster migrant of a type when it runs on two or more
    of its cores, and as an inter-cluster migrant when it runs on both types.
    """
    preemptions = 0
    intra = [0, 0]
    inter = 0
    jobs = sorted({s.job for s in schedule.segments})
    for job in jobs:
        segs = schedule.job_segments(job)
        reach = segs[0].end
        for s in segs[1:]:
            if s.start > reach + TIME_TOL:
                preemptions += 1
            reach = max(reach, s.end)
        used = {(s.cluster, s.core) for s in segs if s.duration > TIME_TOL}
        for r in (0, 1):
            if len({k for c, k in used if c == r}) >= 2:
                intra[r] += 1
        if {c for c, _ in used} == {0, 1}:
            inter += 1
    return preemptions, tuple(intra), inter


def _overlap(intervals: list) -> list:
    """Pairs of half-open intervals that overlap by more than TIME_TOL."""
    out = []
    intervals = sorted(intervals, key=lambda s: s.start)
    active = []
    for seg in intervals:
        active = [a for a in active if a.end > seg.start + TIME_TOL]
        for a in active:
            out.append((a, seg, min(a.end, seg.end) - seg.start))
        active.append(seg)
    return out


def validate(schedule: Schedule, jobs: Sequence, platform: Optional[Platform] = None,
             work_tol: float = WORK_TOL) -> ScheduleReport:
    """Check a timed schedule against the job set and report energy and
    overheads. Violations are collected, never raised."""
    platform = platform if platform is not None else schedule.platform
    violations = []
    residual = 0.0
    by_id = {j.id: j for j in jobs}

    for seg in schedule.segments:
        if seg.job not in by_id:
            violations.append(f"unknown job {seg.job} on {platform.types[seg.cluster].name}{seg.core}")
            continue
        ptype = platform.types[seg.cluster]
        if not 1 <= seg.core <= ptype.cores:
            violations.append(f"job {seg.job} on missing core {ptype.name}{seg.core}")
        if min(abs(seg.speed - s) for s in ptype.speeds) > SPEED_TOL:
            violations.append(f"job {seg.job} at illegal speed {seg.speed} on {ptype.name}")
        job = by_id[seg.job]
        outside = max(0.0, job.release - seg.start) + max(0.0, seg.end - job.deadline)
        if outside > TIME_TOL:
            residual = max(residual, outside)
            violations.append(f"job {seg.job} runs outside its window for {outside:.3g} s")
        if seg.start < -TIME_TOL or seg.end > schedule.horizon + TIME_TOL:
            violations.append(f"job {seg.job} runs outside the schedule horizon")

    for r, k in schedule.cores():
        for a, b, amount in _overlap(schedule.core_segments(r, k)):
            residual = max(residual, amount)
            violations.append(f"core {platform.types[r].name}{k} runs {a.job} and {b.job} "
                              f"together for {amount:.3g} s")
    for job in jobs:
        for a, b, amount in _overlap(schedule.job_segments(job.id)):
            residual = max(residual, amount)
            violations.append(f"job {job.id} runs on two cores at once for {amount:.3g} s")

    trace = fluid_trace(schedule, jobs)
    misses = []
    for job in jobs:
        left = trace.at_deadline(job.id)
        residual = max(residual, left)
        if left > work_tol:
            misses.append((job.id, left))

    active, idle, total = energy(schedule)
    pre, intra, inter = count_context_switches(schedule)
    return ScheduleReport(active, idle, total, intra, inter, pre, misses, violations, residual)


EVENT_HEADER = ["t_start", "t_end", "type", "proc", "job", "speed"]


def write_events_csv(schedule: Schedule, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EVENT_HEADER)
    for seg in sorted(schedule.segments, key=lambda s: (s.start, s.cluster, s.core)):
        w.writerow([f"{seg.start:.12g}", f"{seg.end:.12g}", schedule.platform.types[seg.cluster].name,
                    seg.core, seg.job, f"{seg.speed:.12g}"])


def job_color(job: str) -> str:
    """Stable colour for a job id."""
    digest = hashlib.md5(job.encode()).digest()
    hue = digest[0] / 255 * 360
    return f"hsl({hue:.0f},{55 + digest[1] % 25}%,{55 + digest[2] % 15}%)"


def gantt_svg(schedule: Schedule, width: int = 960, row: int = 28) -> str:
    """One row per core, one coloured bar per segment labelled with job and speed."""
    cores = schedule.cores()
    left, top = 90, 24
    span = max(schedule.horizon, 1e-12)
    scale = (width - left - 10) / span
    height = top + row * len(cores) + 30
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="10">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, (r, k) in enumerate(cores):
        y = top + i * row
        name = escape(f"{schedule.platform.types[r].name}{k}")
        parts.append(f'<text x="4" y="{y + row * 0.65:.1f}">{name}</text>')
        parts.append(f'<line x1="{left}" y1="{y + row - 2}" x2="{width - 10}" y2="{y + row - 2}" '
                     'stroke="#ccc"/>')
        for seg in schedule.core_segments(r, k):
            x = left + seg.start * scale
            w = max(seg.duration * scale, 0.5)
            label = escape(f"{seg.job} @{seg.speed:g}")
            parts.append(f'<rect x="{x:.2f}" y="{y + 2}" width="{w:.2f}" height="{row - 6}" '
                         f'fill="{job_color(seg.job)}" stroke="#333" stroke-width="0.3">'
                         f'<title>{label} [{seg.start:.6g}, {seg.end:.6g})</title></rect>')
            if w > 40:
                parts.append(f'<text x="{x + 2:.2f}" y="{y + row * 0.6:.1f}">{label}</text>')
    axis_y = top + row * len(cores) + 14
    for t in np.linspace(0, schedule.horizon, 6):
        parts.append(f'<text x="{left + t * scale:.1f}" y="{axis_y}" text-anchor="middle">{t:.4g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
