"""End-to-end runs: partition, ordering, timed schedule, validation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .baselines import solve_gwa_ddiscrete, solve_gwa_nodvfs, to_partition
from .model import DEFAULT_TICK, Platform, TaskSpec, build_major_grid, expand_periodic, hyperperiod, taskset_stats
from .ordering import order_partition
from .partition import WorkloadPartition, reduce_intercluster, solve_lp_dvfs, solve_nlp_dvfs
from .validate import Schedule, ScheduleReport, expand_schedule, validate

ALGORITHMS = ("lp-dvfs", "nlp-dvfs", "gwa-ddiscrete", "gwa-nodvfs")


@dataclass
class RunResult:
    algorithm: str
    status: str
    partition: Optional[WorkloadPartition] = None
    schedule: Optional[Schedule] = None
    report: Optional[ScheduleReport] = None
    energy: Optional[float] = None      # optimiser's total energy (mJ)
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.partition is not None

    @property
    def passed(self) -> bool:
        return self.report is not None and self.report.passed


def horizon_for(taskset: Sequence[TaskSpec], tick=DEFAULT_TICK) -> float:
    """Hyperperiod of a periodic set, latest deadline of an aperiodic one."""
    if all(t.periodic for t in taskset):
        return hyperperiod(taskset, tick)
    return max(t.arrival + t.deadline for t in taskset)


def jobs_for(taskset: Sequence[TaskSpec], platform: Platform, tick=DEFAULT_TICK) -> list:
    """Periodic tasks unrolled over their hyperperiod; aperiodic ones as is."""
    periodic = [t for t in taskset if t.periodic]
    if periodic and len(periodic) == len(taskset):
        return expand_periodic(taskset, hyperperiod(taskset, tick), platform.f_max, tick)
    if periodic:
        raise ValueError("mixing periodic and aperiodic tasks is not supported")
    return expand_periodic(taskset, max(t.arrival + t.deadline for t in taskset), platform.f_max, tick)


def explain_infeasible(taskset: Sequence[TaskSpec], jobs: Sequence, platform: Platform) -> str:
    """Name the first bound that rules the taskset out."""
    top = max(t.s_max for t in platform.types)
    for job in jobs:
        if job.min_exec_time > top * job.window + 1e-12:
            return (f"job {job.id} needs {job.min_exec_time:g} s at full speed but its window "
                    f"is {job.window:g} s")
    stats = taskset_stats(taskset, platform)
    if stats.density > stats.capacity + 1e-12:
        return f"taskset density D={stats.density:g} exceeds system capacity C={stats.capacity:g}"
    grid = build_major_grid(jobs, horizon_for(taskset, jobs[0].tick))
    ticks = grid.ticks
    for a in range(len(ticks)):
        for b in range(a + 1, len(ticks)):
            demand = sum(j.min_exec_time for j in jobs
                         if j.release_ticks >= ticks[a] and j.deadline_ticks <= ticks[b])
            span = float((ticks[b] - ticks[a]) * grid.tick)
            if demand > stats.capacity * span + 1e-12:
                return (f"demand {demand:g} s of jobs confined to [{float(ticks[a] * grid.tick):g}, "
                        f"{float(ticks[b] * grid.tick):g}) exceeds capacity C*span = "
                        f"{stats.capacity * span:g}")
    return "no feasible workload partition (per-core speed limits bind)"


def run_algorithm(taskset: Sequence[TaskSpec], platform: Platform, algorithm: str,
                  nlp_grid_points: int = 17, tick=DEFAULT_TICK) -> RunResult:
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    jobs = jobs_for(taskset, platform, tick)
    if algorithm in ("lp-dvfs", "nlp-dvfs"):
        grid = build_major_grid(jobs, horizon_for(taskset, tick))
        if algorithm == "lp-dvfs":
            part = solve_lp_dvfs(jobs, grid, platform)
        else:
            part = solve_nlp_dvfs(jobs, grid, platform, nlp_grid_points)
        if not part.feasible:
            return RunResult(algorithm, part.status, reason=explain_infeasible(taskset, jobs, platform))
        energy = part.total_energy
        part = reduce_intercluster(part)
    else:
        solver = solve_gwa_ddiscrete if algorithm == "gwa-ddiscrete" else solve_gwa_nodvfs
        alloc, energy = solver(taskset, platform, tick)
        if not alloc.feasible:
            return RunResult(algorithm, alloc.status, reason=explain_infeasible(taskset, jobs, platform))
        part = to_partition(alloc, tick)
    schedule = expand_schedule(part, order_partition(part))
    report = validate(schedule, part.jobs, platform if algorithm != "nlp-dvfs" else None)
    return RunResult(algorithm, part.status, part, schedule, report, energy)
