"""Global workload allocation (GWA) baselines.

Each task gets one constant split of its work across (type, level) pairs for
the whole hyperperiod. The DDiscrete variant chooses among all declared
levels; NoDVFS pins every type at its top speed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import DEFAULT_TICK, Platform, TaskSpec, build_major_grid, expand_periodic, hyperperiod
from .partition import (WorkloadPartition, cost_table, reduce_intercluster, speed_table,
                        tighten, SUPPORT_TOL)
from .simplexlp import EQ, LE, OPTIMAL, LinearProgram, solve


@dataclass
class GwaAllocation:
    tasks: list
    platform: Platform
    status: str
    horizon: float
    # y[task, type, level]: share of the task's work; density: time share it induces
    y: Optional[np.ndarray] = None
    density: Optional[np.ndarray] = None
    objective: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL

    @property
    def total_energy(self) -> Optional[float]:
        if not self.feasible:
            return None
        return self.objective + self.platform.idle_power_total * self.horizon


def _window(task: TaskSpec) -> float:
    return min(task.deadline, task.period)


def _solve_gwa(taskset: Sequence[TaskSpec], platform: Platform, tick=DEFAULT_TICK) -> GwaAllocation:
    tasks = list(taskset)
    L = hyperperiod(tasks, tick)
    speeds = speed_table(platform)
    costs = cost_table(platform)
    cols = [(i, r, q) for i in range(len(tasks)) for r, t in enumerate(platform.types)
            for q in range(len(t.speeds))]
    n = len(cols)
    # density of column (i, r, q) per unit y
    unit = np.array([tasks[i].exec_time(platform.f_max) / (speeds[r, q] * _window(tasks[i]))
                     for i, r, q in cols])
    active_time = np.array([L * _window(tasks[i]) / tasks[i].period for i, r, q in cols])
    c = np.array([active_time[k] * unit[k] * costs[r, q] for k, (i, r, q) in enumerate(cols)])
    rows, senses, rhs = [], [], []
    for i in range(len(tasks)):
        mask = np.array([1.0 if ii == i else 0.0 for ii, r, q in cols])
        rows.append(mask)
        senses.append(EQ)
        rhs.append(1.0)
        rows.append(mask * unit)
        senses.append(LE)
        rhs.append(1.0)
    for r, t in enumerate(platform.types):
        rows.append(np.array([unit[k] if rr == r else 0.0 for k, (ii, rr, q) in enumerate(cols)]))
        senses.append(LE)
        rhs.append(float(t.cores))
    lp = LinearProgram(c, np.array(rows), senses, np.array(rhs), np.zeros(n), np.ones(n))
    sol = solve(lp)
    if not sol.optimal:
        return GwaAllocation(tasks, platform, sol.status, L)
    y = np.zeros((len(tasks),) + speeds.shape)
    dens = np.zeros_like(y)
    for k, (i, r, q) in enumerate(cols):
        y[i, r, q] = sol.x[k]
        dens[i, r, q] = sol.x[k] * unit[k]
    return GwaAllocation(tasks, platform, OPTIMAL, L, y, dens, float(sol.objective))


def solve_gwa_ddiscrete(taskset: Sequence[TaskSpec], platform: Platform,
                        tick=DEFAULT_TICK) -> tuple:
    """``(allocation, total energy mJ or None)`` over the declared speed levels."""
    alloc = _solve_gwa(taskset, platform, tick)
    return alloc, alloc.total_energy


def pinned_platform(platform: Platform) -> Platform:
    return platform.with_speeds(*[(t.s_max,) for t in platform.types])


def solve_gwa_nodvfs(taskset: Sequence[TaskSpec], platform: Platform, tick=DEFAULT_TICK) -> tuple:
    """``(allocation, total energy mJ or None)`` with each type at its top speed."""
    alloc = _solve_gwa(taskset, pinned_platform(platform), tick)
    return alloc, alloc.total_energy


def to_partition(alloc: GwaAllocation, tick=DEFAULT_TICK) -> WorkloadPartition:
    """Spread each task's densities uniformly over every window of its jobs,
    then move each interval to a vertex at unchanged energy so the result
    can go through the same ordering and validation as LP-DVFS."""
    if not alloc.feasible:
        raise ValueError("cannot spread an infeasible allocation")
    jobs = expand_periodic(alloc.tasks, alloc.horizon, alloc.platform.f_max, tick)
    grid = build_major_grid(jobs, alloc.horizon)
    index = {t.id: i for i, t in enumerate(alloc.tasks)}
    omega = np.zeros((grid.n_intervals, len(jobs)) + alloc.density.shape[1:])
    for j, job in enumerate(jobs):
        for mu in grid.window(job):
            omega[mu, j] = alloc.density[index[job.task_id]]
    x = np.zeros((len(jobs), grid.n_intervals + 1))
    part = tighten(WorkloadPartition(jobs, grid, alloc.platform, OPTIMAL, omega, x))
    return reduce_intercluster(part, preserve_energy=True)


def write_allocation_csv(alloc: GwaAllocation, fh):
    """Partition CSV layout with ``interval_index`` set to ``hyperperiod``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["interval_index", "t_start", "t_end", "job_id", "type", "speed_level", "omega"])
    if not alloc.feasible:
        return
    names = [t.name for t in alloc.platform.types]
    for i, r, q in zip(*np.nonzero(alloc.density > SUPPORT_TOL)):
        w.writerow(["hyperperiod", "0", f"{alloc.horizon:.9g}", alloc.tasks[i].id, names[r], q + 1,
                    f"{alloc.density[i, r, q]:.12g}"])
