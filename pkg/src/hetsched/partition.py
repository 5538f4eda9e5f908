"""Workload partitioning on the major grid.

For every grid interval, job, processor type and speed level the LP decides
``omega``: the fraction of the interval the job runs on that type at that
level. Remaining work ``x`` is kept as explicit variables so jobs whose
windows span several intervals can shift work between them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import JobInstance, MajorGrid, Platform, build_major_grid
from .simplexlp import (EQ, GE, LE, OPTIMAL, LinearProgram, solve,
                        to_basic)

SUPPORT_TOL = 1e-9


def speed_table(platform: Platform) -> np.ndarray:
    """``[type, level]`` speeds, zero padded to the longer speed set."""
    width = max(len(t.speeds) for t in platform.types)
    out = np.zeros((2, width))
    for r, t in enumerate(platform.types):
        out[r, :len(t.speeds)] = t.speeds
    return out


def cost_table(platform: Platform) -> np.ndarray:
    """``[type, level]`` active-minus-idle power (mW); padding is zero."""
    out = np.zeros_like(speed_table(platform))
    for r, t in enumerate(platform.types):
        out[r, :len(t.speeds)] = t.power(np.array(t.speeds)) - t.p_idle
    return out


@dataclass
class WorkloadPartition:
    jobs: list
    grid: Optional[MajorGrid]
    platform: Platform
    status: str
    # omega[interval, job, type, level]; zero outside each job's window
    omega: Optional[np.ndarray] = None
    # x[job, boundary]: remaining work (s at full speed) at each grid instant
    x: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL

    @property
    def speeds(self) -> np.ndarray:
        return speed_table(self.platform)

    @property
    def omega_type(self) -> np.ndarray:
        """Aggregate ``[interval, job, type]`` fractions (summed over levels)."""
        return self.omega.sum(axis=3)

    @property
    def work(self) -> np.ndarray:
        """``[interval, job]`` work done (s at full speed)."""
        h = self.grid.h
        return np.einsum("mjrq,rq->mj", self.omega, self.speeds) * h[:, None]

    @property
    def xi(self) -> np.ndarray:
        """``[interval, job]`` demanded average speed."""
        return self.work / self.grid.h[:, None]

    @property
    def objective(self) -> float:
        """Active-minus-idle energy (mJ), the quantity the LP minimises."""
        if not self.jobs:
            return 0.0
        return float(np.einsum("mjrq,rq,m->", self.omega, cost_table(self.platform), self.grid.h))

    @property
    def horizon(self) -> float:
        return self.grid.horizon if self.grid is not None else 0.0

    @property
    def total_energy(self) -> float:
        """Active plus idle energy over the grid horizon (mJ)."""
        return self.objective + self.platform.idle_power_total * self.horizon

    def nonzero_count(self, mu: int) -> int:
        return int(np.sum(self.omega[mu] > SUPPORT_TOL))

    def intercluster_jobs(self, mu: int) -> list:
        agg = self.omega_type[mu]
        both = (agg[:, 0] > SUPPORT_TOL) & (agg[:, 1] > SUPPORT_TOL)
        return [self.jobs[j].id for j in np.flatnonzero(both)]

    def active_jobs(self, mu: int) -> np.ndarray:
        return np.flatnonzero(self.work[mu] > SUPPORT_TOL * self.grid.h[mu])


@dataclass
class _Layout:
    omega_index: dict      # (mu, j, r, q) -> column
    x_index: dict          # (j, boundary) -> column


def build_lp_dvfs(jobs: Sequence[JobInstance], grid: MajorGrid, platform: Platform,
                  objective: bool = True) -> LinearProgram:
    """Time-indexed workload-partitioning LP. With ``objective=False`` the
    cost vector is zero (pure feasibility)."""
    h = grid.h
    names, lb, ub = [], [], []
    omega_index, x_index = {}, {}
    c = []
    costs = cost_table(platform)

    def add(name, lo, hi, cost=0.0):
        names.append(name)
        lb.append(lo)
        ub.append(hi)
        c.append(cost)
        return len(names) - 1

    windows = [grid.window(job) for job in jobs]
    # a type without cores contributes no columns
    types = [(r, t) for r, t in enumerate(platform.types) if t.cores > 0]
    for j, (job, win) in enumerate(zip(jobs, windows)):
        for mu in win:
            for r, ptype in types:
                for q in range(len(ptype.speeds)):
                    omega_index[mu, j, r, q] = add(
                        f"w[{mu},{job.id},{r},{q}]", 0.0, 1.0,
                        h[mu] * costs[r, q] if objective else 0.0)
        first, last = win.start, win.stop
        for k in range(first, last + 1):
            if k == first:
                lo = hi = job.min_exec_time
            elif k == last:
                lo = hi = 0.0
            else:
                lo, hi = 0.0, job.min_exec_time
            x_index[j, k] = add(f"x[{job.id},{k}]", lo, hi)

    n = len(names)
    rows, senses, rhs = [], [], []

    def row(coefs, sense, value):
        a = np.zeros(n)
        for col, v in coefs:
            a[col] += v
        rows.append(a)
        senses.append(sense)
        rhs.append(value)

    for j, (job, win) in enumerate(zip(jobs, windows)):
        for mu in win:
            # x[mu+1] - x[mu] + h * sum(omega * s) >= 0
            coefs = [(x_index[j, mu + 1], 1.0), (x_index[j, mu], -1.0)]
            for r, ptype in types:
                for q, s in enumerate(ptype.speeds):
                    coefs.append((omega_index[mu, j, r, q], h[mu] * s))
            row(coefs, GE, 0.0)
            row([(omega_index[mu, j, r, q], 1.0)
                 for r, ptype in types
                 for q in range(len(ptype.speeds))], LE, 1.0)
    for mu in range(grid.n_intervals):
        for r, ptype in types:
            coefs = [(col, 1.0) for (m_, j, r_, q), col in omega_index.items()
                     if m_ == mu and r_ == r]
            if coefs:
                row(coefs, LE, float(ptype.cores))

    A = np.array(rows) if rows else np.zeros((0, n))
    lp = LinearProgram(np.array(c), A, senses, np.array(rhs), np.array(lb), np.array(ub), names)
    lp.meta = _Layout(omega_index, x_index)
    return lp


def _unpack(lp: LinearProgram, values, jobs, grid, platform):
    layout = lp.meta
    width = speed_table(platform).shape[1]
    omega = np.zeros((grid.n_intervals, len(jobs), 2, width))
    for (mu, j, r, q), col in layout.omega_index.items():
        omega[mu, j, r, q] = values[col]
    np.clip(omega, 0.0, 1.0, out=omega)
    x = np.zeros((len(jobs), grid.n_intervals + 1))
    for (j, k), col in layout.x_index.items():
        x[j, k] = values[col]
    return omega, x


def tighten(partition: WorkloadPartition) -> WorkloadPartition:
    """Drop surplus execution so every job finishes exactly on its demand.

    Work beyond what is still outstanding is removed proportionally across the
    job's speed levels in that interval; the trajectory ``x`` is rebuilt with
    the balance holding as an equality.
    """
    if not partition.feasible or not partition.jobs:
        return partition
    omega = partition.omega.copy()
    grid = partition.grid
    speeds = partition.speeds
    h = grid.h
    x = np.zeros_like(partition.x)
    for j, job in enumerate(partition.jobs):
        win = grid.window(job)
        remaining = job.min_exec_time
        x[j, win.start] = remaining
        for mu in win:
            done = h[mu] * float(np.sum(omega[mu, j] * speeds))
            if done > remaining:
                omega[mu, j] *= remaining / done if done > 0 else 0.0
                done = remaining
            remaining = max(remaining - done, 0.0)
            x[j, mu + 1] = remaining
    return WorkloadPartition(partition.jobs, grid, partition.platform, partition.status,
                             omega, x, dict(partition.meta))


def solve_lp_dvfs(jobs: Sequence[JobInstance], grid: Optional[MajorGrid], platform: Platform,
                  objective: bool = True) -> WorkloadPartition:
    jobs = list(jobs)
    if not jobs:
        return WorkloadPartition([], grid, platform, OPTIMAL,
                                 np.zeros((0 if grid is None else grid.n_intervals, 0, 2, 1)),
                                 np.zeros((0, 1)))
    if grid is None:
        grid = build_major_grid(jobs)
    lp = build_lp_dvfs(jobs, grid, platform, objective)
    sol = solve(lp)
    if not sol.optimal:
        return WorkloadPartition(jobs, grid, platform, sol.status,
                                 meta={"iterations": sol.iterations})
    omega, x = _unpack(lp, sol.x, jobs, grid, platform)
    part = WorkloadPartition(jobs, grid, platform, OPTIMAL, omega, x,
                             {"iterations": sol.iterations, "lp_objective": sol.objective})
    part = tighten(part)
    if objective and _tiles_horizon(jobs, grid):
        part = tighten(balance_steady_state(part))
    return part


def _tiles_horizon(jobs, grid) -> bool:
    """True when each task's jobs cover the whole grid back to back, i.e. an
    implicit-deadline periodic taskset over its hyperperiod."""
    by_task = {}
    for job in jobs:
        by_task.setdefault(job.task_id, []).append(job)
    for group in by_task.values():
        group.sort(key=lambda j: j.release_ticks)
        if group[0].release_ticks != grid.ticks[0] or group[-1].deadline_ticks != grid.ticks[-1]:
            return False
        if any(a.deadline_ticks != b.release_ticks for a, b in zip(group, group[1:])):
            return False
        if len({round(j.min_exec_time, 12) for j in group}) != 1 or \
                len({j.deadline_ticks - j.release_ticks for j in group}) != 1:
            return False
    return True


def balance_steady_state(partition: WorkloadPartition) -> WorkloadPartition:
    """Replace each task's allocation by its time average over the horizon.

    Valid when every task's jobs tile the horizon: the average keeps each
    job's work, the per-job and per-type budgets, and (by linearity) the
    energy, while making the per-interval demand the same everywhere.
    """
    grid = partition.grid
    h = grid.h
    omega = partition.omega.copy()
    by_task = {}
    for j, job in enumerate(partition.jobs):
        by_task.setdefault(job.task_id, []).append(j)
    for members in by_task.values():
        avg = sum(np.einsum("m,mrq->rq", h, partition.omega[:, j]) for j in members) / grid.horizon
        for j in members:
            for mu in grid.window(partition.jobs[j]):
                omega[mu, j] = avg
    return WorkloadPartition(partition.jobs, grid, partition.platform, partition.status,
                             omega, partition.x.copy(), dict(partition.meta))


def check_feasibility(jobs: Sequence[JobInstance], grid: Optional[MajorGrid],
                      platform: Platform) -> bool:
    if not jobs:
        return True
    return solve_lp_dvfs(jobs, grid, platform, objective=False).feasible


def _interval_lp(partition: WorkloadPartition, mu: int, active: np.ndarray,
                 energy_pin: Optional[float] = None) -> tuple:
    """Per-interval LP with the demanded speeds frozen.

    Columns are ``omega[j, r, q]`` for the active jobs. Rows: one demand
    equality per job, one ``sum omega <= 1`` per job, one capacity row per
    type, and optionally ``energy == energy_pin``.
    """
    platform = partition.platform
    speeds = partition.speeds
    costs = cost_table(platform)
    h = partition.grid.h[mu]
    xi = partition.xi[mu]
    cols = [(j, r, q) for j in active for r, t in enumerate(platform.types) if t.cores > 0
            for q in range(len(t.speeds))]
    n = len(cols)
    c = np.array([h * costs[r, q] for j, r, q in cols])
    rows, senses, rhs = [], [], []
    for j in active:
        rows.append([speeds[r, q] if jj == j else 0.0 for jj, r, q in cols])
        senses.append(EQ)
        rhs.append(xi[j])
        rows.append([1.0 if jj == j else 0.0 for jj, r, q in cols])
        senses.append(LE)
        rhs.append(1.0)
    for r, t in enumerate(platform.types):
        if t.cores == 0:
            continue
        rows.append([1.0 if rr == r else 0.0 for jj, rr, q in cols])
        senses.append(LE)
        rhs.append(float(t.cores))
    if energy_pin is not None:
        rows.append(list(c))
        senses.append(EQ)
        rhs.append(energy_pin)
    lp = LinearProgram(c, np.array(rows), senses, np.array(rhs), np.zeros(n), np.ones(n))
    point = np.array([partition.omega[mu, j, r, q] for j, r, q in cols])
    return lp, cols, point


def _splits(values, cols) -> int:
    used = {}
    for v, (j, r, q) in zip(values, cols):
        if v > SUPPORT_TOL:
            used.setdefault(j, set()).add(r)
    return sum(1 for types in used.values() if len(types) == 2)


def reduce_intercluster(partition: WorkloadPartition, preserve_energy: bool = False) -> WorkloadPartition:
    """Move every interval's workload onto a vertex of its frozen-demand LP.

    Each interval is purified to a basic point (energy never rises), then the
    interval LP is also solved from scratch and that vertex is preferred when
    it is no worse in energy and has fewer jobs on both clusters; finally the
    same-energy face is searched for fewer split jobs. With
    ``preserve_energy`` an extra equality row pins the energy, so a
    non-optimal input (a baseline's allocation) keeps its cost exactly.
    """
    if not partition.feasible:
        raise ValueError("reduce_intercluster needs a feasible partition")
    if not partition.jobs:
        return partition
    _check_invariants(partition)
    omega = partition.omega.copy()
    for mu in range(partition.grid.n_intervals):
        active = partition.active_jobs(mu)
        if active.size == 0:
            continue
        current = float(np.sum(omega[mu] * cost_table(partition.platform))) * partition.grid.h[mu]
        lp, cols, point = _interval_lp(partition, mu, active, current if preserve_energy else None)
        point = np.clip(point, 0.0, 1.0)
        best = _repair(lp, point)
        best = to_basic(lp, best)
        if _splits(best, cols) > 1:
            sol = solve(lp)
            if sol.optimal and _splits(sol.x, cols) < _splits(best, cols) and \
                    lp.objective(sol.x) <= lp.objective(best) + 1e-9 * max(1.0, abs(current)):
                best = sol.x
        best = _consolidate(lp, cols, best)
        omega[mu] = 0.0
        for v, (j, r, q) in zip(best, cols):
            omega[mu, j, r, q] = max(v, 0.0) if v > 1e-13 else 0.0
    out = WorkloadPartition(partition.jobs, partition.grid, partition.platform, partition.status,
                            omega, partition.x.copy(), dict(partition.meta))
    return out


def _split_profile(values, cols) -> tuple:
    """``(jobs split with spare time, all split jobs)`` for an interval point."""
    share = {}
    for v, (j, r, q) in zip(values, cols):
        share.setdefault(j, [0.0, 0.0])[r] += max(v, 0.0)
    split = [j for j, v in share.items() if min(v) > SUPPORT_TOL]
    loose = [j for j in split if sum(share[j]) < 1.0 - SUPPORT_TOL]
    return len(loose), len(split), share, loose, split


def _consolidate(lp: LinearProgram, cols, point, rounds: int = 8):
    """Search the same-energy face for a vertex with fewer split jobs.

    Jobs on both clusters that leave part of the interval unused are the
    ones the ordering step cannot stack, so they are targeted first: each
    round minimises the time those jobs (or, failing that, all split jobs)
    spend on their minor cluster while holding energy at its current value,
    then tries the same for each such job on its own, on either cluster.
    A round is kept only if it lowers (loose splits, splits).
    """
    best = point
    energy = lp.objective(best)
    cap = energy + 1e-12 * max(1.0, abs(energy))
    A = np.vstack([lp.A, lp.c])
    senses = list(lp.senses) + [LE]
    b = np.append(lp.b, cap)
    for _ in range(rounds):
        n_loose, n_split, share, loose, split = _split_profile(best, cols)
        if n_loose <= 1 and n_split <= 1:
            break
        objectives = []
        for targets in (loose, split):
            if len(targets) > 1:
                minor = {j: int(np.argmin(share[j])) for j in targets}
                objectives.append({(j, minor[j]) for j in targets})
        # one job at a time, emptying its minor cluster first
        for targets in (loose, split):
            if len(targets) > 1:
                for j in targets:
                    minor = int(np.argmin(share[j]))
                    objectives += [{(j, minor)}, {(j, 1 - minor)}]
        improved = False
        for picked in objectives:
            c = np.array([1.0 if (j, r) in picked else 0.0 for j, r, q in cols])
            sol = solve(LinearProgram(c, A, senses, b, lp.lb, lp.ub))
            if not sol.optimal or not lp.is_feasible(sol.x, 1e-9):
                continue
            if _split_profile(sol.x, cols)[:2] < (n_loose, n_split):
                best = sol.x
                improved = True
                break
        if not improved:
            break
    return best


def _repair(lp: LinearProgram, point):
    """Project tiny LP round-off back inside the interval polytope."""
    if lp.is_feasible(point, 1e-9):
        return point
    sol = solve(LinearProgram(np.zeros(lp.n_vars), lp.A, lp.senses, lp.b, lp.lb, lp.ub))
    if lp.max_violation(point) > 1e-6 or not sol.optimal:
        raise ValueError("interval workload violates the partition constraints")
    # scale toward the feasible vertex just enough to restore feasibility
    for t in (1e-9, 1e-7, 1e-5, 1e-3):
        cand = (1 - t) * point + t * sol.x
        if lp.is_feasible(cand, 1e-9):
            return cand
    return sol.x


def _check_invariants(partition: WorkloadPartition, tol: float = 1e-7):
    om = partition.omega_type
    if np.any(partition.omega < -tol) or np.any(om.sum(axis=2) > 1 + tol):
        raise ValueError("partition breaks the per-job time budget")
    for r, t in enumerate(partition.platform.types):
        if np.any(om[:, :, r].sum(axis=1) > t.cores + tol):
            raise ValueError(f"partition exceeds the capacity of {t.name}")


def uniform_speed_grid(s_min: float, s_max: float, points: int) -> tuple:
    if points < 2:
        raise ValueError("grid_points must be at least 2")
    return tuple(float(v) for v in np.linspace(s_min, s_max, points))


def solve_nlp_dvfs(jobs: Sequence[JobInstance], grid: Optional[MajorGrid], platform: Platform,
                   grid_points: int) -> WorkloadPartition:
    """Continuous-speed partition via a uniform speed grid per type.

    Each type's speed range ``[min, max]`` of its declared speed set is
    replaced by ``grid_points`` evenly spaced levels (endpoints included).
    """
    sets = [uniform_speed_grid(t.s_min, t.s_max, grid_points) for t in platform.types]
    return solve_lp_dvfs(jobs, grid, platform.with_speeds(*sets))


def write_partition_csv(partition: WorkloadPartition, fh, interval_label: Optional[str] = None):
    """Rows ``interval_index, t_start, t_end, job_id, type, speed_level, omega``
    for every non-zero fraction."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["interval_index", "t_start", "t_end", "job_id", "type", "speed_level", "omega"])
    if not partition.feasible or not partition.jobs:
        return
    times = partition.grid.times
    names = [t.name for t in partition.platform.types]
    for mu, j, r, q in zip(*np.nonzero(partition.omega > SUPPORT_TOL)):
        w.writerow([interval_label if interval_label is not None else mu,
                    f"{times[mu]:.9g}", f"{times[mu + 1]:.9g}",
                    partition.jobs[j].id, names[r], q + 1,
                    f"{partition.omega[mu, j, r, q]:.12g}"])
