"""Per-interval task ordering on two clusters (McNaughton wrap-around with
the type-2 cluster filled right to left).

Workloads are normalised to the interval: ``omega[task] = (w1, w2)`` is the
fraction of the interval the task runs on each cluster. The cluster of ``m``
cores is laid out as the number line ``[0, m)``; position ``p`` falls on core
``floor(p) + 1`` at normalised time ``p mod 1``. Cluster 1 is filled from 0
upwards, cluster 2 from ``m2`` downwards. A task that is on both clusters
with ``w1 + w2 == 1`` then occupies complementary arcs of ``[0, 1)``, and the
single task with ``w1 + w2 < 1`` sits between the two fronts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

ZERO_TOL = 1e-9
SUM_TOL = 1e-9
EDGE_TOL = 1e-12


class NeedsReduction(ValueError):
    """More than one task is split across clusters with spare time; run
    ``reduce_intercluster`` on the partition first."""


@dataclass
class IntervalClassification:
    im_a: list = field(default_factory=list)   # on both clusters, w1 + w2 == 1
    im_b: list = field(default_factory=list)   # on both clusters, w1 + w2 < 1
    cp_1: list = field(default_factory=list)   # cluster 1 only
    cp_2: list = field(default_factory=list)   # cluster 2 only

    @property
    def tasks(self) -> list:
        return self.im_a + self.im_b + self.cp_1 + self.cp_2


def classify(omega: Mapping, tol: float = SUM_TOL, zero_tol: float = ZERO_TOL,
             strict: bool = True) -> IntervalClassification:
    """Sort tasks with positive work into the four ordering groups.

    ``omega`` maps task id to ``(w1, w2)``; insertion order is kept inside
    each group. Raises :class:`NeedsReduction` when two or more tasks land in
    ``im_b`` and ``strict`` is set.
    """
    out = IntervalClassification()
    for task, (w1, w2) in omega.items():
        on1, on2 = w1 > zero_tol, w2 > zero_tol
        if on1 and on2:
            (out.im_a if abs(w1 + w2 - 1.0) <= tol else out.im_b).append(task)
        elif on1:
            out.cp_1.append(task)
        elif on2:
            out.cp_2.append(task)
    if strict and len(out.im_b) > 1:
        raise NeedsReduction(
            f"{len(out.im_b)} tasks ({', '.join(map(str, out.im_b))}) run on both "
            "clusters without filling the interval; at most one is allowed")
    return out


@dataclass(frozen=True)
class Window:
    """Half-open execution window ``[start, end)`` in normalised time."""

    task: object
    cluster: int        # 0 or 1
    core: int           # 1-based within the cluster
    start: float
    end: float
    level: Optional[int] = None

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass
class OrderedInterval:
    cores: tuple
    windows: list = field(default_factory=list)

    def task_windows(self, task) -> list:
        return [w for w in self.windows if w.task == task]

    def core_windows(self, cluster: int, core: int) -> list:
        return sorted((w for w in self.windows if w.cluster == cluster and w.core == core),
                      key=lambda w: w.start)

    def load(self, cluster: int, core: int) -> float:
        return sum(w.length for w in self.core_windows(cluster, core))

    def work(self, task, cluster: int) -> float:
        return sum(w.length for w in self.windows if w.task == task and w.cluster == cluster)


def _forward(core: int, t: float, pieces: Sequence, task, cluster: int, cores: int,
             out: list) -> tuple:
    """Lay ``pieces`` ((level, length) pairs) from in-core time ``t`` on the
    0-based ``core`` onwards, spilling onto the next core at time 1. Returns
    the end pointer with ``t`` in ``[0, 1)``. Overflow past the last core up
    to SUM_TOL (solver round-off) is dropped."""
    for level, length in pieces:
        left = length
        while left > EDGE_TOL:
            if core >= cores:
                if left <= SUM_TOL:
                    break
                raise ValueError(f"cluster {cluster + 1} over capacity while placing {task}")
            room = 1.0 - t
            if left <= room + EDGE_TOL:
                end = t + left
                if end > 1.0 - EDGE_TOL:
                    end = 1.0
                out.append(Window(task, cluster, core + 1, t, end, level))
                t, left = end, 0.0
            else:
                out.append(Window(task, cluster, core + 1, t, 1.0, level))
                left -= room
                core, t = core + 1, 0.0
            if t >= 1.0:
                core, t = core + 1, 0.0
    return core, t


def _backward(core: int, t: float, length: float) -> tuple:
    """Pointer ``length`` before ``(core, t)``, where ``t`` is in ``(0, 1]``
    and ``length`` at most 1."""
    if length <= t + EDGE_TOL:
        rest = t - length
        return core, rest if rest > EDGE_TOL else 0.0
    return core - 1, 1.0 - (length - t)


def _circular(d: float) -> float:
    """Map a difference of in-core times into [-0.5, 0.5)."""
    return d - math.floor(d + 0.5)


def _trim(pieces: list, amount: float) -> list:
    """Drop ``amount`` from the front of a piece list (round-off slivers)."""
    out = []
    for level, length in pieces:
        cut = min(amount, length)
        amount -= cut
        if length - cut > 0.0:
            out.append((level, length - cut))
    return out


def _pieces(task, cluster: int, total: float, levels: Optional[Mapping]) -> list:
    if levels is None or task not in levels:
        return [(None, total)]
    shares = [(q, float(v)) for q, v in enumerate(levels[task][cluster]) if v > 0.0]
    if not shares:
        return [(None, total)]
    return shares


def hetero_wrap(classification: IntervalClassification, omega: Mapping, m1: int, m2: int,
                levels: Optional[Mapping] = None) -> OrderedInterval:
    """Assign normalised windows to cores.

    ``omega`` maps task id to ``(w1, w2)``. ``levels`` optionally maps task id
    to a pair of per-level fraction sequences (one per cluster) summing to
    ``w1`` and ``w2``; a task's window is then split into sub-windows in
    ascending level order.
    """
    if len(classification.im_b) > 1:
        raise NeedsReduction(f"|IM_b| = {len(classification.im_b)} exceeds 1")
    tasks = classification.tasks
    for t in tasks:
        w1, w2 = omega[t]
        if w1 < -ZERO_TOL or w2 < -ZERO_TOL or w1 + w2 > 1.0 + SUM_TOL:
            raise ValueError(f"task {t}: per-task time budget violated "
                             f"(w1 + w2 = {w1 + w2:.12g} > 1)")
    for r, (m, group) in enumerate(((m1, classification.cp_1), (m2, classification.cp_2))):
        used = sum(omega[t][r] for t in classification.im_a + classification.im_b + group)
        if used > m + SUM_TOL:
            raise ValueError(f"cluster {r + 1}: load {used:.12g} exceeds {m} cores")

    out = OrderedInterval((m1, m2))
    starts, ends = {}, {}
    ptr = (0, 0.0)
    for t in classification.im_a + classification.im_b + classification.cp_1:
        w = omega[t][0]
        if w <= ZERO_TOL:
            continue
        starts[t] = ptr
        ptr = _forward(*ptr, _pieces(t, 0, w, levels), t, 0, m1, out.windows)
        ends[t] = ptr
    # cluster 2 fills from the right; in-core times stay in (0, 1] here.
    # A split task must end where its cluster-1 run starts and (when it fills
    # the interval) start where that run ends; round-off slivers that would
    # make the two overlap are removed.
    ptr = (m2 - 1, 1.0)
    for t in classification.im_a + classification.im_b + classification.cp_2:
        w = omega[t][1]
        if w <= ZERO_TOL:
            continue
        if t in starts:
            d = _circular(ptr[1] - starts[t][1])
            if 0.0 < d <= SUM_TOL:
                ptr = (ptr[0], ptr[1] - d)
                if ptr[1] <= 0.0:
                    ptr = (ptr[0] - 1, ptr[1] + 1.0)
        pieces = _pieces(t, 1, w, levels)
        start = _backward(*ptr, sum(v for _, v in pieces))
        if t in ends and t in classification.im_a:
            d = _circular(ends[t][1] - start[1])
            if 0.0 < d <= SUM_TOL:
                pieces = _trim(pieces, d)
                start = (start[0], start[1] + d) if start[1] + d < 1.0 else (start[0] + 1, start[1] + d - 1.0)
        if start[0] < 0:
            spill = (-start[0] - 1) + (1.0 - start[1])
            if spill > SUM_TOL:
                raise ValueError(f"cluster 2 over capacity while placing {t}")
            pieces = _trim(pieces, spill)
            start = (0, 0.0)
        first = len(out.windows)
        _forward(*start, pieces, t, 1, m2, out.windows)
        last = out.windows[-1]
        if len(out.windows) > first and last.core == ptr[0] + 1 and abs(last.end - ptr[1]) <= 1e-9:
            out.windows[-1] = Window(last.task, 1, last.core, last.start, ptr[1], last.level)
        ptr = start if start[1] > 0.0 else (start[0] - 1, 1.0)
    return out


def migration_counts(ordered: OrderedInterval) -> tuple:
    """``((intra_1, intra_2), inter)``: tasks on two or more cores of one
    cluster, and tasks on both clusters."""
    cores = {}
    for w in ordered.windows:
        if w.length > EDGE_TOL:
            cores.setdefault(w.task, set()).add((w.cluster, w.core))
    intra = [0, 0]
    inter = 0
    for used in cores.values():
        for r in (0, 1):
            if len({c for cl, c in used if cl == r}) >= 2:
                intra[r] += 1
        if {cl for cl, _ in used} == {0, 1}:
            inter += 1
    return tuple(intra), inter


def self_overlap(ordered: OrderedInterval, task) -> float:
    """Total time a task is scheduled on two cores at once (0 when valid)."""
    spans = sorted((w.start, w.end) for w in ordered.task_windows(task))
    overlap, reach = 0.0, -np.inf
    for a, b in spans:
        if a < reach:
            overlap += min(b, reach) - a
        reach = max(reach, b)
    return overlap


def order_partition(partition) -> list:
    """Run classification and ordering on every interval of a partition.

    Task ids are job indices into ``partition.jobs``; windows carry the speed
    level index.
    """
    out = []
    m1, m2 = (t.cores for t in partition.platform.types)
    for mu in range(partition.grid.n_intervals):
        omega = {}
        levels = {}
        for j in range(len(partition.jobs)):
            w = partition.omega[mu, j]
            agg = w.sum(axis=1)
            if agg.max(initial=0.0) <= ZERO_TOL:
                continue
            omega[j] = (float(agg[0]), float(agg[1]))
            levels[j] = (w[0], w[1])
        cls = classify(omega)
        out.append(hetero_wrap(cls, omega, m1, m2, levels))
    return out
