"""Two-speed profiles: any speed trajectory over a discrete speed set can be
replaced by at most two speeds (adjacent on the lower convex hull of the
speed/power points) doing the same work for no more energy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

IDLE = 0.0


@dataclass(frozen=True)
class SpeedPoint:
    speed: float
    power: float


@dataclass(frozen=True)
class TwoSpeedProfile:
    """Run ``s_low`` for the first ``lam`` share of ``[t0, tf]`` and
    ``s_high`` for the rest. ``s_low == 0`` denotes idling."""

    s_low: float
    s_high: float
    lam: float
    t0: float = 0.0
    tf: float = 1.0

    @property
    def duration(self) -> float:
        return self.tf - self.t0

    @property
    def average_speed(self) -> float:
        return self.lam * self.s_low + (1.0 - self.lam) * self.s_high

    @property
    def work(self) -> float:
        return self.duration * self.average_speed

    def segments(self) -> list:
        """``(start, end, speed)`` pieces, lower speed first; empty pieces omitted."""
        cut = self.t0 + self.lam * self.duration
        out = []
        if cut > self.t0:
            out.append((self.t0, cut, self.s_low))
        if self.tf > cut:
            out.append((cut, self.tf, self.s_high))
        return out

    def energy(self, power: Callable, idle_power: float = 0.0) -> float:
        total = 0.0
        for a, b, s in self.segments():
            total += (b - a) * (idle_power if s == IDLE else float(power(s)))
        return total


def _cross(o: SpeedPoint, a: SpeedPoint, b: SpeedPoint) -> float:
    return (a.speed - o.speed) * (b.power - o.power) - (a.power - o.power) * (b.speed - o.speed)


def lower_hull(points: Sequence[SpeedPoint], keep_collinear: bool = False) -> list:
    """Lower convex envelope of the points, sorted by speed (monotone chain)."""
    pts = sorted(points, key=lambda p: p.speed)
    if not pts:
        raise ValueError("lower_hull needs at least one point")
    for a, b in zip(pts, pts[1:]):
        if a.speed == b.speed:
            raise ValueError(f"duplicate speed {a.speed}")
    hull = []
    for p in pts:
        while len(hull) >= 2:
            turn = _cross(hull[-2], hull[-1], p)
            scale = max(1.0, abs(hull[-1].power), abs(p.power))
            if turn < -1e-12 * scale or (not keep_collinear and abs(turn) <= 1e-12 * scale):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _points(speeds: Sequence[float], power) -> list:
    if callable(power):
        return [SpeedPoint(float(s), float(power(s))) for s in speeds]
    if len(power) != len(speeds):
        raise ValueError("speeds and powers differ in length")
    return [SpeedPoint(float(s), float(p)) for s, p in zip(speeds, power)]


def two_speed_for_demand(speeds: Sequence[float], power, demand: float,
                         t0: float = 0.0, tf: float = 1.0) -> TwoSpeedProfile:
    """Cheapest mixture of at most two set speeds averaging ``demand``.

    ``power`` is a callable or a sequence aligned with ``speeds``. Among
    equally cheap pairs the one with the smaller upper speed wins. A demand
    below the slowest speed runs at that speed and idles for the rest.
    """
    pts = _points(speeds, power)
    hull = lower_hull(pts, keep_collinear=True)
    lo, hi = hull[0].speed, hull[-1].speed
    if demand < 0:
        raise ValueError("demand must be non-negative")
    if demand > hi * (1 + 1e-12):
        raise ValueError(f"infeasible demand {demand} above the top speed {hi}")
    if demand == 0:
        return TwoSpeedProfile(IDLE, IDLE, 1.0, t0, tf)
    if demand < lo:
        return TwoSpeedProfile(IDLE, lo, 1.0 - demand / lo, t0, tf)
    demand = min(demand, hi)
    for a, b in zip(hull, hull[1:]):
        if a.speed <= demand <= b.speed:
            if demand == a.speed:
                return TwoSpeedProfile(a.speed, a.speed, 1.0, t0, tf)
            if demand == b.speed:
                return TwoSpeedProfile(b.speed, b.speed, 1.0, t0, tf)
            lam = (b.speed - demand) / (b.speed - a.speed)
            return TwoSpeedProfile(a.speed, b.speed, lam, t0, tf)
    return TwoSpeedProfile(hull[0].speed, hull[0].speed, 1.0, t0, tf)


def average_power(profile: TwoSpeedProfile, speeds: Sequence[float], power) -> float:
    table = {p.speed: p.power for p in _points(speeds, power)}
    table.setdefault(IDLE, 0.0)
    return profile.lam * table[profile.s_low] + (1 - profile.lam) * table[profile.s_high]


def compress_profile(profile: Sequence, speed_set: Sequence[float], power,
                     t0: float = 0.0) -> TwoSpeedProfile:
    """Replace a piecewise-constant trajectory by a one-switch profile.

    ``profile`` is a sequence of ``(duration, speed)`` pieces with speeds
    drawn from ``speed_set``. The result uses set speeds within the input's
    own speed range, does the same work and costs no more energy.
    """
    durations = np.array([float(d) for d, _ in profile])
    used = np.array([float(s) for _, s in profile])
    if durations.size == 0 or np.any(durations < 0):
        raise ValueError("profile needs pieces with non-negative durations")
    total = float(durations.sum())
    if total == 0:
        return TwoSpeedProfile(float(used[0]), float(used[0]), 1.0, t0, t0)
    for s in used:
        if min(abs(s - v) for v in speed_set) > 1e-12:
            raise ValueError(f"speed {s} is not in the declared set")
    work = float(durations @ used)
    lo, hi = used.min(), used.max()
    keep = [v for v in speed_set if lo - 1e-12 <= v <= hi + 1e-12]
    pts = _points(keep, power if callable(power) else
                  [p for v, p in zip(speed_set, power) if lo - 1e-12 <= v <= hi + 1e-12])
    out = two_speed_for_demand([p.speed for p in pts], [p.power for p in pts], work / total,
                               t0, t0 + total)
    return out
