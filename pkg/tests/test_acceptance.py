"""The nine acceptance criteria, one test each, at their stated tolerances.

Every test prints a single ``criterion N: PASS/FAIL - detail`` line (also
collected in the terminal summary) before asserting.
"""

import time

import numpy as np
import pytest

from conftest import cached_run, record
from hetsched.fixtures import arm_platform, measured_power
from hetsched.model import TaskSpec, build_major_grid, eval_power, make_job, mape
from hetsched.oracle import (QuantizedInstance, brute_force, lp_reference, quantum_aligned,
                             random_tiny_jobs, random_tiny_platform)
from hetsched.ordering import classify, hetero_wrap, migration_counts, self_overlap
from hetsched.partition import reduce_intercluster, solve_lp_dvfs, solve_nlp_dvfs
from hetsched.pipeline import horizon_for, jobs_for, run_algorithm
from hetsched.speedprofile import average_power, compress_profile, two_speed_for_demand


def test_criterion_1_feasibility(implicit):
    plat = arm_platform(2, 6)
    start = time.perf_counter()
    results = {d: run_algorithm(tasks, plat, "lp-dvfs") for d, tasks in implicit.items()}
    elapsed = time.perf_counter() - start
    bad = [d for d, r in results.items()
           if not r.feasible or r.report.deadline_misses or r.report.violations]
    ok = len(results) == 16 and not bad and max(implicit) == pytest.approx(4.25) and elapsed < 5.0
    record(1, ok, f"{len(results) - len(bad)}/{len(results)} implicit-deadline tasksets validated "
                  f"(D {min(implicit):.2f}..{max(implicit):.2f}) in {elapsed:.2f} s")
    assert ok


def test_criterion_2_energy_implicit(implicit):
    worst = 0.0
    for d in implicit:
        lp = cached_run("implicit", d, "lp-dvfs", 2, 6)
        gwa = cached_run("implicit", d, "gwa-ddiscrete", 2, 6)
        assert lp.feasible and gwa.feasible
        worst = max(worst, abs(lp.report.total_energy - gwa.report.total_energy) / gwa.report.total_energy)
    ok = worst <= 1e-6
    record(2, ok, f"max relative gap LP-DVFS vs GWA-DDiscrete {worst:.2e} over {len(implicit)} tasksets")
    assert ok


def test_criterion_3_energy_constrained(constrained):
    gains = {}
    for d in constrained:
        lp = cached_run("constrained", d, "lp-dvfs", 1, 1)
        gwa = cached_run("constrained", d, "gwa-ddiscrete", 1, 1)
        assert lp.passed and gwa.passed
        gains[d] = 1 - lp.report.total_energy / gwa.report.total_energy
    never_worse = all(g >= -1e-9 for g in gains.values())
    best = max(gains, key=gains.get)
    ok = never_worse and gains[best] > 0.01
    record(3, ok, f"LP-DVFS <= GWA-DDiscrete on {sum(g >= -1e-9 for g in gains.values())}/{len(gains)}; "
                  f"largest saving {gains[best]:.1%} at D={best}")
    assert ok


def test_criterion_4_power_model():
    plat = arm_platform()
    data = measured_power()
    errs = []
    for r in (0, 1):
        s, p = zip(*data[plat[r].name])
        errs.append(mape(eval_power(plat, r, list(s)), p))
    ok = errs[0] <= 1.5 and errs[1] <= 2.0
    record(4, ok, f"MAPE big {errs[0]:.4f}% (<= 1.5), LITTLE {errs[1]:.4f}% (<= 2.0)")
    assert ok


def _brute_mixture(speeds, powers, demand):
    best = np.inf
    for i, a in enumerate(speeds):
        if abs(a - demand) <= 1e-12:
            best = min(best, powers[i])
        for j in range(i + 1, len(speeds)):
            b = speeds[j]
            lo, hi = min(a, b), max(a, b)
            if lo <= demand <= hi:
                lam = (hi - demand) / (hi - lo)
                plo, phi = (powers[i], powers[j]) if a < b else (powers[j], powers[i])
                best = min(best, lam * plo + (1 - lam) * phi)
    return best


def test_criterion_5_two_speed():
    rng = np.random.default_rng(5)
    plat = arm_platform()
    worst_work, worst_energy, worst_sweep = 0.0, -np.inf, -np.inf
    for t in plat.types:
        speeds = list(t.speeds)
        table = {s: float(t.power(s)) for s in speeds}
        for _ in range(1000):
            k = int(rng.integers(1, 9))
            prof = [(float(rng.uniform(0, 3)), speeds[int(rng.integers(len(speeds)))]) for _ in range(k)]
            out = compress_profile(prof, speeds, t.power)
            work = sum(d * s for d, s in prof)
            e_in = sum(d * table[s] for d, s in prof)
            worst_work = max(worst_work, abs(out.work - work) / work)
            worst_energy = max(worst_energy, (out.energy(t.power) - e_in) / e_in)
        powers = [table[s] for s in speeds]
        for demand in np.linspace(t.s_min, t.s_max, 2000):
            prof = two_speed_for_demand(speeds, powers, demand)
            worst_sweep = max(worst_sweep, average_power(prof, speeds, powers)
                              - _brute_mixture(speeds, powers, demand))
    ok = worst_work <= 1e-12 and worst_energy <= 1e-12 and worst_sweep <= 1e-9
    record(5, ok, f"work drift {worst_work:.1e}, energy change {worst_energy:.1e} (tolerance 1e-12), "
                  f"sweep excess over brute force {worst_sweep:.1e}")
    assert ok


def _random_workload(rng):
    m1, m2 = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    cap = [float(m1), float(m2)]
    omega = {}
    for i in range(int(rng.integers(0, min(m1, m2) + 1))):
        w1 = float(rng.uniform(0.01, 0.99))
        if w1 <= cap[0] and 1 - w1 <= cap[1]:
            omega[f"A{i}"] = (w1, 1.0 - w1)
            cap[0] -= w1
            cap[1] -= 1.0 - w1
    if rng.random() < 0.7:
        w1, w2 = float(rng.uniform(0, 0.6)), float(rng.uniform(0, 0.4))
        if 0 < w1 <= cap[0] and 0 < w2 <= cap[1] and w1 + w2 < 1:
            omega["B"] = (w1, w2)
            cap[0] -= w1
            cap[1] -= w2
    for r in (0, 1):
        for i in range(int(rng.integers(0, 7))):
            w = float(rng.uniform(0.01, 1.0))
            if w <= cap[r]:
                omega[f"P{r}{i}"] = (w, 0.0) if r == 0 else (0.0, w)
                cap[r] -= w
    return omega, m1, m2


def test_criterion_6_hetero_wrap():
    five_task = {"T1": (0.3, 0.7), "T2": (0.6, 0.4), "T3": (0.2, 0.4), "T4": (0.5, 0.0), "T5": (0.0, 0.5)}
    c = classify(five_task)
    table_ok = (c.im_a, c.im_b, c.cp_1, c.cp_2) == (["T1", "T2"], ["T3"], ["T4"], ["T5"])
    rng = np.random.default_rng(6)
    failures = 0
    for _ in range(10000):
        omega, m1, m2 = _random_workload(rng)
        out = hetero_wrap(classify(omega), omega, m1, m2)
        intra, _ = migration_counts(out)
        good = intra[0] <= m1 - 1 and intra[1] <= m2 - 1
        for t, (w1, w2) in omega.items():
            good &= self_overlap(out, t) == 0.0
            good &= abs(out.work(t, 0) - w1) <= 1e-12 and abs(out.work(t, 1) - w2) <= 1e-12
        for r, m in ((0, m1), (1, m2)):
            good &= all(out.load(r, k) <= 1 + 1e-12 for k in range(1, m + 1))
        failures += not good
    ok = table_ok and failures == 0
    record(6, ok, f"five-task classification {'exact' if table_ok else 'WRONG'}; "
                  f"{10000 - failures}/10000 random workloads satisfy all properties")
    assert ok


def _random_taskset(rng, plat):
    k = int(rng.integers(2, 6))
    tasks = []
    for i in range(k):
        p = int(rng.choice([5, 10, 20]))
        d = int(rng.integers(max(1, p // 2), p + 1)) if rng.random() < 0.5 else p
        u = min(float(rng.uniform(0.05, 0.8 * plat.capacity / k)), 0.95)
        tasks.append(TaskSpec(f"T{i + 1}", d, p, min_exec_time=round(u * d, 3)))
    return tasks


def _vertex_stats(tasks, plat):
    jobs = jobs_for(tasks, plat)
    part = solve_lp_dvfs(jobs, build_major_grid(jobs, horizon_for(tasks)), plat)
    if not part.feasible:
        return None
    red = reduce_intercluster(part)
    split = support = loose = 0
    for mu in range(red.grid.n_intervals):
        n = len(red.active_jobs(mu))
        split += len(red.intercluster_jobs(mu)) > 1
        support += red.nonzero_count(mu) > n + 2
        agg = red.omega_type[mu]
        both = (agg[:, 0] > 1e-9) & (agg[:, 1] > 1e-9)
        loose += int(np.sum(both & (agg.sum(axis=1) < 1 - 1e-9))) > 1
    return red.grid.n_intervals, split, support, loose


def test_criterion_7_vertex_structure(implicit, constrained):
    """Known to fail (see the README). Minimum-split optima with
    several jobs on both clusters exist (confirmed by an exact MILP), so the
    bound cannot hold for every optimal partition."""
    cases = [(t, arm_platform(2, 6)) for t in implicit.values()]
    cases += [(t, arm_platform(1, 1)) for t in constrained.values()]
    rng = np.random.default_rng(7)
    plats = [arm_platform(2, 6), arm_platform(1, 1)]
    n_random = 0
    while n_random < 1000:
        plat = plats[n_random % 2]
        tasks = _random_taskset(rng, plat)
        if _vertex_stats(tasks, plat) is None:
            continue
        cases.append((tasks, plat))
        n_random += 1
    totals = np.zeros(4, dtype=int)
    bad_sets = 0
    for tasks, plat in cases:
        stats = np.array(_vertex_stats(tasks, plat))
        totals += stats
        bad_sets += bool(stats[1] or stats[2])
    intervals, split, support, loose = totals
    ok = split == 0 and support == 0
    record(7, ok, f"{len(cases)} tasksets, {intervals} intervals: {split} with >1 inter-cluster job, "
                  f"{support} with >n+2 nonzeros ({bad_sets} tasksets affected); "
                  f"intervals with >1 partial-budget split job (what ordering needs): {loose}")
    assert ok


def test_criterion_8_oracle():
    rng = np.random.default_rng(8)
    n = 200
    verdicts = feasible = aligned = agree = below = 0
    for _ in range(n):
        plat = random_tiny_platform(rng)
        jobs = random_tiny_jobs(rng, plat)
        ref = brute_force(QuantizedInstance.from_jobs(jobs, plat, 1))
        part, sched = lp_reference(jobs, plat)
        verdicts += ref.feasible == part.feasible
        if not (ref.feasible and part.feasible):
            continue
        feasible += 1
        below += ref.energy < part.total_energy * (1 - 1e-9)
        if quantum_aligned(sched, 1.0):
            aligned += 1
            agree += abs(ref.energy - part.total_energy) <= 1e-6 * part.total_energy
    ok = n >= 50 and verdicts == n and below == 0 and aligned >= 25 and agree == aligned
    record(8, ok, f"verdicts {verdicts}/{n}; oracle >= LP on {feasible - below}/{feasible} feasible; "
                  f"energies within 1e-6 on {agree}/{aligned} quantum-representable optima")
    assert ok


def test_criterion_9_nlp_convergence():
    grids = (2, 3, 5, 9, 17, 33)
    lines, ok = [], True
    for cores, r, demand in (((0, 1), 1, 1.3), ((1, 0), 0, 3.6)):
        plat = arm_platform(*cores)
        t = plat.types[r]
        job = make_job("J", 0, 5, demand)
        energies = [solve_nlp_dvfs([job], None, plat, g).total_energy for g in grids]
        s_star = min(max(demand / 5, t.s_min), t.s_max)
        busy = demand / s_star
        exact = busy * float(t.power(s_star)) + (5 - busy) * t.p_idle
        monotone = all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))
        gap = energies[-1] / exact - 1
        ok &= monotone and -1e-12 <= gap <= 0.005
        lines.append(f"{t.name} {'monotone' if monotone else 'NOT monotone'}, gap {gap:.3%}")
    record(9, ok, "; ".join(lines) + f" at {grids[-1]} levels (nested grids {grids})")
    assert ok
