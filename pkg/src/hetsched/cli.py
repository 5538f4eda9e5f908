"""Command-line entry point: ``hetsched {schedule,sweep,validate,gantt,oracle-check}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .fileio import load_platform, load_taskset
from .model import DEFAULT_TICK, taskset_stats
from .ordering import NeedsReduction
from .partition import write_partition_csv
from .pipeline import ALGORITHMS, jobs_for, run_algorithm
from .validate import Schedule, Segment, gantt_svg, validate, write_events_csv

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tick(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad tick {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("tick must be positive")
    return value


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def report_rows(result, platform) -> list:
    rows = [("algorithm", result.algorithm), ("status", result.status)]
    if result.report is None:
        rows.append(("reason", result.reason))
        return rows
    rep = result.report
    rows += [("passed", rep.passed), ("optimiser_energy_mJ", result.energy),
             ("active_energy_mJ", rep.active_energy), ("idle_energy_mJ", rep.idle_energy),
             ("total_energy_mJ", rep.total_energy), ("preemptions", rep.preemptions)]
    for t, n in zip(platform.types, rep.intra_migrations):
        rows.append((f"intra_migrations_{t.name}", n))
    rows += [("inter_migrations", rep.inter_migrations), ("deadline_misses", len(rep.deadline_misses)),
             ("violations", len(rep.violations)), ("max_residual", rep.max_residual)]
    rows += [(f"miss:{job}", left) for job, left in rep.deadline_misses]
    rows += [("violation", v) for v in rep.violations]
    return rows


def _write_report(rows, path: Path):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        for k, v in rows:
            w.writerow([k, _fmt(v)])


def cmd_schedule(args) -> int:
    tasks = load_taskset(args.taskset)
    platform = load_platform(args.platform)
    result = run_algorithm(tasks, platform, args.algorithm, args.nlp_grid_points, args.tick)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_report(report_rows(result, platform), out / "report.csv")
    if not result.feasible:
        print(f"infeasible: {result.reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    with (out / "partition.csv").open("w", newline="") as fh:
        write_partition_csv(result.partition, fh)
    with (out / "events.csv").open("w", newline="") as fh:
        write_events_csv(result.schedule, fh)
    (out / "gantt.svg").write_text(gantt_svg(result.schedule))
    rep = result.report
    print(f"{args.algorithm}: total energy {rep.total_energy:.6f} mJ, "
          f"{'PASS' if rep.passed else 'FAIL'}, misses {len(rep.deadline_misses)}, "
          f"preemptions {rep.preemptions}, inter-cluster migrations {rep.inter_migrations}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _taskset_density(path: Path, tasks, platform) -> float:
    doc = json.loads(path.read_text())
    if isinstance(doc, dict) and "density" in doc:
        return float(doc["density"])
    return taskset_stats(tasks, platform).density


def cmd_sweep(args) -> int:
    platform = load_platform(args.platform)
    folder = Path(args.taskset)
    if not folder.is_dir():
        print(f"{folder} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    algorithms = [args.algorithm] if args.algorithm else list(ALGORITHMS)
    if "gwa-nodvfs" not in algorithms:
        algorithms.append("gwa-nodvfs")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["taskset", "D", "algorithm", "energy_mJ", "normalized_energy"])
    for path in sorted(folder.glob("*.json")):
        try:
            tasks = load_taskset(path)
            density = _taskset_density(path, tasks, platform)
        except (ValueError, KeyError) as exc:
            print(f"{path.name}: {exc}", file=sys.stderr)
            continue
        energies = {}
        for alg in algorithms:
            try:
                res = run_algorithm(tasks, platform, alg, args.nlp_grid_points, args.tick)
                energies[alg] = res.report.total_energy if res.passed else None
            except (ValueError, NeedsReduction) as exc:
                print(f"{path.name} {alg}: {exc}", file=sys.stderr)
                energies[alg] = None
        base = energies.get("gwa-nodvfs")
        for alg in algorithms:
            e = energies[alg]
            norm = e / base if e is not None and base else None
            w.writerow([path.stem, f"{density:.6g}", alg, "" if e is None else f"{e:.6f}",
                        "" if norm is None else f"{norm:.9f}"])
    text = buf.getvalue()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def read_events(path, platform) -> Schedule:
    names = {t.name: r for r, t in enumerate(platform.types)}
    segments = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["type"] not in names:
                raise ValueError(f"unknown processor type {row['type']!r}")
            segments.append(Segment(names[row["type"]], int(row["proc"]), float(row["t_start"]),
                                    float(row["t_end"]), row["job"], float(row["speed"])))
    horizon = max((s.end for s in segments), default=0.0)
    return Schedule(platform, horizon, segments)


def cmd_validate(args) -> int:
    tasks = load_taskset(args.taskset)
    platform = load_platform(args.platform)
    jobs = jobs_for(tasks, platform, args.tick)
    schedule = read_events(args.schedule, platform)
    schedule.horizon = max(schedule.horizon, max(j.deadline for j in jobs))
    rep = validate(schedule, jobs, platform)
    print(f"total energy {rep.total_energy:.6f} mJ (active {rep.active_energy:.6f}, idle "
          f"{rep.idle_energy:.6f}); preemptions {rep.preemptions}; migrations intra "
          f"{list(rep.intra_migrations)} inter {rep.inter_migrations}")
    for job, left in rep.deadline_misses:
        print(f"deadline miss: {job} residual {left:.9g}")
    for v in rep.violations:
        print(f"violation: {v}")
    print("PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_gantt(args) -> int:
    platform = load_platform(args.platform)
    if args.schedule:
        schedule = read_events(args.schedule, platform)
    else:
        if not args.taskset:
            print("gantt needs --taskset or --schedule", file=sys.stderr)
            return EXIT_USAGE
        result = run_algorithm(load_taskset(args.taskset), platform, args.algorithm,
                               args.nlp_grid_points, args.tick)
        if not result.feasible:
            print(f"infeasible: {result.reason}", file=sys.stderr)
            return EXIT_INFEASIBLE
        schedule = result.schedule
    svg = gantt_svg(schedule)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .oracle import (QuantizedInstance, brute_force, lp_reference, quantum_aligned,
                         random_tiny_jobs, random_tiny_platform)

    platform = load_platform(args.platform) if args.platform else None
    rng = np.random.default_rng(args.seed)
    bad = 0
    for k in range(args.count):
        plat = platform if platform is not None else random_tiny_platform(rng)
        jobs = random_tiny_jobs(rng, plat)
        ref = brute_force(QuantizedInstance.from_jobs(jobs, plat, 1))
        part, schedule = lp_reference(jobs, plat)
        ok = ref.feasible == part.feasible
        note = ""
        if ok and ref.feasible:
            lp_e = part.total_energy
            ok = ref.energy >= lp_e * (1 - 1e-9)
            if quantum_aligned(schedule, 1.0):
                ok = ok and abs(ref.energy - lp_e) <= 1e-6 * lp_e
                note = " (aligned)"
        bad += not ok
        print(f"{k}: oracle {'feasible' if ref.feasible else 'infeasible'}"
              f"{'' if ref.energy is None else f' {ref.energy:.6f} mJ'}; lp-dvfs "
              f"{'feasible' if part.feasible else 'infeasible'}"
              f"{f' {part.total_energy:.6f} mJ' if part.feasible else ''}{note}; "
              f"{'ok' if ok else 'MISMATCH'}")
    print(f"{args.count - bad}/{args.count} consistent")
    return EXIT_OK if bad == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hetsched", description="Energy-aware real-time scheduling on two-type "
                "DVFS multiprocessors.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, taskset_help="taskset JSON file"):
        sp.add_argument("--taskset", help=taskset_help)
        sp.add_argument("--platform", help="platform JSON file")
        sp.add_argument("--algorithm", choices=ALGORITHMS, default="lp-dvfs")
        sp.add_argument("--nlp-grid-points", type=int, default=17,
                        help="uniform speed levels per type for nlp-dvfs")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tick", type=_tick, default=DEFAULT_TICK,
                        help="time base in seconds, e.g. 1/1000")

    sp = sub.add_parser("schedule", help="solve, order, validate; write report, CSVs and SVG")
    common(sp)
    sp.set_defaults(func=cmd_schedule, required=("taskset", "platform", "out"))

    sp = sub.add_parser("sweep", help="normalised energy table over a directory of tasksets")
    common(sp, "directory of taskset JSON files")
    sp.set_defaults(func=cmd_sweep, required=("taskset", "platform"), algorithm=None)

    sp = sub.add_parser("validate", help="check an event CSV against a taskset")
    common(sp)
    sp.add_argument("--schedule", help="event CSV (t_start,t_end,type,proc,job,speed)")
    sp.set_defaults(func=cmd_validate, required=("taskset", "platform", "schedule"))

    sp = sub.add_parser("gantt", help="write an SVG Gantt chart")
    common(sp)
    sp.add_argument("--schedule", help="event CSV to draw instead of solving")
    sp.set_defaults(func=cmd_gantt, required=("platform",))

    sp = sub.add_parser("oracle-check", help="compare LP-DVFS with the exhaustive oracle")
    common(sp)
    sp.add_argument("--count", type=int, default=20)
    sp.set_defaults(func=cmd_oracle_check, required=())
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    missing = [name for name in args.required if not getattr(args, name, None)]
    if missing:
        parser.error(f"{args.command} needs " + ", ".join(f"--{m.replace('_', '-')}" for m in missing))
    if args.nlp_grid_points < 2:
        parser.error("--nlp-grid-points must be at least 2")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
