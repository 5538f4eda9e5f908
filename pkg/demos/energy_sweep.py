"""Normalised energy of every algorithm over the bundled implicit-deadline
tasksets on 2 big + 6 LITTLE cores (GWA-NoDVFS = 1.0)."""

from hetsched.fixtures import arm_platform, implicit_tasksets
from hetsched.model import taskset_stats
from hetsched.pipeline import ALGORITHMS, run_algorithm


def main():
    platform = arm_platform(2, 6)
    print(f"{'D':>6}" + "".join(f"{a:>15}" for a in ALGORITHMS))
    for name, tasks in sorted(implicit_tasksets().items()):
        energies = {}
        for alg in ALGORITHMS:
            res = run_algorithm(tasks, platform, alg, nlp_grid_points=9)
            energies[alg] = res.report.total_energy if res.passed else None
        base = energies["gwa-nodvfs"]
        cells = ["-" if e is None or not base else f"{e / base:.4f}" for e in energies.values()]
        print(f"{taskset_stats(tasks, platform).density:6.2f}" + "".join(f"{c:>15}" for c in cells))


if __name__ == "__main__":
    main()
