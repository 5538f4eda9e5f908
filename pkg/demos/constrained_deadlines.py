"""LP-DVFS against GWA-DDiscrete on constrained-deadline tasksets, one big
and one LITTLE core. Prints the energy saving in percent."""

from hetsched.fixtures import arm_platform, constrained_tasksets
from hetsched.pipeline import run_algorithm


def main():
    platform = arm_platform(1, 1)
    for name, tasks in sorted(constrained_tasksets().items()):
        lp = run_algorithm(tasks, platform, "lp-dvfs")
        gwa = run_algorithm(tasks, platform, "gwa-ddiscrete")
        if not (lp.passed and gwa.passed):
            print(f"{name}: lp {lp.status}, gwa {gwa.status}")
            continue
        e_lp, e_gwa = lp.report.total_energy, gwa.report.total_energy
        print(f"{name}: lp-dvfs {e_lp:10.2f} mJ  gwa-ddiscrete {e_gwa:10.2f} mJ  "
              f"saving {100 * (1 - e_lp / e_gwa):5.2f}%")


if __name__ == "__main__":
    main()
