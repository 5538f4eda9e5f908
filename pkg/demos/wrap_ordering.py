"""Order a five-task interval on 2 + 2 cores and print each task's windows."""

from hetsched.ordering import classify, hetero_wrap

OMEGA = {"T1": (0.3, 0.7), "T2": (0.6, 0.4), "T3": (0.2, 0.4), "T4": (0.5, 0.0), "T5": (0.0, 0.5)}


def main():
    groups = classify(OMEGA)
    print(f"IM_a {groups.im_a}  IM_b {groups.im_b}  CP_1 {groups.cp_1}  CP_2 {groups.cp_2}")
    order = hetero_wrap(groups, OMEGA, 2, 2)
    for w in sorted(order.windows, key=lambda w: (w.task, w.cluster, w.core, w.start)):
        print(f"{w.task}: cluster {w.cluster + 1} core {w.core} [{w.start:.2f}, {w.end:.2f})")


if __name__ == "__main__":
    main()
