import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetsched.ordering import (NeedsReduction, classify, hetero_wrap, migration_counts,
                               self_overlap)

FIVE_TASK = {"T1": (0.3, 0.7), "T2": (0.6, 0.4), "T3": (0.2, 0.4), "T4": (0.5, 0.0), "T5": (0.0, 0.5)}


def windows_of(ordered, task):
    return sorted((w.cluster, w.core, round(w.start, 12), round(w.end, 12))
                  for w in ordered.task_windows(task))


class TestClassify:
    def test_five_task(self):
        c = classify(FIVE_TASK)
        assert (c.im_a, c.im_b, c.cp_1, c.cp_2) == (["T1", "T2"], ["T3"], ["T4"], ["T5"])

    def test_all_single_cluster(self):
        c = classify({"a": (0.5, 0.0), "b": (0.0, 0.3)})
        assert c.im_a == [] and c.im_b == []

    def test_two_loose_splits(self):
        with pytest.raises(NeedsReduction):
            classify({"a": (0.2, 0.2), "b": (0.3, 0.3)})
        assert len(classify({"a": (0.2, 0.2), "b": (0.3, 0.3)}, strict=False).im_b) == 2

    def test_zero_tasks_dropped(self):
        assert classify({"a": (0.0, 0.0)}).tasks == []


class TestHeteroWrap:
    def test_five_task_windows(self):
        out = hetero_wrap(classify(FIVE_TASK), FIVE_TASK, 2, 2)
        assert windows_of(out, "T1") == [(0, 1, 0.0, 0.3), (1, 2, 0.3, 1.0)]
        assert windows_of(out, "T2") == [(0, 1, 0.3, 0.9), (1, 1, 0.9, 1.0), (1, 2, 0.0, 0.3)]
        assert windows_of(out, "T3") == [(0, 1, 0.9, 1.0), (0, 2, 0.0, 0.1), (1, 1, 0.5, 0.9)]
        assert windows_of(out, "T4") == [(0, 2, 0.1, 0.6)]
        assert windows_of(out, "T5") == [(1, 1, 0.0, 0.5)]
        for t in FIVE_TASK:
            assert self_overlap(out, t) <= 1e-12

    def test_five_task_counts(self):
        out = hetero_wrap(classify(FIVE_TASK), FIVE_TASK, 2, 2)
        assert migration_counts(out) == ((1, 1), 3)

    def test_single_task(self):
        out = hetero_wrap(classify({"a": (0.4, 0.0)}), {"a": (0.4, 0.0)}, 1, 0)
        assert windows_of(out, "a") == [(0, 1, 0.0, 0.4)]
        assert migration_counts(out) == ((0, 0), 0)

    def test_wrapped_task(self):
        omega = {"a": (0.7, 0.0), "b": (0.6, 0.0)}
        out = hetero_wrap(classify(omega), omega, 2, 1)
        assert windows_of(out, "b") == [(0, 1, 0.7, 1.0), (0, 2, 0.0, 0.3)]
        assert self_overlap(out, "b") == 0.0
        assert migration_counts(out) == ((1, 0), 0)

    def test_level_pieces_ascending(self):
        omega = {"a": (0.5, 0.0)}
        out = hetero_wrap(classify(omega), omega, 1, 1, levels={"a": ([0.2, 0.3], [0.0, 0.0])})
        assert [(w.level, round(w.start, 12), round(w.end, 12)) for w in out.windows] == \
            [(0, 0.0, 0.2), (1, 0.2, 0.5)]

    def test_over_capacity(self):
        omega = {"a": (0.8, 0.0), "b": (0.8, 0.0)}
        with pytest.raises(ValueError):
            hetero_wrap(classify(omega), omega, 1, 1)

    def test_solver_roundoff_at_full_load(self):
        # cluster 1 sums to 1 - 1.6e-11 and cluster 2 to exactly 2
        omega = {0: (0.7243333333412934, 0.27566666665870676),
                 4: (0.2756666666427858, 0.7243333333412931), 5: (0.0, 1.0)}
        out = hetero_wrap(classify(omega), omega, 1, 2)
        for t, (w1, w2) in omega.items():
            for cluster, w in ((0, w1), (1, w2)):
                got = sum(x.end - x.start for x in out.windows if x.task == t and x.cluster == cluster)
                assert got == pytest.approx(w, abs=1e-9)
        for t in (0, 4):
            ws = out.task_windows(t)
            for a in ws:
                for b in ws:
                    if a is not b:
                        assert min(a.end, b.end) - max(a.start, b.start) <= 0.0

    def test_task_budget(self):
        omega = {"a": (0.8, 0.4)}
        with pytest.raises(ValueError):
            hetero_wrap(classify(omega, strict=False), omega, 1, 1)


@st.composite
def workloads(draw):
    """Random valid interval workloads with at most one loose split task."""
    m1 = draw(st.integers(1, 4))
    m2 = draw(st.integers(1, 4))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    cap = [float(m1), float(m2)]
    omega = {}
    n_full = int(rng.integers(0, min(m1, m2) + 1))
    for i in range(n_full):
        w1 = float(rng.uniform(0.05, 0.95))
        if w1 > cap[0] or 1 - w1 > cap[1]:
            break
        omega[f"A{i}"] = (w1, 1.0 - w1)
        cap[0] -= w1
        cap[1] -= 1.0 - w1
    if rng.random() < 0.7:
        w1, w2 = float(rng.uniform(0, 0.5)), float(rng.uniform(0, 0.45))
        if 0 < w1 <= cap[0] and 0 < w2 <= cap[1]:
            omega["B"] = (w1, w2)
            cap[0] -= w1
            cap[1] -= w2
    for r in (0, 1):
        for i in range(int(rng.integers(0, 6))):
            w = float(rng.uniform(0.01, 1.0))
            if w > cap[r]:
                continue
            omega[f"P{r}{i}"] = (w, 0.0) if r == 0 else (0.0, w)
            cap[r] -= w
    return omega, m1, m2


@settings(max_examples=500, deadline=None)
@given(workloads())
def test_fuzz_properties(case):
    omega, m1, m2 = case
    out = hetero_wrap(classify(omega), omega, m1, m2)
    for t, (w1, w2) in omega.items():
        assert self_overlap(out, t) <= 1e-12
        assert out.work(t, 0) == pytest.approx(w1, abs=1e-12)
        assert out.work(t, 1) == pytest.approx(w2, abs=1e-12)
    for r, m in ((0, m1), (1, m2)):
        for k in range(1, m + 1):
            assert out.load(r, k) <= 1 + 1e-12
    intra, _ = migration_counts(out)
    assert intra[0] <= m1 - 1 and intra[1] <= m2 - 1
