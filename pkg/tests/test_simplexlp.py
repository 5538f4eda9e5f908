import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from hetsched.simplexlp import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, LinearProgram,
                                enumerate_vertices, interior_count, solve, to_basic)


def lp_of(c, rows, lb=None, ub=None):
    A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), len(c))
    senses = [r[1] for r in rows]
    b = np.array([r[2] for r in rows], dtype=float)
    n = len(c)
    return LinearProgram(np.array(c, float), A, senses, b,
                         np.zeros(n) if lb is None else np.array(lb, float),
                         np.ones(n) if ub is None else np.array(ub, float))


TRIANGLE = lp_of([-1, -1], [([1, 1], LE, 1)])


def brute_vertices(lp):
    """Independent vertex enumeration: every choice of n tight constraints
    among rows and bounds, solved densely, kept if feasible (equality rows
    are enforced by the feasibility check)."""
    n = lp.n_vars
    cons = []
    for i in range(lp.n_rows):
        cons.append((lp.A[i], lp.b[i]))
    for j in range(n):
        e = np.eye(n)[j]
        cons.append((e, lp.lb[j]))
        cons.append((e, lp.ub[j]))
    out = []
    for idx in itertools.combinations(range(len(cons)), n):
        M = np.array([cons[k][0] for k in idx])
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, np.array([cons[k][1] for k in idx]))
        if lp.max_violation(x) <= 1e-9:
            out.append(x)
    return out


class TestExamples:
    def test_single_variable(self):
        sol = solve(lp_of([1], [([1], GE, 1)], ub=[10]))
        assert sol.status == OPTIMAL
        assert sol.x[0] == pytest.approx(1.0)
        assert sol.objective == pytest.approx(1.0)

    def test_triangle(self):
        sol = solve(TRIANGLE)
        assert sol.optimal and sol.objective == pytest.approx(-1.0)
        assert sum(sol.x) == pytest.approx(1.0)
        assert interior_count(TRIANGLE, sol.x) <= 1

    def test_triangle_vertices(self):
        verts = sorted(tuple(float(c) for c in np.round(v, 12)) for v in enumerate_vertices(TRIANGLE))
        assert verts == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]

    def test_infeasible(self):
        sol = solve(lp_of([0], [([1], GE, 2), ([1], LE, 1)], ub=[10]))
        assert sol.status == INFEASIBLE

    def test_unbounded(self):
        lp = LinearProgram(np.array([-1.0]), np.zeros((0, 1)), [], np.zeros(0),
                           np.zeros(1), np.array([np.inf]))
        assert solve(lp).status == UNBOUNDED

    def test_equality_rows(self):
        sol = solve(lp_of([1, 2, 3], [([1, 1, 1], EQ, 1), ([0, 1, 1], GE, 0.5)]))
        assert sol.optimal
        assert sol.x == pytest.approx([0.5, 0.5, 0.0])

    def test_negative_lower_bounds(self):
        sol = solve(lp_of([1, 1], [([1, -1], LE, 0.5)], lb=[-2, -1], ub=[3, 3]))
        assert sol.optimal and sol.objective == pytest.approx(-3.0)


class TestToBasic:
    def test_vertex_is_fixed_point(self):
        x = to_basic(TRIANGLE, np.array([1.0, 0.0]))
        assert x == pytest.approx([1.0, 0.0])

    def test_edge_midpoint(self):
        x = to_basic(TRIANGLE, np.array([0.5, 0.5]))
        assert tuple(np.round(x, 12)) in {(1.0, 0.0), (0.0, 1.0)}
        assert TRIANGLE.objective(x) <= TRIANGLE.objective(np.array([0.5, 0.5])) + 1e-12

    def test_interior_point_two_rows_five_vars(self):
        lp = lp_of([1, 2, 3, 4, 5], [([1, 1, 1, 1, 1], EQ, 2.5), ([1, 2, 3, 4, 5], LE, 9)])
        start = np.full(5, 0.5)
        # five structurals plus the slack of the inequality row
        assert lp.is_feasible(start) and interior_count(lp, start) == 6
        x = to_basic(lp, start)
        assert lp.is_feasible(x)
        assert np.sum((x > 1e-9) & (x < 1 - 1e-9)) <= 2
        assert interior_count(lp, x) <= 2
        assert lp.objective(x) <= lp.objective(start) + 1e-12

    def test_infeasible_start_rejected(self):
        with pytest.raises(ValueError):
            to_basic(TRIANGLE, np.array([1.0, 1.0]))


@st.composite
def random_lps(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 4))
    fl = st.floats(-3, 3, allow_nan=False).map(lambda v: round(v, 2))
    c = [draw(fl) for _ in range(n)]
    rows = []
    for _ in range(m):
        coefs = [draw(fl) for _ in range(n)]
        rows.append((coefs, draw(st.sampled_from([LE, GE, EQ])), draw(fl)))
    ub = [draw(st.sampled_from([1.0, 2.0, 5.0])) for _ in range(n)]
    return lp_of(c, rows, ub=ub)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(random_lps())
    def test_matches_vertex_enumeration(self, lp):
        sol = solve(lp)
        verts = brute_vertices(lp)
        if not verts:
            assert sol.status == INFEASIBLE
            return
        best = min(lp.objective(v) for v in verts)
        assert sol.status == OPTIMAL
        assert lp.is_feasible(sol.x)
        assert sol.objective == pytest.approx(best, abs=1e-8, rel=1e-8)

    @settings(max_examples=200, deadline=None)
    @given(random_lps())
    def test_matches_scipy(self, lp):
        sol = solve(lp)
        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for a, s, v in zip(lp.A, lp.senses, lp.b):
            if s == EQ:
                A_eq.append(a)
                b_eq.append(v)
            else:
                sign = 1 if s == LE else -1
                A_ub.append(sign * a)
                b_ub.append(sign * v)
        ref = linprog(lp.c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None,
                      b_eq=b_eq or None, bounds=list(zip(lp.lb, lp.ub)), method="highs")
        assert (ref.status == 0) == (sol.status == OPTIMAL)
        if ref.status == 0:
            assert sol.objective == pytest.approx(ref.fun, abs=1e-8, rel=1e-8)

    @settings(max_examples=200, deadline=None)
    @given(random_lps())
    def test_solutions_are_basic(self, lp):
        sol = solve(lp)
        if sol.optimal:
            assert interior_count(lp, sol.x) <= lp.n_rows

    @settings(max_examples=100, deadline=None)
    @given(random_lps())
    def test_deterministic(self, lp):
        a, b = solve(lp), solve(lp)
        assert a.status == b.status
        if a.optimal:
            assert list(a.basis) == list(b.basis)
            assert np.array_equal(a.x, b.x)

    @settings(max_examples=100, deadline=None)
    @given(random_lps(), st.integers(0, 2**32 - 1))
    def test_to_basic_from_convex_combination(self, lp, seed):
        verts = brute_vertices(lp)
        if len(verts) < 2:
            return
        w = np.random.default_rng(seed).dirichlet(np.ones(len(verts)))
        start = np.clip(sum(wi * v for wi, v in zip(w, verts)), lp.lb, lp.ub)
        if not lp.is_feasible(start):
            return
        x = to_basic(lp, start)
        assert lp.is_feasible(x, 1e-8)
        assert interior_count(lp, x) <= lp.n_rows
        assert lp.objective(x) <= lp.objective(start) + 1e-9


def test_mps_export():
    text = TRIANGLE.to_mps("tri")
    for section in ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
        assert section in text
    assert text == TRIANGLE.to_mps("tri")


def test_shape_validation():
    with pytest.raises(ValueError):
        LinearProgram(np.zeros(2), np.zeros((1, 3)), [LE], np.zeros(1), np.zeros(2), np.ones(2))


@settings(max_examples=60, deadline=None)
@given(random_lps())
def test_library_enumeration_agrees_with_local_oracle(lp):
    ours = enumerate_vertices(lp)
    theirs = brute_vertices(lp)
    assert bool(ours) == bool(theirs)
    if ours:
        assert min(lp.objective(v) for v in ours) == pytest.approx(
            min(lp.objective(v) for v in theirs), abs=1e-8)
