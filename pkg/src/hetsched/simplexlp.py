"""Dense bounded-variable primal simplex.

Returns vertex (basic) solutions: every non-basic variable sits exactly on one
of its bounds. Rows are turned into equalities with one slack each; phase 1
drives artificial variables to zero, phase 2 minimises the objective. Pricing
is Dantzig's largest-reduced-cost rule, switching to Bland's smallest-index
rule while the iterates are stalling on degenerate pivots.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10
OPT_TOL = 1e-9

LE, EQ, GE = "<=", "==", ">="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
SINGULAR = "numerically singular"


@dataclass
class LinearProgram:
    """``minimize c @ x`` subject to ``A[i] @ x  (sense[i])  b[i]`` and
    ``lb <= x <= ub`` (bounds may be infinite)."""

    c: np.ndarray
    A: np.ndarray
    senses: list
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: Optional[list] = None
    # free-form bookkeeping for builders (variable layout etc.)
    meta: Any = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.size
        if n < 1:
            raise ValueError("LP needs at least one variable")
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.senses = list(self.senses)
        self.lb = np.broadcast_to(np.asarray(self.lb, dtype=float), (n,)).copy()
        self.ub = np.broadcast_to(np.asarray(self.ub, dtype=float), (n,)).copy()
        if len(self.senses) != self.A.shape[0] or self.b.size != self.A.shape[0]:
            raise ValueError("row count mismatch between A, senses and b")
        if any(s not in (LE, EQ, GE) for s in self.senses):
            raise ValueError(f"unknown relation in {set(self.senses)}")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound above upper bound")
        if not np.all(np.isfinite(self.A)) or not np.all(np.isfinite(self.b)):
            raise ValueError("constraint data must be finite")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def objective(self, x) -> float:
        return float(self.c @ x)

    def row_violation(self, x) -> np.ndarray:
        """Per-row amount by which ``x`` breaks its relation (0 if satisfied)."""
        ax = self.A @ np.asarray(x, dtype=float)
        viol = np.zeros(self.n_rows)
        for i, s in enumerate(self.senses):
            if s == LE:
                viol[i] = max(0.0, ax[i] - self.b[i])
            elif s == GE:
                viol[i] = max(0.0, self.b[i] - ax[i])
            else:
                viol[i] = abs(ax[i] - self.b[i])
        return viol

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        bound = np.maximum(self.lb - x, 0).max(initial=0.0)
        bound = max(bound, np.maximum(x - self.ub, 0).max(initial=0.0))
        return float(max(bound, self.row_violation(x).max(initial=0.0)))

    def is_feasible(self, x, tol: float = FEAS_TOL) -> bool:
        return self.max_violation(x) <= tol

    def _slack_bounds(self):
        m = self.n_rows
        slb = np.zeros(m)
        sub = np.zeros(m)
        for i, s in enumerate(self.senses):
            if s == LE:
                sub[i] = np.inf
            elif s == GE:
                slb[i] = -np.inf
        return slb, sub

    def standard_form(self):
        """Equality form ``[A | I] z = b`` with bounds on structurals and slacks."""
        slb, sub = self._slack_bounds()
        A_eq = np.hstack([self.A, np.eye(self.n_rows)])
        return A_eq, np.concatenate([self.lb, slb]), np.concatenate([self.ub, sub])

    def slacks(self, x) -> np.ndarray:
        return self.b - self.A @ np.asarray(x, dtype=float)

    def to_mps(self, name: str = "LP") -> str:
        """Free-format MPS text. Columns are ``x0..x{n-1}`` (or ``names``) in
        index order, rows ``r0..r{m-1}``; output is deterministic."""
        cols = self.names or [f"x{j}" for j in range(self.n_vars)]
        kind = {LE: "L", EQ: "E", GE: "G"}
        out = io.StringIO()
        out.write(f"NAME {name}\nROWS\n N obj\n")
        for i, s in enumerate(self.senses):
            out.write(f" {kind[s]} r{i}\n")
        out.write("COLUMNS\n")
        for j, cname in enumerate(cols):
            if self.c[j] != 0:
                out.write(f" {cname} obj {self.c[j]!r}\n")
            for i in np.flatnonzero(self.A[:, j]):
                out.write(f" {cname} r{i} {self.A[i, j]!r}\n")
        out.write("RHS\n")
        for i in np.flatnonzero(self.b):
            out.write(f" rhs r{i} {self.b[i]!r}\n")
        out.write("BOUNDS\n")
        for j, cname in enumerate(cols):
            lo, hi = self.lb[j], self.ub[j]
            if lo == hi:
                out.write(f" FX bnd {cname} {lo!r}\n")
                continue
            if lo == -np.inf and hi == np.inf:
                out.write(f" FR bnd {cname}\n")
                continue
            if lo == -np.inf:
                out.write(f" MI bnd {cname}\n")
            elif lo != 0:
                out.write(f" LO bnd {cname} {lo!r}\n")
            if hi != np.inf:
                out.write(f" UP bnd {cname} {hi!r}\n")
        out.write("ENDATA\n")
        return out.getvalue()


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    # column indices of the final basis: structurals are 0..n-1, the slack of
    # row i is n+i, and -1 marks a redundant row kept by a zero artificial
    basis: list = field(default_factory=list)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Simplex:
    """One solve; holds the working tableau ``T = B^-1 [A | I | art]``."""

    REFACTOR_EVERY = 64
    STALL_LIMIT = 8

    def __init__(self, lp: LinearProgram, max_iter: Optional[int] = None):
        self.lp = lp
        A_eq, lo, hi = lp.standard_form()
        m, N = A_eq.shape
        self.m, self.n_orig = m, N
        self.max_iter = max_iter or 50 * (m + N) + 1000

        z = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
        z[lp.n_vars:] = 0.0
        # slack i absorbs the residual when its bounds permit, else an artificial does
        resid = lp.b - lp.A @ z[:lp.n_vars]
        slack_ok = (lo[lp.n_vars:] <= resid) & (resid <= hi[lp.n_vars:])
        art_rows = np.flatnonzero(~slack_ok)
        n_art = art_rows.size
        art_cols = np.zeros((m, n_art))
        signs = np.where(resid[art_rows] >= 0, 1.0, -1.0)
        art_cols[art_rows, np.arange(n_art)] = signs

        self.A = np.hstack([A_eq, art_cols])
        self.lo = np.concatenate([lo, np.zeros(n_art)])
        self.hi = np.concatenate([hi, np.full(n_art, np.inf)])
        self.b = lp.b.copy()
        self.n = N + n_art
        self.art = np.zeros(self.n, dtype=bool)
        self.art[N:] = True

        self.basis = np.empty(m, dtype=int)
        self.basis[:] = lp.n_vars + np.arange(m)
        self.basis[art_rows] = N + np.arange(n_art)
        self.z = np.concatenate([z, np.zeros(n_art)])
        self.z[lp.n_vars:N][slack_ok] = resid[slack_ok]
        self.z[N:] = np.abs(resid[art_rows])
        self.is_basic = np.zeros(self.n, dtype=bool)
        self.is_basic[self.basis] = True
        self.eligible = np.ones(self.n, dtype=bool)
        self.iterations = 0
        self._since_refactor = 0
        self.T = None
        self.d = None
        self.cost = None

    # -- linear algebra -------------------------------------------------
    def refactor(self) -> bool:
        B = self.A[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.A)
            nb = ~self.is_basic
            rhs = self.b - self.A[:, nb] @ self.z[nb]
            self.z[self.basis] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.T)):
            return False
        self.T[:, self.basis] = np.eye(self.m)
        self._since_refactor = 0
        self._price()
        return True

    def _price(self):
        self.d = self.cost - self.cost[self.basis] @ self.T
        self.d[self.basis] = 0.0

    def _pivot(self, r: int, j: int):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        self.d -= self.d[j] * T[r]
        self.d[j] = 0.0
        leaving = self.basis[r]
        self.is_basic[leaving] = False
        self.is_basic[j] = True
        self.basis[r] = j
        self._since_refactor += 1

    # -- main loop ------------------------------------------------------
    def _entering(self, bland: bool) -> int:
        d = self.d
        z = self.z
        cand = self.eligible & ~self.is_basic & (self.hi > self.lo)
        improving = cand & (((d < -OPT_TOL) & (z < self.hi)) | ((d > OPT_TOL) & (z > self.lo)))
        idx = np.flatnonzero(improving)
        if idx.size == 0:
            return -1
        if bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    def run(self, cost: np.ndarray) -> str:
        self.cost = cost
        if self.T is None:
            if not self.refactor():
                return SINGULAR
        else:
            self._price()
        stall = 0
        while True:
            if self.iterations >= self.max_iter:
                return SINGULAR
            if self._since_refactor >= self.REFACTOR_EVERY:
                if not self.refactor():
                    return SINGULAR
            bland = stall >= self.STALL_LIMIT
            j = self._entering(bland)
            if j < 0:
                return OPTIMAL
            self.iterations += 1
            direction = 1.0 if self.d[j] < 0 else -1.0
            alpha = direction * self.T[:, j]
            xb = self.z[self.basis]
            lo_b = self.lo[self.basis]
            hi_b = self.hi[self.basis]

            ratios = np.full(self.m, np.inf)
            dec = alpha > PIVOT_TOL
            inc = alpha < -PIVOT_TOL
            ratios[dec] = (xb[dec] - lo_b[dec]) / alpha[dec]
            ratios[inc] = (hi_b[inc] - xb[inc]) / -alpha[inc]
            ratios = np.maximum(ratios, 0.0)
            theta_flip = self.hi[j] - self.lo[j]
            theta_row = ratios.min(initial=np.inf)
            if not np.isfinite(theta_row) and not np.isfinite(theta_flip):
                return UNBOUNDED

            if theta_flip <= theta_row:
                theta = theta_flip
                self.z[self.basis] = xb - theta * alpha
                self.z[j] = self.hi[j] if direction > 0 else self.lo[j]
                stall = 0
                continue

            theta = theta_row
            ties = np.flatnonzero(ratios <= theta + FEAS_TOL * 1e-3)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            if abs(self.T[r, j]) < PIVOT_TOL:
                return SINGULAR
            leaving = self.basis[r]
            self.z[self.basis] = xb - theta * alpha
            self.z[j] += direction * theta
            self.z[leaving] = self.lo[leaving] if alpha[r] > 0 else self.hi[leaving]
            self._pivot(r, j)
            stall = stall + 1 if theta <= FEAS_TOL * 1e-3 else 0

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis where possible and
        pin every artificial to zero."""
        for r in range(self.m):
            a = self.basis[r]
            if not self.art[a]:
                continue
            row = np.abs(self.T[r]) * (~self.is_basic & ~self.art)
            j = int(np.argmax(row))
            if row[j] > 1e-7:
                self.z[a] = 0.0
                self._pivot(r, j)
        self.hi[self.art] = 0.0
        self.z[self.art & ~self.is_basic] = 0.0
        self.eligible &= ~self.art


def solve(lp: LinearProgram, max_iter: Optional[int] = None) -> LpSolution:
    """Solve ``lp``; infeasible/unbounded/singular come back as a status."""
    s = _Simplex(lp, max_iter)
    n = lp.n_vars
    if s.art.any():
        phase1 = s.art.astype(float)
        status = s.run(phase1)
        if status != OPTIMAL:
            return LpSolution(status if status == SINGULAR else SINGULAR, iterations=s.iterations)
        if not s.refactor():
            return LpSolution(SINGULAR, iterations=s.iterations)
        if s.z[s.art].sum() > FEAS_TOL * max(1.0, np.abs(lp.b).max(initial=0.0)):
            return LpSolution(INFEASIBLE, iterations=s.iterations)
        s.drive_out_artificials()
    cost = np.zeros(s.n)
    cost[:n] = lp.c
    status = s.run(cost)
    if status != OPTIMAL:
        return LpSolution(status, iterations=s.iterations)
    if not s.refactor():
        return LpSolution(SINGULAR, iterations=s.iterations)

    z = s.z
    x = z[:n].copy()
    # snap to bounds where the final refactor left rounding noise
    x = np.where(np.abs(x - lp.lb) <= FEAS_TOL, np.where(np.isfinite(lp.lb), lp.lb, x), x)
    x = np.where(np.abs(x - lp.ub) <= FEAS_TOL, np.where(np.isfinite(lp.ub), lp.ub, x), x)
    if lp.max_violation(x) > 10 * FEAS_TOL * max(1.0, np.abs(lp.b).max(initial=0.0)):
        return LpSolution(SINGULAR, iterations=s.iterations)
    basis = [int(c) if c < s.n_orig else -1 for c in s.basis]
    return LpSolution(OPTIMAL, x, lp.objective(x), basis, s.iterations)


def interior_count(lp: LinearProgram, x, tol: float = FEAS_TOL) -> int:
    """Number of structural and slack variables strictly inside their bounds."""
    _, lo, hi = lp.standard_form()
    z = np.concatenate([np.asarray(x, dtype=float), lp.slacks(x)])
    return int(np.sum((z > lo + tol) & (z < hi - tol)))


def to_basic(lp: LinearProgram, point, tol: float = FEAS_TOL) -> np.ndarray:
    """Purify a feasible point into a basic feasible point of ``lp`` without
    increasing the objective.

    Repeatedly takes a null-space direction of the columns whose variables
    are strictly between their bounds and walks along it (downhill, or either
    way when the objective is flat) until another variable hits a bound.
    """
    x = np.asarray(point, dtype=float).copy()
    if not lp.is_feasible(x, tol * 10):
        raise ValueError("to_basic needs a feasible starting point")
    A_eq, lo, hi = lp.standard_form()
    n = lp.n_vars
    z = np.concatenate([x, lp.slacks(x)])
    for _ in range(z.size + 1):
        free = np.flatnonzero((z > lo + tol) & (z < hi - tol))
        if free.size == 0:
            break
        sub = A_eq[:, free]
        _, sv, vt = np.linalg.svd(sub)
        rank = int(np.sum(sv > 1e-10 * max(1.0, sv.max(initial=0.0))))
        if rank == free.size:
            break
        v = vt[-1]
        v[np.abs(v) < 1e-14] = 0.0
        slope = float(np.concatenate([lp.c, np.zeros(lp.n_rows)])[free] @ v)
        steps = {}
        for sign in (1.0, -1.0):
            dv = sign * v
            with np.errstate(divide="ignore", invalid="ignore"):
                up = np.where(dv > 0, (hi[free] - z[free]) / dv, np.inf)
                down = np.where(dv < 0, (lo[free] - z[free]) / dv, np.inf)
            steps[sign] = float(np.minimum(up, down).min())
        if slope < -1e-15:
            sign = 1.0
        elif slope > 1e-15:
            sign = -1.0
        else:
            sign = 1.0 if steps[1.0] <= steps[-1.0] else -1.0
        step = steps[sign]
        if not np.isfinite(step):
            raise ValueError("objective unbounded along a purification direction")
        z[free] += sign * step * v
        # whichever variable reached its bound is snapped onto it
        zf = z[free]
        zf = np.where(np.abs(zf - lo[free]) <= 1e-12 * max(1.0, step), lo[free], zf)
        zf = np.where(np.abs(zf - hi[free]) <= 1e-12 * max(1.0, step), hi[free], zf)
        hit = np.argmin(np.minimum(np.abs(zf - lo[free]), np.abs(zf - hi[free])))
        bound = lo[free][hit] if abs(zf[hit] - lo[free][hit]) <= abs(zf[hit] - hi[free][hit]) else hi[free][hit]
        zf[hit] = bound
        z[free] = zf
    return z[:n]


def enumerate_vertices(lp: LinearProgram, tol: float = 1e-9):
    """Brute-force every distinct basic feasible point (tiny LPs only).

    Each vertex fixes all but ``m`` of the standard-form variables at one of
    their finite bounds and solves for the remaining ``m``.
    """
    from itertools import combinations, product

    A_eq, lo, hi = lp.standard_form()
    m, N = A_eq.shape
    out = []
    for basic in combinations(range(N), m):
        B = A_eq[:, basic]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        nonbasic = [j for j in range(N) if j not in basic]
        choices = []
        for j in nonbasic:
            opts = [v for v in (lo[j], hi[j]) if np.isfinite(v)]
            if not opts:
                break
            choices.append(sorted(set(opts)))
        else:
            for combo in product(*choices):
                z = np.zeros(N)
                z[nonbasic] = combo
                z[list(basic)] = np.linalg.solve(B, lp.b - A_eq[:, nonbasic] @ np.array(combo))
                if np.all(z >= lo - tol) and np.all(z <= hi + tol):
                    x = z[:lp.n_vars]
                    if not any(np.allclose(x, y, atol=tol) for y in out):
                        out.append(x)
    return out
