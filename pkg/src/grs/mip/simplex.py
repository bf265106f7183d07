"""Bounded-variable primal simplex with a product-form basis inverse.

Standard form: every linear row gets one slack column, so the constraint
matrix is [A | I] with slack bounds encoding the row sense
(<= : [0, inf), >= : (-inf, 0], == : [0, 0]).  Nonbasic variables rest at a
bound; feasibility is restored by a composite phase 1 that minimizes the sum
of bound violations of basic variables, which also makes warm starts from an
arbitrary (e.g. parent-node) basis cheap.

The basis inverse is kept as an LU factorization plus a list of eta vectors,
refactored every REFACTOR_EVERY pivots.  Pricing is Dantzig (most attractive
reduced cost, ties by lowest column index); Bland's rule takes over after
10*(rows+cols) degenerate pivots to guarantee termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import GE, INF, LE, MipModel, NumericalFailure

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIV_TOL = 1e-9  # working ratio-test threshold; < 1e-10 counts as no pivot
DEGEN_TOL = 1e-9
REFACTOR_EVERY = 50

BASIC = 0
AT_LB = 1
AT_UB = 2
FREE_NB = 3

LP_OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
LP_UNBOUNDED = "unbounded"
LP_ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpData:
    """Standard-form arrays for one model: structural columns then slacks."""

    A: sp.csc_matrix  # m x ncols
    AT: sp.csc_matrix  # transpose, cached for pricing
    b: np.ndarray
    c: np.ndarray  # phase-2 costs (internal minimization)
    lb: np.ndarray
    ub: np.ndarray
    nstruct: int

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def ncols(self) -> int:
        return self.A.shape[1]

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "LpData":
        return LpData(self.A, self.AT, self.b, self.c, lb, ub, self.nstruct)

    def column(self, j: int) -> np.ndarray:
        a = np.zeros(self.m)
        s, e = self.A.indptr[j], self.A.indptr[j + 1]
        a[self.A.indices[s:e]] = self.A.data[s:e]
        return a


def build_lp_data(model: MipModel, extra_rows=None) -> LpData:
    """Assemble [A | I] standard form; binaries are relaxed to their bounds."""
    rows = list(model.lin_rows)
    if extra_rows:
        rows.extend(extra_rows)
    n = len(model.vars)
    m = len(rows)

    data, ri, ci = [], [], []
    b = np.zeros(m)
    slack_lb = np.zeros(m)
    slack_ub = np.zeros(m)
    for k, row in enumerate(rows):
        for j, coef in row.coeffs.items():
            if coef != 0.0:
                data.append(float(coef))
                ri.append(k)
                ci.append(j)
        b[k] = row.rhs
        if row.sense == LE:
            slack_lb[k], slack_ub[k] = 0.0, INF
        elif row.sense == GE:
            slack_lb[k], slack_ub[k] = -INF, 0.0
        else:
            slack_lb[k], slack_ub[k] = 0.0, 0.0
    for k in range(m):  # slack identity block
        data.append(1.0)
        ri.append(k)
        ci.append(n + k)
    A = sp.csc_matrix(
        (np.asarray(data, dtype=float), (np.asarray(ri), np.asarray(ci))),
        shape=(m, n + m),
    )

    lb = np.concatenate([np.array([v.lb for v in model.vars], dtype=float), slack_lb])
    ub = np.concatenate([np.array([v.ub for v in model.vars], dtype=float), slack_ub])
    sgn = 1.0 if model.sense == "min" else -1.0
    c = np.zeros(n + m)
    for j, coef in model.obj.items():
        c[j] = sgn * coef
    return LpData(A=A, AT=A.T.tocsc(), b=b, c=c, lb=lb, ub=ub, nstruct=n)


@dataclass
class Basis:
    basis: np.ndarray  # column index per row
    vstat: np.ndarray  # status per column

    def copy(self) -> "Basis":
        return Basis(self.basis.copy(), self.vstat.copy())


@dataclass
class LpResult:
    status: str
    x: np.ndarray  # full column values (structural + slacks)
    obj: float  # internal (minimization) objective
    basis: Basis | None
    iters: int
    message: str = ""


class _Factors:
    """B = LU * E_1 * ... * E_k; solves B d = a (ftran) and B^T y = c (btran)."""

    def __init__(self, A: sp.csc_matrix, basis: np.ndarray):
        self.lu = spla.splu(A[:, basis].tocsc())
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, rhs: np.ndarray) -> np.ndarray:
        w = self.lu.solve(rhs)
        for r, d in self.etas:
            wr = w[r] / d[r]
            if wr != 0.0:
                w -= wr * d
            w[r] = wr
        return w

    def btran(self, rhs: np.ndarray) -> np.ndarray:
        y = rhs.astype(float, copy=True)
        for r, d in reversed(self.etas):
            yr = y[r]
            s = d @ y - d[r] * yr
            y[r] = (yr - s) / d[r]
        return self.lu.solve(y, trans="T")

    def push_eta(self, r: int, d: np.ndarray):
        self.etas.append((r, d.copy()))


def _nonbasic_value(j, vstat, lb, ub):
    s = vstat[j]
    if s == AT_LB:
        return lb[j]
    if s == AT_UB:
        return ub[j]
    return 0.0  # free at zero


def _nonbasic_vector(lp: LpData, bas: Basis) -> np.ndarray:
    """Full-length vector of nonbasic resting values (zeros at basic slots)."""
    x = np.zeros(lp.ncols)
    at_lb = bas.vstat == AT_LB
    at_ub = bas.vstat == AT_UB
    x[at_lb] = lp.lb[at_lb]
    x[at_ub] = lp.ub[at_ub]
    return x


def _full_x(lp: LpData, bas: Basis, x_b: np.ndarray) -> np.ndarray:
    x = _nonbasic_vector(lp, bas)
    x[bas.basis] = x_b
    return x


def default_basis(lp: LpData) -> Basis:
    """All-slack basis; structural columns at the bound nearest zero."""
    vstat = np.empty(lp.ncols, dtype=np.int8)
    finite_lb = lp.lb[: lp.nstruct] > -INF
    finite_ub = lp.ub[: lp.nstruct] < INF
    vstat[: lp.nstruct] = np.where(finite_lb, AT_LB, np.where(finite_ub, AT_UB, FREE_NB))
    vstat[lp.nstruct:] = BASIC
    basis = np.arange(lp.nstruct, lp.ncols, dtype=np.int64)
    return Basis(basis, vstat)


def solve_lp_core(
    lp: LpData,
    start: Basis | None = None,
    max_iters: int | None = None,
) -> LpResult:
    m, ncols = lp.m, lp.ncols
    if m == 0:
        return _solve_unconstrained(lp)
    if max_iters is None:
        max_iters = 20000 + 40 * (m + ncols)

    bas = start.copy() if start is not None else default_basis(lp)
    try:
        fact = _Factors(lp.A, bas.basis)
    except RuntimeError:
        bas = default_basis(lp)
        fact = _Factors(lp.A, bas.basis)

    fixed = lp.lb == lp.ub

    def compute_xb():
        xn = _nonbasic_vector(lp, bas)
        return fact.ftran(lp.b - lp.A @ xn)

    x_b = compute_xb()
    lb_b = lp.lb[bas.basis]
    ub_b = lp.ub[bas.basis]

    degen_count = 0
    bland_threshold = 10 * (m + ncols)
    iters = 0
    pivots_since_refactor = 0

    while True:
        if iters >= max_iters:
            return LpResult(LP_ITERATION_LIMIT, _full_x(lp, bas, x_b),
                            _struct_obj(lp, bas, x_b), bas, iters,
                            "simplex iteration limit")
        iters += 1
        if pivots_since_refactor >= REFACTOR_EVERY:
            try:
                fact = _Factors(lp.A, bas.basis)
            except RuntimeError:
                # drifted into a numerically singular basis: restart clean
                bas = default_basis(lp)
                fact = _Factors(lp.A, bas.basis)
            x_b = compute_xb()
            lb_b = lp.lb[bas.basis]
            ub_b = lp.ub[bas.basis]
            pivots_since_refactor = 0

        below = x_b < lb_b - FEAS_TOL
        above = x_b > ub_b + FEAS_TOL
        phase1 = bool(below.any() or above.any())
        if phase1:
            d_b = np.where(below, -1.0, np.where(above, 1.0, 0.0))
            y = fact.btran(d_b)
            red = -(lp.AT @ y)
        else:
            y = fact.btran(lp.c[bas.basis])
            red = lp.c - lp.AT @ y

        nonbasic = bas.vstat != BASIC
        cand_up = nonbasic & ~fixed & (
            ((bas.vstat == AT_LB) | (bas.vstat == FREE_NB)) & (red < -OPT_TOL)
        )
        cand_dn = nonbasic & ~fixed & (
            ((bas.vstat == AT_UB) | (bas.vstat == FREE_NB)) & (red > OPT_TOL)
        )
        any_cand = cand_up | cand_dn
        if not any_cand.any():
            if phase1:
                return LpResult(LP_INFEASIBLE, _full_x(lp, bas, x_b),
                                _struct_obj(lp, bas, x_b), bas, iters,
                                "phase 1 optimum is infeasible")
            return LpResult(LP_OPTIMAL, _full_x(lp, bas, x_b),
                            _struct_obj(lp, bas, x_b), bas, iters)

        if degen_count > bland_threshold:
            j = int(np.flatnonzero(any_cand)[0])
        else:
            score = np.where(any_cand, np.abs(red), -1.0)
            j = int(np.argmax(score))  # first max: lowest index on ties
        direction = 1.0 if cand_up[j] else -1.0

        d_col = fact.ftran(lp.column(j))
        delta = -direction * d_col  # basic motion per unit entering step

        t, blocking, block_bound = _ratio_test(delta, x_b, lb_b, ub_b)

        t_flip = INF
        if lp.lb[j] > -INF and lp.ub[j] < INF:
            t_flip = lp.ub[j] - lp.lb[j]

        if t == INF and t_flip == INF:
            if phase1:
                raise NumericalFailure("unblocked phase-1 direction")
            return LpResult(LP_UNBOUNDED, _full_x(lp, bas, x_b),
                            -INF, bas, iters, "unbounded direction")

        if t_flip <= t:
            x_b += t_flip * delta
            bas.vstat[j] = AT_UB if bas.vstat[j] == AT_LB else AT_LB
            if t_flip <= DEGEN_TOL:
                degen_count += 1
            pivots_since_refactor += 1
            continue

        if t <= DEGEN_TOL:
            degen_count += 1
        leave = int(bas.basis[blocking])
        enter_val = _nonbasic_value(j, bas.vstat, lp.lb, lp.ub) + direction * t
        x_b += t * delta
        x_b[blocking] = enter_val
        bas.vstat[leave] = AT_LB if fixed[leave] else block_bound
        bas.vstat[j] = BASIC
        bas.basis[blocking] = j
        lb_b[blocking] = lp.lb[j]
        ub_b[blocking] = lp.ub[j]
        fact.push_eta(blocking, d_col)
        pivots_since_refactor += 1


def _ratio_test(delta, x_b, lb_b, ub_b):
    """Two-pass (Harris) ratio test, phase aware.

    Basic variables outside their bounds block at the bound they are moving
    toward (restoring feasibility); moving further away never blocks.  The
    first pass finds the smallest step with bounds relaxed by FEAS_TOL, the
    second picks the largest pivot among blockers within that step, which
    keeps the eta updates well conditioned.
    Returns (step, blocking position or -1, bound status the leaver takes).
    """
    adelta = np.abs(delta)
    move = adelta > PIV_TOL
    dec = move & (delta < 0.0)
    inc = move & (delta > 0.0)

    ti = np.full(delta.shape, INF)
    tgt = np.zeros(delta.shape, dtype=np.int8)

    infeas_above = dec & (x_b > ub_b + FEAS_TOL)
    np.divide(ub_b - x_b, delta, out=ti, where=infeas_above)
    tgt[infeas_above] = AT_UB

    feas_dec = dec & ~infeas_above & (lb_b > -INF) & (x_b >= lb_b - FEAS_TOL)
    np.divide(lb_b - x_b, delta, out=ti, where=feas_dec)
    tgt[feas_dec] = AT_LB

    infeas_below = inc & (x_b < lb_b - FEAS_TOL)
    np.divide(lb_b - x_b, delta, out=ti, where=infeas_below)
    tgt[infeas_below] = AT_LB

    feas_inc = inc & ~infeas_below & (ub_b < INF) & (x_b <= ub_b + FEAS_TOL)
    np.divide(ub_b - x_b, delta, out=ti, where=feas_inc)
    tgt[feas_inc] = AT_UB

    np.maximum(ti, 0.0, out=ti)
    blockable = ti < INF
    if not blockable.any():
        return INF, -1, 0
    # pass 1: relaxed step, letting each blocker overshoot by FEAS_TOL
    t_rel = np.min(np.where(blockable, ti + FEAS_TOL / np.maximum(adelta, PIV_TOL),
                            INF))
    # pass 2: largest pivot among blockers within the relaxed step
    cand = blockable & (ti <= t_rel)
    piv = np.where(cand, adelta, -1.0)
    blocking = int(np.argmax(piv))
    return float(ti[blocking]), blocking, int(tgt[blocking])


def _struct_obj(lp: LpData, bas: Basis, x_b: np.ndarray) -> float:
    return float(lp.c @ _full_x(lp, bas, x_b))


def _solve_unconstrained(lp: LpData) -> LpResult:
    x = np.zeros(lp.ncols)
    for j in range(lp.ncols):
        cj = lp.c[j]
        if cj > 0.0:
            if lp.lb[j] == -INF:
                return LpResult(LP_UNBOUNDED, x, -INF, None, 0, "unbounded variable")
            x[j] = lp.lb[j]
        elif cj < 0.0:
            if lp.ub[j] == INF:
                return LpResult(LP_UNBOUNDED, x, -INF, None, 0, "unbounded variable")
            x[j] = lp.ub[j]
        else:
            x[j] = lp.lb[j] if lp.lb[j] > -INF else min(lp.ub[j], 0.0)
            if math.isinf(x[j]):
                x[j] = 0.0
    return LpResult(LP_OPTIMAL, x, float(lp.c @ x), None, 0)
