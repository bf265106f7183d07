"""Branch and bound over the bounded-variable simplex, with cone cuts.

Node selection is best bound (ties broken by node id), branching picks the
most fractional binary (ties by lowest variable index), and children warm
start from the parent basis.  Rotated-cone rows x^2 + y^2 <= u*v are enforced
by outer approximation: whenever a node LP solution violates a cone by more
than cone_tol, the equivalent standard-cone function
f = sqrt(x^2 + y^2 + ((u-v)/2)^2) - (u+v)/2 is linearized at that point and
the gradient cut is added globally (cuts are valid for the whole tree).

A deterministic fix-and-round dive runs at the root and every dive_every
processed nodes to supply incumbents early; it changes neither the node
order nor any bound, only the incumbent.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import (GAP_LIMIT, INF, INFEASIBLE, ITERATION_LIMIT, LE,
                    OPTIMAL, UNBOUNDED, ConeRow, LinRow, MipModel,
                    MipSolution, NumericalFailure, SolveStats, cone_violation)
from . import simplex
from .simplex import BASIC, Basis, build_lp_data, solve_lp_core

INT_TOL = 1e-6
CONE_TOL = 1e-6


@dataclass
class SolveLimits:
    gap: float = 1e-6
    nodes: int | None = None
    time_s: float | None = None
    cone_tol: float = CONE_TOL
    max_cone_rounds: int = 60
    cone_cut_budget: int = 6000
    dive: bool = True
    dive_every: int = 25


def cone_cut(cone: ConeRow, x: np.ndarray) -> LinRow:
    """Gradient cut of f = sqrt(x^2+y^2+((u-v)/2)^2) - (u+v)/2 at point x."""
    xh, yh, uh, vh = x[cone.x], x[cone.y], x[cone.u], x[cone.v]
    rho = math.sqrt(xh * xh + yh * yh + ((uh - vh) / 2.0) ** 2)
    f0 = rho - (uh + vh) / 2.0
    gx = xh / rho
    gy = yh / rho
    gu = (uh - vh) / (4.0 * rho) - 0.5
    gv = -(uh - vh) / (4.0 * rho) - 0.5
    rhs = gx * xh + gy * yh + gu * uh + gv * vh - f0
    coeffs = {}
    for idx, g in ((cone.x, gx), (cone.y, gy), (cone.u, gu), (cone.v, gv)):
        coeffs[idx] = coeffs.get(idx, 0.0) + g
    return LinRow(coeffs, LE, rhs, name=f"cut:{cone.name}")


class _LpContext:
    """Master standard-form data plus the growing global cut pool."""

    def __init__(self, model: MipModel):
        self.model = model
        self.cuts: list[LinRow] = []
        self.cut_signatures: set = set()
        self.lp = build_lp_data(model)
        self.nstruct = self.lp.nstruct

    def add_cut(self, cut: LinRow) -> bool:
        """Append a cut unless a nearly identical one is already pooled."""
        sig = (cut.name, tuple(sorted((j, round(c, 7))
                                      for j, c in cut.coeffs.items())),
               round(cut.rhs, 7))
        if sig in self.cut_signatures:
            return False
        self.cut_signatures.add(sig)
        self.cuts.append(cut)
        return True

    def rebuild(self):
        self.lp = build_lp_data(self.model, self.cuts)

    def extend_basis(self, bas: Basis) -> Basis:
        m = self.lp.m
        have = len(bas.basis)
        if have == m and len(bas.vstat) == self.lp.ncols:
            return bas
        extra = [self.nstruct + k for k in range(have, m)]
        basis = np.concatenate([bas.basis, np.asarray(extra, dtype=np.int64)])
        # old slack columns keep their positions; new slacks go at the end
        old_ncols = len(bas.vstat)
        vstat = np.concatenate(
            [bas.vstat, np.full(self.lp.ncols - old_ncols, BASIC, dtype=np.int8)]
        )
        return Basis(basis, vstat)

    def bounds_with(self, fixes: dict[int, tuple[float, float]]):
        lb = self.lp.lb.copy()
        ub = self.lp.ub.copy()
        for j, (lo, hi) in fixes.items():
            lb[j], ub[j] = lo, hi
        return lb, ub


def _solve_with_cones(ctx: _LpContext, fixes, start: Basis | None,
                      limits: SolveLimits, stats: SolveStats):
    """Solve the LP relaxation, adding cone cuts until tight or budget-bound.

    Returns (LpResult, cone_ok); the result's objective is a valid relaxation
    bound even when cone_ok is False (outer approximation).
    """
    bas = start
    for _ in range(limits.max_cone_rounds + 1):
        lb, ub = ctx.bounds_with(fixes)
        lpd = ctx.lp.with_bounds(lb, ub)
        if bas is not None:
            bas = ctx.extend_basis(bas)
        res = solve_lp_core(lpd, start=bas)
        stats.lp_iters += res.iters
        if res.status != simplex.LP_OPTIMAL:
            return res, True
        if not ctx.model.cone_rows:
            return res, True
        violated = [
            cone for cone in ctx.model.cone_rows
            if cone_violation(cone, res.x) > limits.cone_tol
        ]
        if not violated:
            return res, True
        if len(ctx.cuts) >= limits.cone_cut_budget:
            return res, False
        added = 0
        for cone in violated:
            if ctx.add_cut(cone_cut(cone, res.x)):
                added += 1
                stats.cuts += 1
        if added == 0:
            # every useful linearization is already pooled; the remaining
            # violation is below what these cuts can trim
            return res, False
        ctx.rebuild()
        bas = res.basis
    return res, False


def _fractional(model: MipModel, x: np.ndarray) -> list[int]:
    return [j for j in model.binary_indices()
            if abs(x[j] - round(x[j])) > INT_TOL]


def _most_fractional(frac_idx: list[int], x: np.ndarray) -> int:
    best = frac_idx[0]
    best_d = abs(x[best] - round(x[best]))
    for j in frac_idx[1:]:
        d = abs(x[j] - round(x[j]))
        if d > best_d + 1e-12:
            best, best_d = j, d
    return best


@dataclass(order=True)
class _Node:
    bound: float
    nid: int
    fixes: dict = field(compare=False)
    basis: Basis | None = field(compare=False, default=None)


def solve_lp(model: MipModel, start: Basis | None = None) -> MipSolution:
    """Solve the LP relaxation: binaries relaxed, cone rows ignored."""
    t0 = time.perf_counter()
    lpd = build_lp_data(model)
    res = solve_lp_core(lpd, start=start)
    stats = SolveStats(nodes=0, lp_iters=res.iters,
                       wall_time=time.perf_counter() - t0)
    return _lp_to_solution(model, res, stats)


def _lp_to_solution(model: MipModel, res, stats) -> MipSolution:
    sgn = 1.0 if model.sense == "min" else -1.0
    n = len(model.vars)
    if res.status == simplex.LP_OPTIMAL:
        obj = sgn * res.obj + model.obj_const
        return MipSolution(OPTIMAL, res.x[:n].copy(), obj, obj, 0.0, stats)
    if res.status == simplex.LP_INFEASIBLE:
        return MipSolution(INFEASIBLE, res.x[:n].copy(), math.nan, math.nan,
                           math.inf, stats, res.message)
    if res.status == simplex.LP_UNBOUNDED:
        bad = -sgn * INF if model.sense == "max" else -INF
        return MipSolution(UNBOUNDED, res.x[:n].copy(), bad, bad, math.inf,
                           stats, res.message)
    raise NumericalFailure(res.message or "simplex did not terminate")


def solve_mip(model: MipModel, limits: SolveLimits | None = None) -> MipSolution:
    """Branch and bound; see module docstring for the search rules."""
    limits = limits or SolveLimits()
    t0 = time.perf_counter()
    stats = SolveStats()
    ctx = _LpContext(model)
    sgn = 1.0 if model.sense == "min" else -1.0
    n = len(model.vars)

    def external(v):  # internal minimization value -> reported objective
        return sgn * v + model.obj_const

    incumbent_x = None
    incumbent_obj = INF  # internal scale
    next_id = 0
    heap: list[_Node] = []

    def rel_gap():
        if incumbent_x is None:
            return math.inf
        lo = heap[0].bound if heap else incumbent_obj
        lo = min(lo, incumbent_obj)
        a, b = external(incumbent_obj), external(lo)
        return abs(a - b) / max(1.0, abs(a))

    def best_bound():
        if heap:
            return min(heap[0].bound, incumbent_obj)
        return incumbent_obj if incumbent_x is not None else INF

    def finish(status):
        stats.wall_time = time.perf_counter() - t0
        if incumbent_x is None:
            if status == INFEASIBLE:
                return MipSolution(INFEASIBLE, np.zeros(n), math.nan, math.nan,
                                   math.inf, stats)
            return MipSolution(status, np.zeros(n), math.nan,
                               external(best_bound()), math.inf, stats,
                               "no incumbent found")
        gap = rel_gap()
        return MipSolution(status, incumbent_x[:n].copy(),
                           external(incumbent_obj), external(best_bound()),
                           gap, stats)

    def try_incumbent(x, obj):
        nonlocal incumbent_x, incumbent_obj
        if obj < incumbent_obj - 1e-12:
            incumbent_x = x.copy()
            incumbent_obj = obj

    def dive(x0, fixes0, basis0):
        fixes = dict(fixes0)
        x, bas = x0, basis0
        for _ in range(model.num_binary + 2):
            frac = _fractional(model, x)
            if not frac:
                ok = all(cone_violation(c, x) <= limits.cone_tol
                         for c in model.cone_rows)
                if ok:
                    try_incumbent(x, _internal_obj(ctx, x))
                return
            j = _most_fractional(frac, x)
            v = float(round(x[j]))
            fixes[j] = (v, v)
            res, cone_ok = _solve_with_cones(ctx, fixes, bas, limits, stats)
            if res.status != simplex.LP_OPTIMAL or not cone_ok:
                return
            x, bas = res.x, res.basis

    # root
    root = _Node(-INF, next_id, {}, None)
    next_id += 1
    heapq.heappush(heap, root)
    processed = 0

    while heap:
        if limits.time_s is not None and time.perf_counter() - t0 > limits.time_s:
            return finish(ITERATION_LIMIT)
        if limits.nodes is not None and processed >= limits.nodes:
            return finish(ITERATION_LIMIT)
        if incumbent_x is not None:
            g = rel_gap()
            if g <= 1e-6:
                return finish(OPTIMAL)
            if g <= limits.gap:
                return finish(GAP_LIMIT)

        node = heapq.heappop(heap)
        if incumbent_x is not None and node.bound >= incumbent_obj - 1e-12:
            # best-first: every remaining node is at least as bad
            heap.clear()
            break

        res, cone_ok = _solve_with_cones(ctx, node.fixes, node.basis, limits, stats)
        processed += 1
        stats.nodes = processed

        if res.status == simplex.LP_INFEASIBLE:
            continue
        if res.status == simplex.LP_UNBOUNDED:
            return finish(UNBOUNDED)
        if res.status != simplex.LP_OPTIMAL:
            # retry cold once before giving up
            res, cone_ok = _solve_with_cones(ctx, node.fixes, None, limits, stats)
            if res.status == simplex.LP_INFEASIBLE:
                continue
            if res.status != simplex.LP_OPTIMAL:
                raise NumericalFailure(res.message or "node LP failed")

        node_obj = res.obj
        if incumbent_x is not None and node_obj >= incumbent_obj - 1e-12:
            continue

        frac = _fractional(model, res.x)
        if not frac:
            if cone_ok:
                try_incumbent(res.x, node_obj)
                continue
            # integral but the cut budget ran out before the cones closed:
            # the region cannot be certified, give up honestly
            return finish(ITERATION_LIMIT)

        if limits.dive and (processed == 1 or processed % limits.dive_every == 0):
            dive(res.x, node.fixes, res.basis)

        j = _most_fractional(frac, res.x)
        for v in (0.0, 1.0):  # down child first, then up
            fixes = dict(node.fixes)
            fixes[j] = (v, v)
            child = _Node(node_obj, next_id, fixes, res.basis)
            next_id += 1
            heapq.heappush(heap, child)

    if incumbent_x is None:
        return finish(INFEASIBLE)
    return finish(OPTIMAL)


def _internal_obj(ctx: _LpContext, x: np.ndarray) -> float:
    return float(ctx.lp.c[: len(x)] @ x)
