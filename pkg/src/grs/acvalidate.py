"""AC validation of restoration plans: true served load per period.

A plan fixes which components are energized in each period; this module
re-dispatches generation and scales load per energized island to find the
largest AC-feasible service level, then integrates the shortfall into true
energy not served.  The per-island procedure is deterministic: generators
follow participation factors proportional to their capacity headroom, one
slack generator (largest pmax, ties by lowest id) absorbs losses, and the
uniform load scale is found by binary search with Newton-Raphson feasibility
checks (voltage bounds, branch MVA ratings, generator P/Q limits with
PV-to-PQ switching).

Because the dispatch is a deterministic procedure rather than a nonlinear
optimum, the reported true ENS is an upper bound on what a full multi-period
AC redispatch could achieve; all orderings asserted in tests hold under this
conservative bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (BRANCH, BUS, GEN, EnsReport, GridError, MultiPeriodCase,
                   Network, RestorationPlan, connected_islands)

PF_TOL = 1e-8
PF_MAX_ITER = 30
QLIM_ROUNDS = 10
LAMBDA_TOL = 1e-4
LIMIT_TOL = 1e-6


class PlanCaseMismatch(GridError):
    pass


class NoSlack(GridError):
    pass


@dataclass
class PfState:
    converged: bool
    iterations: int
    mismatch: float
    vm: dict[int, float]
    va: dict[int, float]
    gen_p: dict[int, float]
    gen_q: dict[int, float]
    flow_fr: dict[int, complex]
    flow_to: dict[int, complex]
    slack_gen: int


@dataclass
class IslandResult:
    buses: list[int]
    lam: float
    served_mw: float
    binding: list[str]
    warning: bool
    pf: PfState | None


@dataclass
class PeriodDispatch:
    period: int
    islands: list[IslandResult]
    served_mw: float
    fractions: dict[int, float]
    warnings: int


def _branch_admittances(br):
    y = 1.0 / complex(br.r, br.x)
    shift = complex(math.cos(br.shift), math.sin(br.shift))
    t = br.tap * shift
    yff = (y + 1j * br.b_charge / 2.0) / (br.tap ** 2)
    yft = -y / t.conjugate()
    ytf = -y / t
    ytt = y + 1j * br.b_charge / 2.0
    return yff, yft, ytf, ytt


def _ybus(net: Network, buses: list[int], branches: list[int]) -> np.ndarray:
    pos = {b: i for i, b in enumerate(buses)}
    n = len(buses)
    Y = np.zeros((n, n), dtype=complex)
    for bid in branches:
        br = net.branches[bid]
        f, t = pos[br.f_bus], pos[br.t_bus]
        yff, yft, ytf, ytt = _branch_admittances(br)
        Y[f, f] += yff
        Y[f, t] += yft
        Y[t, f] += ytf
        Y[t, t] += ytt
    for s in net.shunts.values():
        if s.bus in pos:
            Y[pos[s.bus], pos[s.bus]] += complex(s.gs, s.bs)
    return Y


def branch_flows(net: Network, bid: int, vf: complex, vt: complex):
    yff, yft, ytf, ytt = _branch_admittances(net.branches[bid])
    s_fr = vf * (yff * vf + yft * vt).conjugate()
    s_to = vt * (ytf * vf + ytt * vt).conjugate()
    return s_fr, s_to


def residual_injections(net: Network, buses: list[int], branches: list[int],
                        vm: dict[int, float], va: dict[int, float]) -> dict[int, complex]:
    """Bus power injections recomputed from per-branch flows and shunts.

    Independent of the Newton solver's Ybus path; used to cross-check
    converged states.
    """
    v = {b: vm[b] * complex(math.cos(va[b]), math.sin(va[b])) for b in buses}
    inj = {b: 0j for b in buses}
    for bid in branches:
        br = net.branches[bid]
        s_fr, s_to = branch_flows(net, bid, v[br.f_bus], v[br.t_bus])
        inj[br.f_bus] += s_fr
        inj[br.t_bus] += s_to
    for s in net.shunts.values():
        if s.bus in inj:
            inj[s.bus] += (vm[s.bus] ** 2) * complex(s.gs, -s.bs)
    return inj


def power_flow_jacobian(Y: np.ndarray, v: np.ndarray):
    """dS/d(theta) and dS/d(Vm) for injections S = V conj(Y V)."""
    ibus = Y @ v
    diag_v = np.diag(v)
    diag_i = np.diag(ibus)
    diag_e = np.diag(v / np.abs(v))
    ds_dva = 1j * diag_v @ (diag_i - Y @ diag_v).conjugate()
    ds_dvm = diag_v @ (Y @ diag_e).conjugate() + diag_i.conjugate() @ diag_e
    return ds_dva, ds_dvm


def newton_pf(net: Network, buses: list[int], branches: list[int],
              pg_set: dict[int, float], slack_gen: int,
              load_frac: dict[int, float], pv_gens: dict[int, list[int]],
              q_fixed: dict[int, float] | None = None,
              tol: float = PF_TOL, max_iter: int = PF_MAX_ITER) -> PfState:
    """Full Newton-Raphson polar power flow on one island.

    pv_gens maps PV bus id -> energized generator ids there (voltage held at
    the setpoint); q_fixed marks former PV buses pinned at a reactive limit
    (treated as PQ with that generation).  Flat start: V = 1 / PV setpoints,
    angles zero.
    """
    q_fixed = q_fixed or {}
    buses = sorted(buses)
    pos = {b: i for i, b in enumerate(buses)}
    n = len(buses)
    Y = _ybus(net, buses, branches)

    slack_bus = net.gens[slack_gen].bus
    if slack_bus not in pos:
        raise NoSlack(f"slack gen {slack_gen} sits outside the island")
    pv = [b for b in buses if b in pv_gens and b != slack_bus and b not in q_fixed]
    pq = [b for b in buses if b != slack_bus and b not in pv]

    p_spec = np.zeros(n)
    q_spec = np.zeros(n)
    for g, p in pg_set.items():
        p_spec[pos[net.gens[g].bus]] += p
    for lid, frac in load_frac.items():
        ld = net.loads[lid]
        if ld.bus in pos:
            p_spec[pos[ld.bus]] -= frac * ld.pd
            q_spec[pos[ld.bus]] -= frac * ld.qd
    for b, qv in q_fixed.items():
        q_spec[pos[b]] += qv

    vm = np.ones(n)
    va = np.zeros(n)
    for b, gids in pv_gens.items():
        vm[pos[b]] = net.gens[gids[0]].vg
    vm[pos[slack_bus]] = net.gens[slack_gen].vg

    pvpq = [pos[b] for b in buses if b != slack_bus]
    pq_i = [pos[b] for b in pq]

    mismatch = math.inf
    it = 0
    for it in range(max_iter + 1):
        v = vm * np.exp(1j * va)
        s_calc = v * (Y @ v).conjugate()
        dp = p_spec - s_calc.real
        dq = q_spec - s_calc.imag
        f = np.concatenate([dp[pvpq], dq[pq_i]])
        mismatch = float(np.max(np.abs(f))) if f.size else 0.0
        if mismatch <= tol:
            break
        if it == max_iter:
            break
        ds_dva, ds_dvm = power_flow_jacobian(Y, v)
        j11 = ds_dva.real[np.ix_(pvpq, pvpq)]
        j12 = ds_dvm.real[np.ix_(pvpq, pq_i)]
        j21 = ds_dva.imag[np.ix_(pq_i, pvpq)]
        j22 = ds_dvm.imag[np.ix_(pq_i, pq_i)]
        jac = np.block([[j11, j12], [j21, j22]])
        try:
            dx = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return _pf_state(net, buses, branches, vm, va, Y, pg_set, slack_gen,
                             load_frac, False, it, mismatch)
        nva = len(pvpq)
        va[pvpq] += dx[:nva]
        vm[pq_i] += dx[nva:]

    converged = mismatch <= tol
    return _pf_state(net, buses, branches, vm, va, Y, pg_set, slack_gen,
                     load_frac, converged, it, mismatch)


def _pf_state(net, buses, branches, vm, va, Y, pg_set, slack_gen, load_frac,
              converged, iterations, mismatch) -> PfState:
    pos = {b: i for i, b in enumerate(buses)}
    v = vm * np.exp(1j * va)
    s_calc = v * (Y @ v).conjugate()
    gen_p = dict(pg_set)
    gen_q: dict[int, float] = {}

    by_bus: dict[int, list[int]] = {}
    for g, p in pg_set.items():
        by_bus.setdefault(net.gens[g].bus, []).append(g)
    sb = net.gens[slack_gen].bus
    by_bus.setdefault(sb, [])
    if slack_gen not in by_bus[sb]:
        by_bus[sb].append(slack_gen)

    for b, gids in by_bus.items():
        i = pos[b]
        pd = sum(load_frac.get(lid, 0.0) * net.loads[lid].pd
                 for lid in net.loads if net.loads[lid].bus == b)
        qd = sum(load_frac.get(lid, 0.0) * net.loads[lid].qd
                 for lid in net.loads if net.loads[lid].bus == b)
        p_gen_bus = s_calc.real[i] + pd
        q_gen_bus = s_calc.imag[i] + qd
        if b == sb:
            others = sum(pg_set.get(g, 0.0) for g in gids if g != slack_gen)
            gen_p[slack_gen] = p_gen_bus - others
        qr = [max(net.gens[g].qmax - net.gens[g].qmin, 0.0) for g in sorted(gids)]
        tot = sum(qr)
        for g, r in zip(sorted(gids), qr):
            share = r / tot if tot > 0 else 1.0 / len(gids)
            gen_q[g] = q_gen_bus * share

    flow_fr, flow_to = {}, {}
    idx = {b: i for i, b in enumerate(buses)}
    for bid in branches:
        br = net.branches[bid]
        s_fr, s_to = branch_flows(net, bid, v[idx[br.f_bus]], v[idx[br.t_bus]])
        flow_fr[bid] = s_fr
        flow_to[bid] = s_to

    return PfState(converged, iterations, mismatch,
                   {b: float(vm[pos[b]]) for b in buses},
                   {b: float(va[pos[b]]) for b in buses},
                   gen_p, gen_q, flow_fr, flow_to, slack_gen)


def _island_components(net: Network, island: set[int],
                       energized: dict[tuple[str, int], bool]):
    branches = [
        i for i in sorted(net.branches)
        if net.branches[i].in_service
        and energized.get((BRANCH, i), not net.branches[i].damaged)
        and net.branches[i].f_bus in island and net.branches[i].t_bus in island
    ]
    gens = [
        i for i in sorted(net.gens)
        if net.gens[i].in_service
        and energized.get((GEN, i), not net.gens[i].damaged)
        and net.gens[i].bus in island
    ]
    loads = [i for i in sorted(net.loads) if net.loads[i].bus in island]
    return branches, gens, loads


def _attempt(net, island_buses, branches, gens, loads, fractions, binding):
    """One PV/PQ-switched power-flow solve; returns (PfState|None, ok)."""
    slack = max(gens, key=lambda g: (net.gens[g].pmax, -g))
    slack_bus = net.gens[slack].bus

    target = sum(fractions[lid] * net.loads[lid].pd for lid in loads)
    pmin = sum(net.gens[g].pmin for g in gens)
    rng = sum(net.gens[g].pmax - net.gens[g].pmin for g in gens)
    beta = 0.0 if rng <= 0 else min(1.0, max(0.0, (target - pmin) / rng))
    pg_set = {g: net.gens[g].pmin + beta * (net.gens[g].pmax - net.gens[g].pmin)
              for g in gens if g != slack}

    pv_gens: dict[int, list[int]] = {}
    for g in gens:
        pv_gens.setdefault(net.gens[g].bus, []).append(g)

    q_fixed: dict[int, float] = {}
    frac_map = {lid: fractions[lid] for lid in loads}
    pf = None
    for _ in range(QLIM_ROUNDS):
        pf = newton_pf(net, island_buses, branches, pg_set, slack, frac_map,
                       pv_gens, q_fixed)
        if not pf.converged:
            binding.append("non-convergence")
            return pf, False
        switched = False
        for b, gids in sorted(pv_gens.items()):
            if b in q_fixed:
                continue
            qmin = sum(net.gens[g].qmin for g in gids)
            qmax = sum(net.gens[g].qmax for g in gids)
            qbus = sum(pf.gen_q.get(g, 0.0) for g in gids)
            if b == net.gens[slack].bus:
                continue  # slack bus voltage stays pinned; checked below
            if qbus > qmax + LIMIT_TOL:
                q_fixed[b] = qmax
                switched = True
            elif qbus < qmin - LIMIT_TOL:
                q_fixed[b] = qmin
                switched = True
        if not switched:
            break

    ok = True
    for b in island_buses:
        bus = net.buses[b]
        if pf.vm[b] < bus.vmin - LIMIT_TOL or pf.vm[b] > bus.vmax + LIMIT_TOL:
            binding.append(f"voltage bus {b}")
            ok = False
    for bid in branches:
        rate = net.branches[bid].rate_a
        if rate > 0.0:
            if (abs(pf.flow_fr[bid]) > rate + LIMIT_TOL
                    or abs(pf.flow_to[bid]) > rate + LIMIT_TOL):
                binding.append(f"thermal branch {bid}")
                ok = False
    sp = pf.gen_p[slack]
    if sp < net.gens[slack].pmin - LIMIT_TOL or sp > net.gens[slack].pmax + LIMIT_TOL:
        binding.append(f"p-limit slack gen {slack}")
        ok = False
    sbq_gens = pv_gens[slack_bus]
    qbus = sum(pf.gen_q.get(g, 0.0) for g in sbq_gens)
    if (qbus > sum(net.gens[g].qmax for g in sbq_gens) + LIMIT_TOL
            or qbus < sum(net.gens[g].qmin for g in sbq_gens) - LIMIT_TOL):
        binding.append(f"q-limit slack bus {slack_bus}")
        ok = False
    return pf, ok


def max_load_delivery(net: Network, energized: dict[tuple[str, int], bool],
                      prev_fractions: dict[int, float] | None = None,
                      period: int = 0) -> PeriodDispatch:
    """Largest AC-feasible uniform load scale per energized island.

    Served fraction of load d is max(lambda, floor_d) where floor_d is the
    fraction served in the previous period; islands without generation serve
    nothing (with a warning if that breaks a floor).
    """
    prev = prev_fractions or {}
    status = dict(energized)
    for b in sorted(net.buses):
        status.setdefault((BUS, b), not net.buses[b].damaged)
    for i in sorted(net.branches):
        status.setdefault((BRANCH, i), not net.branches[i].damaged)
    for g in sorted(net.gens):
        status.setdefault((GEN, g), not net.gens[g].damaged)
    islands = connected_islands(net, status)

    results: list[IslandResult] = []
    fractions: dict[int, float] = {}
    warnings = 0
    for island in islands:
        branches, gens, loads = _island_components(net, island, status)
        floors = {lid: min(1.0, max(0.0, prev.get(lid, 0.0))) for lid in loads}
        if not loads:
            results.append(IslandResult(sorted(island), 1.0, 0.0, [], False, None))
            continue
        if not gens:
            warn = any(f > 0.0 for f in floors.values())
            warnings += int(warn)
            for lid in loads:
                fractions[lid] = 0.0
            results.append(IslandResult(sorted(island), 0.0, 0.0,
                                        ["no generation"], warn, None))
            continue

        lam_floor = min(floors.values())
        binding: list[str] = []

        def feasible(lam):
            fr = {lid: max(lam, floors[lid]) for lid in loads}
            pf, ok = _attempt(net, sorted(island), branches, gens, loads,
                              fr, binding)
            return pf, ok

        pf1, ok1 = feasible(1.0)
        if ok1:
            lam = 1.0
            pf = pf1
        else:
            pf0, ok0 = feasible(lam_floor)
            if not ok0:
                warnings += 1
                lam = lam_floor
                pf = pf0
                results.append(IslandResult(
                    sorted(island), lam,
                    round(sum(max(lam, floors[lid]) * net.loads[lid].pd
                              for lid in loads) * net.base_mva, 3),
                    sorted(set(binding)), True, pf))
                for lid in loads:
                    fractions[lid] = max(lam, floors[lid])
                continue
            lo, hi = lam_floor, 1.0
            pf = pf0
            while hi - lo > LAMBDA_TOL:
                mid = 0.5 * (lo + hi)
                pfm, okm = feasible(mid)
                if okm:
                    lo = mid
                    pf = pfm
                else:
                    hi = mid
            lam = lo
        served = sum(max(lam, floors[lid]) * net.loads[lid].pd for lid in loads)
        for lid in loads:
            fractions[lid] = max(lam, floors[lid])
        results.append(IslandResult(sorted(island), lam,
                                    round(served * net.base_mva, 3),
                                    sorted(set(binding)), False, pf))

    total = round(sum(r.served_mw for r in results), 3)
    return PeriodDispatch(period, results, total, fractions, warnings)


def redispatch_plan(case: MultiPeriodCase, plan: RestorationPlan,
                    count_initial_period: bool = True,
                    estimated_ens: float | None = None) -> EnsReport:
    """True ENS of a plan: per-period maximal AC load delivery, integrated."""
    net = case.base
    if plan.periods != case.periods:
        raise PlanCaseMismatch(
            f"plan has {plan.periods} periods, case {case.periods}")
    for item in case.damaged_items():
        if item not in plan.status:
            raise PlanCaseMismatch(f"plan misses damaged component {item}")

    if estimated_ens is None:
        from .formulations import estimated_ens_mwh
        estimated_ens = estimated_ens_mwh(case, plan, count_initial_period)

    served = []
    warnings = 0
    fractions: dict[int, float] = {lid: 0.0 for lid in net.loads}
    for n in range(case.periods + 1):
        energized = plan.energized(n)
        dispatch = max_load_delivery(net, energized, fractions, period=n)
        served.append(dispatch.served_mw)
        warnings += dispatch.warnings
        fractions = dict(fractions)
        fractions.update(dispatch.fractions)

    total_load_mw = net.total_load() * net.base_mva
    return EnsReport.from_served(total_load_mw, served, case.period_hours,
                                 count_initial_period, estimated_ens, warnings)
