"""Independent reference computations used to cross-check the solvers.

Everything here goes through scipy (HiGHS linprog, dense linear algebra),
never through the package's own simplex or power-flow code, so agreement is
meaningful.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from grs.grid import BRANCH, GEN, MultiPeriodCase, Network


def dc_max_served(net: Network, energized: dict, angle_bound=0.5236) -> float:
    """Largest servable load (pu) with fixed statuses under the DC law."""
    buses = sorted(b for b in net.buses if net.buses[b].bus_type != 4)
    pos = {b: i for i, b in enumerate(buses)}
    gens = [g for g in sorted(net.gens)
            if net.gens[g].in_service and energized.get((GEN, g), not net.gens[g].damaged)]
    brs = [k for k in sorted(net.branches)
           if net.branches[k].in_service
           and energized.get((BRANCH, k), not net.branches[k].damaged)]
    loads = sorted(net.loads)

    ng, nb, nl, nn = len(gens), len(brs), len(loads), len(buses)
    n = ng + nb + nl + nn  # pg, flow, served-fraction, theta
    c = np.zeros(n)
    c[ng + nb: ng + nb + nl] = [-net.loads[l].pd for l in loads]

    A_eq, b_eq = [], []
    for b in buses:
        row = np.zeros(n)
        for i, g in enumerate(gens):
            if net.gens[g].bus == b:
                row[i] = 1.0
        for j, k in enumerate(brs):
            br = net.branches[k]
            if br.f_bus == b:
                row[ng + j] = -1.0
            if br.t_bus == b:
                row[ng + j] = 1.0
        for m, l in enumerate(loads):
            if net.loads[l].bus == b:
                row[ng + nb + m] = -net.loads[l].pd
        A_eq.append(row)
        b_eq.append(sum(s.gs for s in net.shunts.values() if s.bus == b))
    for j, k in enumerate(brs):
        br = net.branches[k]
        row = np.zeros(n)
        row[ng + j] = 1.0
        bp = 1.0 / (br.x * br.tap)
        row[ng + nb + nl + pos[br.f_bus]] = -bp
        row[ng + nb + nl + pos[br.t_bus]] = bp
        A_eq.append(row)
        b_eq.append(-bp * br.shift)

    bounds = []
    for g in gens:
        bounds.append((min(net.gens[g].pmin, 0.0), net.gens[g].pmax))
    for k in brs:
        r = net.branches[k].rate_a
        big = abs(1.0 / (net.branches[k].x * net.branches[k].tap)) * 2 * angle_bound
        bounds.append((-r, r) if r > 0 else (-big, big))
    for _ in loads:
        bounds.append((0.0, 1.0))
    for _ in buses:
        bounds.append((-angle_bound, angle_bound))

    res = linprog(c, A_eq=np.array(A_eq), b_eq=np.array(b_eq), bounds=bounds,
                  method="highs")
    if res.status != 0:
        return float("nan")
    return -res.fun


def enumerate_rop_orders(case: MultiPeriodCase) -> tuple[float, list]:
    """Best total served (pu-periods) over all repair schedules, by brute force.

    Periods are scored with the fixed-status DC oracle; service monotonicity
    never binds here because later repair sets are supersets, so per-period
    maxima stack (verified for the desk-scale fixtures this backs).  Only
    full-size batches are enumerated: served load is monotone in the
    repaired set, so repairing fewer items than the budget allows can never
    beat some full-batch schedule.
    """
    items = case.damaged_items()
    budget = case.repairs_per_period
    k = case.periods
    net = case.base

    def served(repaired):
        status = {it: (it in repaired) for it in items}
        return dc_max_served(net, status)

    best = (-1.0, None)
    cache = {}

    def score(repaired):
        key = frozenset(repaired)
        if key not in cache:
            cache[key] = served(key)
        return cache[key]

    def rec(remaining, repaired, period, acc):
        nonlocal best
        if period > k:
            if acc > best[0]:
                best = (acc, list(repaired))
            return
        take = min(budget, len(remaining))
        need = len(remaining) - (k - period) * budget
        for batch in itertools.combinations(sorted(remaining), take):
            if len(batch) < need:
                continue
            nxt = repaired | set(batch)
            rec(remaining - set(batch), nxt, period + 1, acc + score(nxt))

    base_served = score(frozenset())
    rec(frozenset(items), frozenset(), 1, base_served)
    return best
