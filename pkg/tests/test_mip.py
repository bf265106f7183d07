import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from grs.mip import (BINARY, EQ, GE, LE, INFEASIBLE, OPTIMAL, UNBOUNDED,
                     MipModel, cone_violation, solve_lp, solve_mip)


def test_lp_box_cap():
    m = MipModel()
    x = m.add_var("x", 0, 1)
    y = m.add_var("y", 0, 1)
    m.add_row({x: 1, y: 1}, LE, 1.0)
    m.set_objective("max", {x: 1, y: 1})
    res = solve_lp(m)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_lp_empty_rows():
    m = MipModel()
    m.add_var("x", -1, 2)
    m.set_objective("min", {})
    res = solve_lp(m)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(0.0)


def test_lp_vertex():
    m = MipModel()
    x = m.add_var("x", 0, 100)
    y = m.add_var("y", 0, 100)
    m.add_row({x: 1, y: 1}, LE, 4.0)
    m.add_row({x: 1, y: 3}, LE, 6.0)
    m.set_objective("max", {x: 3, y: 2})
    res = solve_lp(m)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(12.0, abs=1e-7)
    assert res.values[0] == pytest.approx(4.0, abs=1e-7)
    assert res.values[1] == pytest.approx(0.0, abs=1e-7)


def test_lp_infeasible_and_unbounded():
    m = MipModel()
    x = m.add_var("x", 0, 1)
    m.add_row({x: 1}, GE, 2.0)
    m.set_objective("min", {x: 1})
    assert solve_lp(m).status == INFEASIBLE

    m2 = MipModel()
    x2 = m2.add_var("x", 0, math.inf)
    m2.set_objective("max", {x2: 1})
    assert solve_lp(m2).status == UNBOUNDED


def test_mip_integer_rounding():
    # integer in [0,3] modeled with two binaries, capped at 1.5
    m = MipModel()
    a = m.add_var("a", 0, 1, BINARY)
    b = m.add_var("b", 0, 1, BINARY)
    m.add_row({a: 1, b: 2}, LE, 1.5)
    m.set_objective("max", {a: 1, b: 2})
    res = solve_mip(m)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(1.0, abs=1e-7)


def test_mip_knapsack():
    # enumeration over the 8 subsets: best feasible is {a, c} at value 14
    # ({a, b} would score 16 but weighs 9 > 8)
    values = {"a": 10, "b": 6, "c": 4}
    weights = {"a": 5, "b": 4, "c": 3}
    best = max((sum(values[k] for k in sub) for sub in
                ({}, {"a"}, {"b"}, {"c"}, {"a", "b"}, {"a", "c"}, {"b", "c"},
                 {"a", "b", "c"})
                if sum(weights[k] for k in sub) <= 8), default=0)
    assert best == 14

    m = MipModel()
    a = m.add_var("a", 0, 1, BINARY)
    b = m.add_var("b", 0, 1, BINARY)
    c = m.add_var("c", 0, 1, BINARY)
    m.add_row({a: 5, b: 4, c: 3}, LE, 8.0)
    m.set_objective("max", {a: 10, b: 6, c: 4})
    res = solve_mip(m)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(best, abs=1e-7)
    assert round(res.values[0]) == 1 and round(res.values[2]) == 1


def test_cone_unit_max():
    m = MipModel()
    x = m.add_var("x", -2, 2)
    u = m.add_var("u", 1, 1)
    v = m.add_var("v", 1, 1)
    m.add_cone(x, x, u, v)
    m.set_objective("max", {x: 1})
    res = solve_mip(m)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(math.sqrt(0.5), abs=1e-4)


def _random_milp(rng, nb, nc, nrows):
    m = MipModel()
    for i in range(nb):
        m.add_var(f"z{i}", 0, 1, BINARY)
    lbs = rng.uniform(-4, 0, nc)
    ubs = lbs + rng.uniform(0.5, 6, nc)
    for j in range(nc):
        m.add_var(f"x{j}", lbs[j], ubs[j])
    rows = []
    senses = [LE, GE, EQ]
    for _ in range(nrows):
        cols = rng.choice(nb + nc, size=rng.integers(1, nb + nc + 1),
                          replace=False)
        coeffs = {int(c): float(rng.normal()) for c in cols}
        s = senses[rng.integers(0, 3)]
        if s == EQ and rng.integers(0, 2):
            s = LE
        rhs = float(rng.normal() * 2 + 1)
        m.add_row(coeffs, s, rhs)
        rows.append((coeffs, s, rhs))
    obj = {j: float(rng.normal()) for j in range(nb + nc)}
    sense = "min" if rng.integers(0, 2) == 0 else "max"
    m.set_objective(sense, obj)
    return m, rows, obj, sense, lbs, ubs


def milp_enumeration_oracle(nb, nc, rows, obj, sense, lbs, ubs):
    best = None
    for mask in range(2 ** nb):
        zs = [(mask >> i) & 1 for i in range(nb)]
        A, bu, Aeq, beq = [], [], [], []
        for coeffs, s, rhs in rows:
            rowv = np.zeros(nc)
            r2 = rhs
            for c, v in coeffs.items():
                if c < nb:
                    r2 -= v * zs[c]
                else:
                    rowv[c - nb] = v
            if s == LE:
                A.append(rowv); bu.append(r2)
            elif s == GE:
                A.append(-rowv); bu.append(-r2)
            else:
                Aeq.append(rowv); beq.append(r2)
        cc = np.zeros(nc)
        const = 0.0
        for c, v in obj.items():
            if c < nb:
                const += v * zs[c]
            else:
                cc[c - nb] = v
        kw = {}
        if A:
            kw["A_ub"] = np.array(A); kw["b_ub"] = np.array(bu)
        if Aeq:
            kw["A_eq"] = np.array(Aeq); kw["b_eq"] = np.array(beq)
        if nc:
            ref = linprog(cc if sense == "min" else -cc,
                          bounds=list(zip(lbs, ubs)), method="highs", **kw)
            if ref.status != 0:
                continue
            val = (ref.fun if sense == "min" else -ref.fun) + const
        else:
            ok = True
            for coeffs, s, rhs in rows:
                a = sum(v * zs[c] for c, v in coeffs.items())
                if (s == LE and a > rhs + 1e-9) or (s == GE and a < rhs - 1e-9) \
                        or (s == EQ and abs(a - rhs) > 1e-9):
                    ok = False
                    break
            if not ok:
                continue
            val = const
        if best is None or (sense == "min" and val < best) \
                or (sense == "max" and val > best):
            best = val
    return best


@pytest.mark.parametrize("seed", range(12))
def test_mip_matches_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    nb = int(rng.integers(1, 8))
    nc = int(rng.integers(0, 10))
    m, rows, obj, sense, lbs, ubs = _random_milp(rng, nb, nc, int(rng.integers(2, 9)))
    res = solve_mip(m)
    ref = milp_enumeration_oracle(nb, nc, rows, obj, sense, lbs, ubs)
    if ref is None:
        assert res.status == INFEASIBLE
    else:
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(ref, abs=1e-5, rel=1e-5)


@pytest.mark.parametrize("seed", range(6))
def test_root_bound_dominates(seed):
    rng = np.random.default_rng(77 + seed)
    m, rows, obj, sense, lbs, ubs = _random_milp(rng, 5, 4, 6)
    lp = solve_lp(m)
    mip = solve_mip(m)
    if mip.status != OPTIMAL or lp.status != OPTIMAL:
        return
    if sense == "max":
        assert lp.objective >= mip.objective - 1e-7
    else:
        assert lp.objective <= mip.objective + 1e-7


def test_cone_cut_validity_sampling():
    from grs.mip.bnb import cone_cut
    from grs.mip import ConeRow, row_activity
    rng = np.random.default_rng(5)
    cone = ConeRow(0, 1, 2, 3)
    # violating points to linearize at
    for _ in range(20):
        pt = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2),
                       rng.uniform(0.01, 2), rng.uniform(0.01, 2)])
        if cone_violation(cone, pt) <= 1e-6:
            continue
        cut = cone_cut(cone, pt)
        # every true cone point must satisfy the cut
        for _ in range(200):
            u, v = rng.uniform(0, 2), rng.uniform(0, 2)
            rad = math.sqrt(u * v)
            theta = rng.uniform(0, 2 * math.pi)
            r = rad * math.sqrt(rng.uniform(0, 1))
            p = np.array([r * math.cos(theta), r * math.sin(theta), u, v])
            assert row_activity(cut, p) <= cut.rhs + 1e-9


def test_determinism():
    found_feasible = False
    for seed in range(31415, 31425):
        rng = np.random.default_rng(seed)
        m, *_ = _random_milp(rng, 6, 6, 8)
        r1 = solve_mip(m)
        r2 = solve_mip(m)
        assert r1.status == r2.status
        assert np.array_equal(r1.values, r2.values)
        assert (r1.stats.nodes, r1.stats.lp_iters) == (r2.stats.nodes,
                                                       r2.stats.lp_iters)
        if r1.status == OPTIMAL:
            assert r1.objective == r2.objective
            found_feasible = True
    assert found_feasible


def test_lp_dump_format():
    m = MipModel()
    x = m.add_var("x", 0, 1, BINARY)
    y = m.add_var("y", 0, 2)
    m.add_row({x: 1, y: 1}, LE, 1.5, "cap")
    m.set_objective("max", {x: 2, y: 1})
    text = m.to_lp_string()
    assert "Maximize" in text and "Binary" in text and "Bounds" in text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 20))
def test_lp_random_agrees_with_highs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    m_rows = int(rng.integers(0, 8))
    m = MipModel()
    lbs = rng.uniform(-3, 0, n)
    ubs = lbs + rng.uniform(0.1, 5, n)
    for j in range(n):
        m.add_var(f"x{j}", lbs[j], ubs[j])
    A, bu, Aeq, beq = [], [], [], []
    senses = [LE, GE, EQ]
    for _ in range(m_rows):
        cols = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
        coeffs = {int(c): float(rng.normal()) for c in cols}
        s = senses[rng.integers(0, 3)]
        rhs = float(rng.normal() * 2)
        m.add_row(coeffs, s, rhs)
        rowv = np.zeros(n)
        for c2, v in coeffs.items():
            rowv[c2] = v
        if s == LE:
            A.append(rowv); bu.append(rhs)
        elif s == GE:
            A.append(-rowv); bu.append(-rhs)
        else:
            Aeq.append(rowv); beq.append(rhs)
    c = rng.normal(size=n)
    m.set_objective("min", {j: float(c[j]) for j in range(n)})
    res = solve_lp(m)
    kw = {}
    if A:
        kw["A_ub"] = np.array(A); kw["b_ub"] = np.array(bu)
    if Aeq:
        kw["A_eq"] = np.array(Aeq); kw["b_eq"] = np.array(beq)
    ref = linprog(c, bounds=list(zip(lbs, ubs)), method="highs", **kw)
    if ref.status == 0:
        assert res.status == OPTIMAL
        assert res.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)
    elif ref.status == 2:
        assert res.status == INFEASIBLE
