"""End-to-end restoration pipelines and the capability-order baseline.

Two canonical flows:

* plan with the chosen power-flow model, then validate with the AC
  redispatch (``run_rop_then_redispatch``);
* shrink the repair set first, then order only the kept components
  (``run_mrsp_then_rop``), which trades served-while-repairing energy for a
  much smaller ordering model.

The baseline orders repairs by component capability (generator pmax, branch
rating; unlimited ratings first) and scores service with the AC validator.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import acvalidate, formulations, netio
from .grid import (BRANCH, GEN, DamageScenario, EnsReport, GridError,
                   MultiPeriodCase, Network, RestorationPlan, apply_damage,
                   replicate, update_status)
from .mip import (GAP_LIMIT, INFEASIBLE, OPTIMAL, MipSolution, SolveLimits,
                  solve_lp, solve_mip)


class PipelineInfeasible(GridError):
    def __init__(self, stage, message=""):
        super().__init__(f"{stage}: {message or 'infeasible'}")
        self.stage = stage


class MrspInfeasible(PipelineInfeasible):
    def __init__(self, message=""):
        super().__init__("mrsp", message or "full load unreachable even with all repairs")


class SolverLimit(GridError):
    def __init__(self, stage, sol: MipSolution):
        super().__init__(f"{stage}: stopped at {sol.status}, bound {sol.bound}")
        self.stage = stage
        self.solution = sol


@dataclass
class PipelineResult:
    formulation: str
    plan: RestorationPlan
    report: EnsReport
    estimated_ens_mwh: float
    true_ens_mwh: float
    timings: dict[str, float] = field(default_factory=dict)
    mrsp_set: list[tuple[str, int]] | None = None
    mip_gap: float = 0.0

    def check(self, total_energy_mwh: float):
        for k, v in self.timings.items():
            if v < 0:
                raise GridError(f"negative timing {k}")
        if self.formulation == formulations.SOC:
            slack = 1e-4 * max(total_energy_mwh, 1.0)
            if self.estimated_ens_mwh > self.true_ens_mwh + slack:
                raise GridError(
                    f"relaxation estimate {self.estimated_ens_mwh} exceeds "
                    f"true ENS {self.true_ens_mwh}")
        return self


def _checked(sol: MipSolution, stage: str, allow_gap: bool = True) -> MipSolution:
    if sol.status == INFEASIBLE:
        raise PipelineInfeasible(stage)
    if sol.status == OPTIMAL or (allow_gap and sol.status == GAP_LIMIT):
        return sol
    raise SolverLimit(stage, sol)


def run_rop_then_redispatch(net: Network, dmg: DamageScenario, periods: int,
                            formulation: str = formulations.DC,
                            period_hours: float = 1.0,
                            count_initial_period: bool = True,
                            limits: SolveLimits | None = None) -> PipelineResult:
    """Order repairs with the approximate model, then validate against AC."""
    timings: dict[str, float] = {}
    t_all = time.perf_counter()
    case = replicate(net, dmg, periods, period_hours)

    t0 = time.perf_counter()
    model = formulations.build_rop(case, formulation)
    timings["build_rop"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sol = _checked(solve_mip(model, limits), "rop")
    timings["solve_rop"] = time.perf_counter() - t0

    plan = formulations.decode_plan(case, model, sol, formulation)
    est = formulations.estimated_ens_mwh(case, plan, count_initial_period)

    t0 = time.perf_counter()
    report = acvalidate.redispatch_plan(case, plan, count_initial_period, est)
    timings["redispatch"] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - t_all

    result = PipelineResult(formulation, plan, report, est,
                            report.true_ens_mwh, timings, None, sol.gap)
    total_energy = net.total_load() * net.base_mva * period_hours * (
        periods + 1 if count_initial_period else periods)
    return result.check(total_energy)


def run_mrsp_then_rop(net: Network, dmg: DamageScenario, periods: int,
                      formulation: str = formulations.DC,
                      period_hours: float = 1.0,
                      count_initial_period: bool = True,
                      limits: SolveLimits | None = None) -> PipelineResult:
    """Shrink the repair set, then order only the kept components."""
    timings: dict[str, float] = {}
    t_all = time.perf_counter()
    damaged_net = apply_damage(net, dmg)

    t0 = time.perf_counter()
    mrsp_model = formulations.build_mrsp(damaged_net, formulation)
    timings["build_mrsp"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    try:
        mrsp_sol = _checked(solve_mip(mrsp_model, limits), "mrsp")
    except PipelineInfeasible as exc:
        raise MrspInfeasible() from exc
    timings["solve_mrsp"] = time.perf_counter() - t0

    indicators = formulations.mrsp_set(damaged_net, mrsp_model, mrsp_sol)
    reduced_net = update_status(damaged_net, indicators)
    kept = sorted(item for item, z in indicators.items() if round(z) == 1)
    reduced_dmg = DamageScenario(frozenset(kept))
    case = replicate(reduced_net, reduced_dmg, periods, period_hours)

    t0 = time.perf_counter()
    model = formulations.build_rop(case, formulation)
    timings["build_rop"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sol = _checked(solve_mip(model, limits), "rop")
    timings["solve_rop"] = time.perf_counter() - t0

    plan = formulations.decode_plan(case, model, sol, formulation)
    est = formulations.estimated_ens_mwh(case, plan, count_initial_period)

    t0 = time.perf_counter()
    report = acvalidate.redispatch_plan(case, plan, count_initial_period, est)
    timings["redispatch"] = time.perf_counter() - t0
    timings["optimize"] = (timings["build_mrsp"] + timings["solve_mrsp"]
                           + timings["build_rop"] + timings["solve_rop"])
    timings["total"] = time.perf_counter() - t_all

    result = PipelineResult(formulation, plan, report, est,
                            report.true_ens_mwh, timings, kept, sol.gap)
    total_energy = net.total_load() * net.base_mva * period_hours * (
        periods + 1 if count_initial_period else periods)
    return result.check(total_energy)


def capability(net: Network, kind: str, cid: int) -> float:
    if kind == GEN:
        return net.gens[cid].pmax
    if kind == BRANCH:
        rate = net.branches[cid].rate_a
        return float("inf") if rate == 0.0 else rate
    return float("inf")  # buses first: everything depends on them


def heuristic_order(net: Network, dmg: DamageScenario,
                    periods: int, period_hours: float = 1.0) -> RestorationPlan:
    """Largest-capability-first repair order, service scored by AC validation.

    Capability ties break by (id, kind name); the order is chunked into the
    same per-period budget the optimizing model would get.
    """
    case = replicate(net, dmg, periods, period_hours)
    periods = case.periods  # collapses to the single base state if undamaged
    items = sorted(dmg.sorted_items(),
                   key=lambda it: (-capability(net, it[0], it[1]), it[1], it[0]))
    budget = case.repairs_per_period
    status: dict[tuple[str, int], list[int]] = {it: [0] for it in items}
    for n in range(1, periods + 1):
        batch = set(items[(n - 1) * budget: n * budget])
        for it in items:
            status[it].append(1 if it in batch else status[it][n - 1])

    fractions = {lid: 0.0 for lid in net.loads}
    per_load: dict[int, list[float]] = {lid: [] for lid in net.loads}
    served_mwh = 0.0
    for n in range(periods + 1):
        energized = {it: bool(zs[n]) for it, zs in status.items()}
        dispatch = acvalidate.max_load_delivery(case.base, energized, fractions,
                                                period=n)
        fractions = dict(fractions)
        fractions.update(dispatch.fractions)
        for lid in net.loads:
            per_load[lid].append(fractions.get(lid, 0.0))
        served_mwh += dispatch.served_mw * period_hours

    plan = RestorationPlan(periods=periods, period_hours=period_hours,
                           status=status, load_fraction=per_load,
                           objective_value=round(served_mwh, 3),
                           formulation="heuristic")
    return plan.validate(case)


def score_plan_dc(case: MultiPeriodCase, plan: RestorationPlan) -> float:
    """Served energy (MWh) the DC ordering model assigns to a fixed plan."""
    model = formulations.build_rop(case, formulations.DC)
    for item, zs in plan.status.items():
        kind, cid = item
        for n, z in enumerate(zs):
            idx = model.var_index(f"z_{kind}[{cid}]@{n}")
            model.vars[idx].lb = model.vars[idx].ub = float(z)
    sol = _checked(solve_lp(model), "dc-score")
    return sol.objective * case.base.base_mva * case.period_hours


def pipeline_result_to_dict(result: PipelineResult,
                            include_timings: bool = False) -> dict:
    out = {
        "formulation": result.formulation,
        "estimated_ens_mwh": round(result.estimated_ens_mwh, 3),
        "true_ens_mwh": round(result.true_ens_mwh, 3),
        "mip_gap": round(result.mip_gap, 9),
        "plan": netio.plan_to_dict(result.plan),
        "report": netio.report_to_dict(result.report),
    }
    if result.mrsp_set is not None:
        out["mrsp_set"] = {
            "branch": sorted(i for k, i in result.mrsp_set if k == BRANCH),
            "gen": sorted(i for k, i in result.mrsp_set if k == GEN),
            "bus": sorted(i for k, i in result.mrsp_set if k == "bus"),
        }
    if include_timings:
        out["timings_s"] = {k: round(v, 3) for k, v in sorted(result.timings.items())}
    return out
