"""Per-unit network data model, damage scenarios, and multi-period cases.

All quantities are per-unit on the system MVA base.  Component ids are the
ids from the source case file (bus ids from the bus column, generator and
branch ids from 1-based row order); nothing is renumbered, so plans can be
cross-referenced against the case file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

BUS = "bus"
BRANCH = "branch"
GEN = "gen"

DEFAULT_ANGLE_BOUND = math.radians(30.0)


class GridError(Exception):
    pass


class InvalidBusRef(GridError):
    pass


class DuplicateBusId(GridError):
    pass


class NoRefBus(GridError):
    pass


class UnknownComponent(GridError):
    pass


class NonIntegralIndicator(GridError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    bus_type: int  # 1=PQ, 2=PV, 3=slack, 4=isolated
    vmin: float
    vmax: float
    damaged: bool = False

    def check(self):
        if not (0.0 < self.vmin <= self.vmax):
            raise GridError(f"bus {self.id}: bad voltage bounds [{self.vmin}, {self.vmax}]")


@dataclass(frozen=True)
class Branch:
    id: int
    f_bus: int
    t_bus: int
    r: float
    x: float
    b_charge: float  # total line charging susceptance
    rate_a: float  # MVA limit, 0 = unlimited
    tap: float
    shift: float  # radians
    angmin: float  # radians
    angmax: float
    damaged: bool = False
    in_service: bool = True

    def check(self):
        if self.x == 0.0:
            raise GridError(f"branch {self.id}: zero reactance")
        if self.tap <= 0.0:
            raise GridError(f"branch {self.id}: non-positive tap")
        if not self.angmin < self.angmax:
            raise GridError(f"branch {self.id}: empty angle window")


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    pmin: float
    pmax: float
    qmin: float
    qmax: float
    vg: float
    damaged: bool = False
    in_service: bool = True

    def check(self):
        if self.pmin > self.pmax or self.qmin > self.qmax:
            raise GridError(f"gen {self.id}: inverted limits")


@dataclass(frozen=True)
class Load:
    id: int
    bus: int
    pd: float
    qd: float


@dataclass(frozen=True)
class Shunt:
    id: int
    bus: int
    gs: float
    bs: float


@dataclass(frozen=True)
class Network:
    base_mva: float
    buses: dict[int, Bus]
    branches: dict[int, Branch]
    gens: dict[int, Generator]
    loads: dict[int, Load]
    shunts: dict[int, Shunt]
    ref_buses: frozenset[int]
    name: str = ""

    def validate(self) -> "Network":
        seen = set()
        for b in self.buses.values():
            if b.id in seen:
                raise DuplicateBusId(f"bus id {b.id} repeated")
            seen.add(b.id)
            b.check()
        for br in self.branches.values():
            br.check()
            for end in (br.f_bus, br.t_bus):
                if end not in self.buses:
                    raise InvalidBusRef(f"branch {br.id} endpoint {end} unknown")
        for g in self.gens.values():
            g.check()
            if g.bus not in self.buses:
                raise InvalidBusRef(f"gen {g.id} bus {g.bus} unknown")
        for d in self.loads.values():
            if d.bus not in self.buses:
                raise InvalidBusRef(f"load {d.id} bus {d.bus} unknown")
        for s in self.shunts.values():
            if s.bus not in self.buses:
                raise InvalidBusRef(f"shunt {s.bus} bus unknown")
        if not any(
            b in self.buses and self.buses[b].bus_type != 4 for b in self.ref_buses
        ):
            raise NoRefBus("no energizable reference bus")
        return self

    def total_load(self) -> float:
        return sum(d.pd for d in self.loads.values())

    def component(self, kind: str, cid: int):
        pool = {BUS: self.buses, BRANCH: self.branches, GEN: self.gens}[kind]
        if cid not in pool:
            raise UnknownComponent(f"{kind} {cid} not in network")
        return pool[cid]

    def damaged_items(self) -> list[tuple[str, int]]:
        out = []
        for b in sorted(self.buses):
            if self.buses[b].damaged:
                out.append((BUS, b))
        for br in sorted(self.branches):
            if self.branches[br].damaged and self.branches[br].in_service:
                out.append((BRANCH, br))
        for g in sorted(self.gens):
            if self.gens[g].damaged and self.gens[g].in_service:
                out.append((GEN, g))
        return out


@dataclass(frozen=True)
class DamageScenario:
    damaged: frozenset[tuple[str, int]]

    @staticmethod
    def of(branches=(), gens=(), buses=()) -> "DamageScenario":
        items = {(BRANCH, int(i)) for i in branches}
        items |= {(GEN, int(i)) for i in gens}
        items |= {(BUS, int(i)) for i in buses}
        return DamageScenario(frozenset(items))

    def __len__(self):
        return len(self.damaged)

    def sorted_items(self) -> list[tuple[str, int]]:
        return sorted(self.damaged)

    def ids(self, kind: str) -> list[int]:
        return sorted(i for k, i in self.damaged if k == kind)

    def resolve(self, net: Network):
        for kind, cid in self.damaged:
            net.component(kind, cid)


@dataclass(frozen=True)
class MultiPeriodCase:
    base: Network
    periods: int  # K restoration periods; states are 0..K
    repairs_per_period: int
    period_hours: float
    damage: DamageScenario

    def damaged_items(self) -> list[tuple[str, int]]:
        return self.damage.sorted_items()


@dataclass
class RestorationPlan:
    """Per-period component statuses and served-load fractions.

    status[(kind, id)] is a list of K+1 indicator values (0/1), one per
    period state; load_fraction[load_id] likewise in [0, 1].
    objective_value is the model's estimated served energy in MWh.
    """

    periods: int
    period_hours: float
    status: dict[tuple[str, int], list[int]]
    load_fraction: dict[int, list[float]]
    objective_value: float
    formulation: str

    def validate(self, case: MultiPeriodCase):
        k = self.periods
        for (kind, cid), zs in sorted(self.status.items()):
            if len(zs) != k + 1:
                raise GridError(f"{kind} {cid}: wrong status length")
            for a, b in zip(zs, zs[1:]):
                if b < a:
                    raise GridError(f"{kind} {cid}: status not monotone")
            if (kind, cid) in case.damage.damaged:
                if zs[0] != 0:
                    raise GridError(f"{kind} {cid}: damaged but energized at period 0")
                if zs[-1] != 1:
                    raise GridError(f"{kind} {cid}: not restored by final period")
        for n in range(1, k + 1):
            newly = sum(
                self.status[item][n] - self.status[item][n - 1]
                for item in case.damage.damaged
                if item in self.status
            )
            if newly > case.repairs_per_period:
                raise GridError(f"period {n}: {newly} repairs exceed budget")
        for lid, fr in sorted(self.load_fraction.items()):
            if len(fr) != k + 1:
                raise GridError(f"load {lid}: wrong fraction length")
            for a, b in zip(fr, fr[1:]):
                if b < a - 1e-7:
                    raise GridError(f"load {lid}: served fraction decreases")
            if min(fr) < -1e-9 or max(fr) > 1.0 + 1e-9:
                raise GridError(f"load {lid}: fraction outside [0,1]")
        return self

    def energized(self, period: int) -> dict[tuple[str, int], bool]:
        out = {}
        for item, zs in self.status.items():
            out[item] = bool(zs[period])
        return out


@dataclass(frozen=True)
class PeriodEns:
    period: int
    served_mw: float
    shed_mw: float
    ens_mwh: float


@dataclass
class EnsReport:
    """Per-period served/shed power and the resulting energy not served.

    true_ens_mwh comes from the AC redispatch; estimated_ens_mwh from the
    optimization objective.  When count_initial_period is False the totals
    skip period 0 (the pre-restoration state); rows always list it.
    validation_warnings counts islands where the redispatch could not even
    hold the previous period's service (zero on the bundled fixtures).
    """

    period_hours: float
    count_initial_period: bool
    rows: list[PeriodEns]
    estimated_ens_mwh: float
    true_ens_mwh: float
    validation_warnings: int = 0

    def __post_init__(self):
        if not self.rows:
            raise GridError("report needs at least one period")
        for n, row in enumerate(self.rows):
            if row.period != n:
                raise GridError("report periods must be contiguous from 0")

    @staticmethod
    def from_served(total_load_mw, served_mw_by_period, period_hours,
                    count_initial_period, estimated_ens_mwh,
                    validation_warnings=0) -> "EnsReport":
        rows = []
        total = 0.0
        for n, served in enumerate(served_mw_by_period):
            shed = max(0.0, total_load_mw - served)
            ens = shed * period_hours
            rows.append(PeriodEns(n, round(served, 3), round(shed, 3),
                                  round(ens, 3)))
            if n > 0 or count_initial_period:
                total += ens
        return EnsReport(period_hours, count_initial_period, rows,
                         round(estimated_ens_mwh, 3), round(total, 3),
                         validation_warnings)

    def total_served_mw(self) -> float:
        return sum(r.served_mw for r in self.rows)


def apply_damage(net: Network, dmg: DamageScenario) -> Network:
    """Flag scenario components as damaged; idempotent."""
    dmg.resolve(net)
    buses = dict(net.buses)
    branches = dict(net.branches)
    gens = dict(net.gens)
    for kind, cid in dmg.damaged:
        if kind == BUS:
            buses[cid] = replace(buses[cid], damaged=True)
        elif kind == BRANCH:
            branches[cid] = replace(branches[cid], damaged=True)
        else:
            gens[cid] = replace(gens[cid], damaged=True)
    return replace(net, buses=buses, branches=branches, gens=gens)


def replicate(net: Network, dmg: DamageScenario, periods: int,
              period_hours: float = 1.0) -> MultiPeriodCase:
    """Build a K-period restoration case with the minimal uniform budget."""
    dmg.resolve(net)
    if len(dmg) == 0:
        return MultiPeriodCase(apply_damage(net, dmg), 0, 0, period_hours, dmg)
    if periods < 1:
        raise GridError("periods must be >= 1")
    budget = -(-len(dmg) // periods)  # ceil
    return MultiPeriodCase(apply_damage(net, dmg), periods, budget,
                           period_hours, dmg)


def update_status(net: Network, indicators: dict[tuple[str, int], float],
                  int_tol: float = 1e-6) -> Network:
    """Fold repair-choice indicators back into the network.

    Components with indicator ~1 become undamaged (selected for repair);
    components with indicator ~0 are taken out of service so later models
    ignore them.  Indicators farther than int_tol from {0, 1} are rejected.
    """
    buses = dict(net.buses)
    branches = dict(net.branches)
    gens = dict(net.gens)
    for (kind, cid), val in sorted(indicators.items()):
        z = round(val)
        if abs(val - z) > int_tol:
            raise NonIntegralIndicator(f"{kind} {cid}: indicator {val}")
        net.component(kind, cid)
        if kind == BUS:
            # an unchosen bus becomes isolated (type 4), a chosen one is whole
            buses[cid] = replace(buses[cid], damaged=False,
                                 bus_type=buses[cid].bus_type if z else 4)
        elif kind == BRANCH:
            branches[cid] = replace(branches[cid], damaged=False,
                                    in_service=bool(z))
        else:
            gens[cid] = replace(gens[cid], damaged=False, in_service=bool(z))
    return replace(net, buses=buses, branches=branches, gens=gens)


def connected_islands(net: Network,
                      energized: dict[tuple[str, int], bool]) -> list[set[int]]:
    """Partition energized buses by connectivity over energized branches.

    The status map must cover every bus and in-service branch; isolated
    (type 4) buses never join an island.  Islands are returned ordered by
    their minimum bus id.
    """
    alive = [b for b in sorted(net.buses)
             if net.buses[b].bus_type != 4 and energized.get((BUS, b), True)]
    parent = {b: b for b in alive}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for br_id in sorted(net.branches):
        br = net.branches[br_id]
        if not br.in_service or not energized.get((BRANCH, br_id), False):
            continue
        if br.f_bus in parent and br.t_bus in parent:
            ra, rb = find(br.f_bus), find(br.t_bus)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, set[int]] = {}
    for b in alive:
        groups.setdefault(find(b), set()).add(b)
    return [groups[r] for r in sorted(groups)]
