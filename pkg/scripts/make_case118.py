"""Generate the deterministic 118-bus-class transmission case.

Public IEEE-118 data is not redistributable from this environment, so the
scale smoke tests use a synthetic case of the same class: 118 buses in three
areas (area 1 matching the customary bus set 1-23, 25-32, 113-115, 117),
meshed ring-and-chord topology, 54 generators including synchronous
condensers concentrated in area 1, and ~4240 MW of load.  Everything is
drawn from a fixed seed; rerunning reproduces the file byte for byte.
"""

import random
from pathlib import Path

AREA1 = list(range(1, 24)) + list(range(25, 33)) + [113, 114, 115, 117]
AREA2 = [24] + list(range(33, 65)) + [116]
AREA3 = list(range(65, 113)) + [118]

OUT = Path(__file__).resolve().parent.parent / "cases" / "case118_smoke.m"


def ring_and_chords(buses, rng, n_chords):
    edges = []
    k = len(buses)
    for i in range(k):
        edges.append((buses[i], buses[(i + 1) % k]))
    tries = 0
    while n_chords > 0 and tries < 1000:
        tries += 1
        a, b = rng.sample(buses, 2)
        if a > b:
            a, b = b, a
        if abs(buses.index(a) - buses.index(b)) <= 1:
            continue
        if (a, b) in edges:
            continue
        edges.append((a, b))
        n_chords -= 1
    return edges


def main():
    rng = random.Random(118)
    edges = []
    edges += ring_and_chords(AREA1, rng, 16)
    edges += ring_and_chords(AREA2, rng, 16)
    edges += ring_and_chords(AREA3, rng, 24)
    ties = [(23, 24), (32, 33), (30, 38), (64, 65), (49, 66), (47, 69),
            (68, 116), (12, 117), (17, 113), (32, 114), (27, 115), (75, 118),
            (38, 65), (24, 70), (19, 34)]
    for tie in ties:
        if tie not in edges:
            edges.append(tie)
    edges = sorted(set(edges))

    # generators: (bus, pmax MW); condensers get pmax 0 and wide Q range
    gen_buses = [1, 4, 6, 8, 10, 12, 15, 18, 19, 24, 25, 26, 27, 31, 32, 34,
                 36, 40, 42, 46, 49, 54, 55, 56, 59, 61, 62, 65, 66, 69, 70,
                 72, 73, 74, 76, 77, 80, 85, 87, 89, 90, 91, 92, 99, 100, 103,
                 104, 105, 107, 110, 111, 112, 113, 116]
    condensers = {4, 6, 8, 15, 18, 19, 24, 27, 31, 32, 34, 36, 113, 105, 110}
    big = {10: 550, 12: 385, 25: 320, 26: 414, 49: 304, 59: 255, 61: 260,
           65: 491, 66: 492, 69: 805, 80: 577, 89: 707, 100: 352, 103: 240}

    total_load = 4242.0
    load_buses = [b for b in range(1, 119) if b not in (9, 63, 64, 68, 71, 81,
                                                        5, 30, 37, 38, 116,
                                                        87, 111, 112, 117,
                                                        113, 114, 99, 102)]
    rng2 = random.Random(4242)
    weights = [rng2.uniform(0.4, 1.8) for _ in load_buses]
    wsum = sum(weights)
    loads = {b: round(total_load * w / wsum, 1) for b, w in zip(load_buses, weights)}

    lines = []
    lines.append("% Synthetic 118-bus-class transmission case (seeded, deterministic).")
    lines.append("% Three areas; area 1 covers buses 1-23, 25-32, 113-115, 117.")
    lines.append("function mpc = case118_smoke")
    lines.append("mpc.version = '2';")
    lines.append("mpc.baseMVA = 100.0;")
    lines.append("")
    lines.append("%% bus data")
    lines.append("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin")
    lines.append("mpc.bus = [")
    shunt_buses = {5: 40.0, 34: 14.0, 37: -25.0, 44: 10.0, 45: 10.0, 46: 10.0,
                   48: 15.0, 74: 12.0, 79: 20.0, 82: 20.0, 83: 10.0, 105: 20.0,
                   107: 6.0, 110: 6.0}
    for b in range(1, 119):
        btype = 3 if b == 69 else (2 if b in gen_buses else 1)
        pd = loads.get(b, 0.0)
        qd = round(pd * 0.35, 1)
        bs = shunt_buses.get(b, 0.0)
        area = 1 if b in AREA1 else (2 if b in AREA2 else 3)
        lines.append(f"\t{b}\t{btype}\t{pd}\t{qd}\t0.0\t{bs}\t{area}\t1.0\t0.0"
                     f"\t138.0\t1\t1.06\t0.94;")
    lines.append("];")
    lines.append("")
    lines.append("%% generator data")
    lines.append("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin")
    lines.append("mpc.gen = [")
    rng3 = random.Random(54)
    for b in gen_buses:
        if b in condensers:
            pmax = 0.0
            qmax = round(rng3.uniform(100.0, 300.0), 1)
        elif b in big:
            pmax = float(big[b])
            qmax = round(pmax * 0.6, 1)
        else:
            pmax = round(rng3.uniform(60.0, 160.0), 1)
            qmax = round(pmax * 0.7, 1)
        vg = 1.0 if b != 69 else 1.02
        lines.append(f"\t{b}\t0.0\t0.0\t{qmax}\t{-qmax}\t{vg}\t100.0\t1"
                     f"\t{pmax}\t0.0;")
    lines.append("];")
    lines.append("")
    lines.append("%% branch data")
    lines.append("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle"
                 "\tstatus\tangmin\tangmax")
    lines.append("mpc.branch = [")
    rng4 = random.Random(186)
    for (f, t) in edges:
        x = round(rng4.uniform(0.01, 0.05), 4)
        r = round(x / 8.0, 5)
        bch = round(rng4.uniform(0.005, 0.04), 4)
        lines.append(f"\t{f}\t{t}\t{r}\t{x}\t{bch}\t0.0\t0.0\t0.0\t0.0\t0.0"
                     f"\t1\t-30.0\t30.0;")
    lines.append("];")
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} with {len(edges)} branches, {len(gen_buses)} gens, "
          f"{len(loads)} loads, total load {sum(loads.values()):.1f} MW")


if __name__ == "__main__":
    main()
