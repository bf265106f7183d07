"""Brute-force verification of desk-scale repair orderings.

Enumerates every repair schedule for a case/damage pair, scores each period
with an independent DC maximal-service LP (scipy HiGHS), and prints the best
schedule next to the package's own optimizer result. Only sensible for a
handful of damaged components (the schedule count grows multinomially).

Usage: python3 scripts/enumerate_plans.py CASE DAMAGE K
e.g.   python3 scripts/enumerate_plans.py cases/case2_parallel.m \
           cases/damage2_both.json 2
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from grs import netio
from grs.formulations import build_rop
from grs.grid import replicate
from grs.mip import solve_mip
from tests.oracles import enumerate_rop_orders


def main():
    if len(sys.argv) != 4:
        print(__doc__)
        return 2
    case_path, dmg_path, k = sys.argv[1], sys.argv[2], int(sys.argv[3])
    net = netio.load_case(case_path)
    dmg = netio.damage_from_dict(json.loads(Path(dmg_path).read_text()))
    case = replicate(net, dmg, k)
    print(f"{len(dmg)} damaged, {case.periods} periods, "
          f"budget {case.repairs_per_period}")

    best, order = enumerate_rop_orders(case)
    print(f"enumeration best served: {best:.6f} pu-periods, order {order}")

    sol = solve_mip(build_rop(case, "dc"))
    print(f"optimizer: {sol.status}, served {sol.objective:.6f} pu-periods")
    gap = abs(sol.objective - best)
    print(f"difference: {gap:.2e} {'OK' if gap <= 1e-6 else 'MISMATCH'}")
    return 0 if gap <= 1e-6 else 1


if __name__ == "__main__":
    sys.exit(main())
