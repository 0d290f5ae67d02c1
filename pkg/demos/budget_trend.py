"""Final map entropy and path cost on the half-known room for several budget factors.

    python demos/budget_trend.py [--size 40] [--alpha 1 2 4]
"""

import argparse

from orthoexplore import instances
from orthoexplore.explorer import Explorer, GridParams, GridWorld
from orthoexplore.occupancy import SensorSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=40)
    ap.add_argument("--alpha", type=float, nargs="+", default=[1, 2, 4])
    a = ap.parse_args()
    truth, belief, cell = instances.half_known_room(a.size)
    print("# seed=0")
    print("alpha,cost,final_entropy,scans")
    for alpha in a.alpha:
        w = GridWorld(truth, cell, SensorSpec(), belief.resolution, belief.origin, GridParams(alpha=alpha), 0, belief.l_max, belief)
        r = Explorer(w, 1).run()
        print(f"{alpha:g},{float(r.makespan):g},{w.entropy[-1][1]:.2f},{w.scans}")


if __name__ == "__main__":
    main()
