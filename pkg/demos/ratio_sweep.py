"""Engine makespan against the offline optimum on random staircases.

    python demos/ratio_sweep.py [--n 50] [--seed 1] [--k 9]
"""

import argparse
import math

from orthoexplore import instances
from orthoexplore.explorer import GeometricWorld, competitive_bound, explore
from orthoexplore.oracle import optimal_exploration_cost


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--k", type=int, default=9)
    a = ap.parse_args()
    print(f"# seed={a.seed} k={a.k}")
    print("instance,p,makespan,opt,ratio,bound,tree_bound")
    worst = {1: 0.0, 2: 0.0}
    for i, (P, s) in enumerate(instances.staircase_suite(a.n, seed=a.seed)):
        for p in (1, 2):
            r = explore(GeometricWorld(P, s), p)
            b = optimal_exploration_cost(P, p, a.k, s)
            ratio = float(r.makespan / b.lower) if b.lower else (1.0 if r.makespan == 0 else math.inf)
            worst[p] = max(worst[p], ratio)
            print(f"{i},{p},{float(r.makespan):g},{float(b.lower):g},{ratio:.4f},{competitive_bound(p):.4f},{float(r.tree_bound()):.4f}")
    for p, w in worst.items():
        print(f"# worst ratio p={p}: {w:.4f} (bound {competitive_bound(p):.4f})")


if __name__ == "__main__":
    main()
