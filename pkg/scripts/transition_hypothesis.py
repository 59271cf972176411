"""Region transitions per tree depth for random walks over random worlds.

Coarser regions should see fewer boundary crossings. Prints the mean count
per depth and how many traces respect the ordering at every depth.

    python scripts/transition_hypothesis.py --worlds 10 --traces 10 --points 1000
"""

from __future__ import annotations

import argparse
import random
from statistics import mean

from gloss.generate import random_trace, random_world


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--worlds", type=int, default=10)
    ap.add_argument("--traces", type=int, default=10, help="traces per world")
    ap.add_argument("--points", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    by_depth: dict[int, list[int]] = {}
    ordered = total = 0
    for _ in range(args.worlds):
        world = random_world(rng, max_depth=5, max_fanout=4)
        for _ in range(args.traces):
            counts = world.transitions_by_depth(random_trace(rng, world[world.root].bounds, args.points))
            for d, c in enumerate(counts):
                by_depth.setdefault(d, []).append(c)
            total += 1
            ordered += all(a <= b for a, b in zip(counts, counts[1:]))

    print(f"{'depth':>5}  {'mean transitions':>16}  {'max':>6}")
    for d in sorted(by_depth):
        print(f"{d:>5}  {mean(by_depth[d]):>16.1f}  {max(by_depth[d]):>6}")
    print(f"non-increasing toward the root in {ordered}/{total} traces")


if __name__ == "__main__":
    main()
