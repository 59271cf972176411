"""Route length with and without known-peer shortcuts on random hierarchies.

    python scripts/routing_shortcuts.py --cases 1000 --density 0 0.2 0.5 1.0
"""

from __future__ import annotations

import argparse
import random
from statistics import mean

from gloss.generate import add_random_known, random_network, random_world
from gloss.oracles import route_oracle
from gloss.overlay import deliver
from gloss.pipeline import Event


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=1000)
    ap.add_argument("--density", type=float, nargs="+", default=[0.0, 0.2, 0.5, 1.0],
                    help="fraction of nodes given shortcut entries")
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"{'density':>7}  {'mean hops':>9}  {'tree hops':>9}  {'shortened':>9}  {'at oracle':>9}")
    for density in args.density:
        rng = random.Random(args.seed)
        hops, tree, shorter, correct = [], [], 0, 0
        for _ in range(args.cases):
            world = random_world(rng)
            net = random_network(rng, world)
            start = rng.choice(sorted(net.nodes))
            target = rng.choice(sorted(net.region_owner))
            terminal, path = route_oracle(net, start, target)
            if density:
                add_random_known(rng, net, p=density)
            trace = deliver(net, start, net.envelope(target, Event.generic("probe"), start))
            hops.append(trace.hops)
            tree.append(len(path) - 1)
            shorter += trace.hops < len(path) - 1
            correct += trace.terminal == terminal
        print(f"{density:>7.2f}  {mean(hops):>9.2f}  {mean(tree):>9.2f}  {shorter:>9}  {correct:>9}")


if __name__ == "__main__":
    main()
