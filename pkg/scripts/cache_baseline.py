"""Root-level traffic for repeated profile fetches, cache on vs off.

Replays the bundled cache-workload scenario, then sweeps the number of
fetches and their spacing on the same topology.

    python scripts/cache_baseline.py --spacing 1 5 30 90
"""

from __future__ import annotations

import argparse
import re

from gloss.harness import load_scenario, parse_scenario, run
from gloss.harness.scenario import resolve_scenario_path


def workload(base: str, fetches: int, spacing: int) -> str:
    head = base[: base.index("[schedule]")]
    head = re.sub(r"horizon = \d+", f"horizon = {fetches * spacing + 1}", head)
    rows = [f"{1 + i * spacing} fetch n-rue-x bob" for i in range(fetches)]
    return head + "[schedule]\n" + "\n".join(rows) + "\n"


def root_traffic(text: str) -> tuple[int, int]:
    s = parse_scenario(text)
    return run(s).messages_by_depth[0], run(s, caching=False).messages_by_depth[0]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fetches", type=int, default=50)
    ap.add_argument("--spacing", type=int, nargs="+", default=[1, 10, 60, 130, 700])
    args = ap.parse_args(argv)

    s = load_scenario("cache-workload")
    on, off = run(s).messages_by_depth[0], run(s, caching=False).messages_by_depth[0]
    print(f"bundled workload: root envelopes cached={on} baseline={off} ({100 * on / off:.1f}%)")

    base = resolve_scenario_path("cache-workload").read_text()
    print(f"\n{'spacing':>7}  {'cached':>6}  {'no-cache':>8}  {'ratio':>6}")
    for gap in args.spacing:
        on, off = root_traffic(workload(base, args.fetches, gap))
        print(f"{gap:>7}  {on:>6}  {off:>8}  {on / off:>6.2f}")


if __name__ == "__main__":
    main()
