"""``gloss`` command line: run and validate scenarios, query the oracles.

Exit codes: 0 success, 1 validation/input error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from .errors import GlossError, InvariantViolation
from .geo import GeoPoint, load_world
from .harness.report import report_emit
from .harness.scenario import load_scenario, resolve_scenario_path
from .harness.simulator import Simulator
from . import oracles


def _world_from(ref: str):
    path = resolve_scenario_path(ref)
    if "[world]" in path.read_text():
        return load_scenario(ref).world
    return load_world(path)


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    sim = Simulator(scenario, seed=args.seed, caching=not args.no_cache, trace=args.trace)
    report = sim.run()
    if args.trace:
        for line in sim.trace_lines:
            print(line)
    sys.stdout.write(report_emit(report, args.report))
    return 0


def cmd_validate(args) -> int:
    s = load_scenario(args.scenario)
    print(
        f"ok {s.name}: {len(s.world)} regions, {len(s.topology)} nodes, "
        f"{len(s.profiles)} users, {len(s.schedule)} scheduled inputs, horizon {s.horizon}"
    )
    return 0


def cmd_oracle(args) -> int:
    if args.oracle == "containment":
        world = _world_from(args.source)
        path = oracles.scan_region_path(world, GeoPoint(args.lat, args.lon))
        if not path:
            print("outside")
            return 1
        print(f"deepest={path[-1]} path={'>'.join(path)}")
    elif args.oracle == "route":
        net = load_scenario(args.scenario).build_network()
        if args.target not in net.world:
            print(f"unknown region {args.target!r}", file=sys.stderr)
            return 1
        if args.start not in net.nodes:
            print(f"unknown node {args.start!r}", file=sys.stderr)
            return 1
        terminal, path = oracles.route_oracle(net, args.start, args.target)
        if terminal is None or path is None:
            print("unreachable")
            return 1
        print(f"terminal={terminal} hops={len(path) - 1} path={'>'.join(path)}")
    else:
        a, b = GeoPoint(args.lat1, args.lon1), GeoPoint(args.lat2, args.lon2)
        print(f"{oracles.chord_distance_m(a, b):.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gloss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a scenario and print its report")
    p.add_argument("scenario", help="scenario file or bundled name (e.g. anna-bob)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-cache", action="store_true", help="disable profile caching (baseline)")
    p.add_argument("--report", choices=("human", "machine"), default="human")
    p.add_argument("--trace", action="store_true", help="print event and routing trace lines")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="load and cross-check a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="brute-force reference computations")
    osub = p.add_subparsers(dest="oracle", required=True)
    o = osub.add_parser("containment", help="deepest region containing a point (exhaustive scan)")
    o.add_argument("source", help="scenario or world file")
    o.add_argument("lat", type=float)
    o.add_argument("lon", type=float)
    o = osub.add_parser("route", help="terminal node and tree path (graph search)")
    o.add_argument("scenario")
    o.add_argument("start")
    o.add_argument("target")
    o = osub.add_parser("haversine", help="great-circle distance in metres")
    for name in ("lat1", "lon1", "lat2", "lon2"):
        o.add_argument(name, type=float)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 2
    except GlossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
