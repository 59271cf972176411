"""Seeded random worlds, overlays and mobility traces for property tests,
acceptance checks and the experiment scripts."""

from __future__ import annotations

import random

from .geo import GeoPoint, Rect, WorldTree
from .overlay import Network
from .pipeline.nmea import format_gga


def random_world(
    rng: random.Random,
    root: Rect = Rect(0.0, 100.0, 0.0, 100.0),
    max_depth: int = 5,
    max_fanout: int = 4,
    branch_p: float = 0.8,
) -> WorldTree:
    """Recursive quadrant splits with random gaps. Children are strictly
    smaller than their parent and never overlap."""
    records = [("r", None, root)]
    stack = [("r", root, 0)]
    while stack:
        rid, rect, depth = stack.pop()
        if depth >= max_depth or rng.random() > branch_p * (1 - depth / (max_depth + 1)):
            continue
        mid_lat = (rect.lat_min + rect.lat_max) / 2
        mid_lon = (rect.lon_min + rect.lon_max) / 2
        quads = [
            (rect.lat_min, mid_lat, rect.lon_min, mid_lon),
            (rect.lat_min, mid_lat, mid_lon, rect.lon_max),
            (mid_lat, rect.lat_max, rect.lon_min, mid_lon),
            (mid_lat, rect.lat_max, mid_lon, rect.lon_max),
        ]
        k = rng.randint(1, min(max_fanout, 4))
        for i, (a, b, c, d) in enumerate(sorted(rng.sample(quads, k))):
            if rng.random() < 0.5:
                child = Rect(a, b, c, d)
            else:
                # shrink inside the quadrant, leaving a coverage gap
                h, w = b - a, d - c
                a2 = a + rng.uniform(0, 0.3) * h
                b2 = b - rng.uniform(0, 0.3) * h
                c2 = c + rng.uniform(0, 0.3) * w
                d2 = d - rng.uniform(0, 0.3) * w
                child = Rect(a2, b2, c2, d2)
            cid = f"{rid}.{i}"
            records.append((cid, rid, child))
            stack.append((cid, child, depth + 1))
    return WorldTree.from_records(records)


def random_network(rng: random.Random, world: WorldTree, own_p: float = 0.7, hop_limit: int = 32) -> Network:
    """Own the root plus a random subset of regions; each node's parent is
    the node owning its nearest owned ancestor region."""
    owned = {world.root}
    for region in world:
        if region.id != world.root and rng.random() < own_p:
            owned.add(region.id)
    records = []
    for region in world:
        if region.id not in owned:
            continue
        parent = None
        for anc in reversed(world.ancestors(region.id)[:-1]):
            if anc in owned:
                parent = f"n:{anc}"
                break
        records.append((f"n:{region.id}", region.id, parent, {}, f"host-{rng.randrange(1000)}"))
    return Network.build(world, records, hop_limit)


def add_random_known(rng: random.Random, net: Network, p: float = 0.5, max_entries: int = 3) -> int:
    """Give nodes random shortcut entries (always pointing at the true owner)."""
    owned = sorted(net.region_owner)
    added = 0
    for nid in sorted(net.nodes):
        if rng.random() >= p:
            continue
        for region in rng.sample(owned, min(len(owned), rng.randint(1, max_entries))):
            net.nodes[nid].known[region] = net.region_owner[region]
            added += 1
    return added


def random_trace(rng: random.Random, bounds: Rect, n: int = 1000, step: float | None = None,
                 jump_p: float = 0.02) -> list[GeoPoint]:
    """Random walk clipped to ``bounds`` with occasional long jumps."""
    span_lat = bounds.lat_max - bounds.lat_min
    span_lon = bounds.lon_max - bounds.lon_min
    step = step if step is not None else min(span_lat, span_lon) / 50

    def clip(v, lo, hi):
        return min(max(v, lo), hi - 1e-9 * (hi - lo))

    lat = rng.uniform(bounds.lat_min, bounds.lat_max)
    lon = rng.uniform(bounds.lon_min, bounds.lon_max)
    out = []
    for _ in range(n):
        if rng.random() < jump_p:
            lat = rng.uniform(bounds.lat_min, bounds.lat_max)
            lon = rng.uniform(bounds.lon_min, bounds.lon_max)
        else:
            lat = clip(lat + rng.gauss(0, step), bounds.lat_min, bounds.lat_max)
            lon = clip(lon + rng.gauss(0, step), bounds.lon_min, bounds.lon_max)
        out.append(GeoPoint(lat, lon))
    return out


def trace_scenario_text(
    world: WorldTree,
    net: Network,
    traces: dict[str, list[GeoPoint]],
    threshold: float = 100.0,
    name: str = "random-walk",
) -> str:
    """Scenario text that replays ``traces`` as NMEA input, one point per tick."""
    lines = [f"[config]", f"name = {name}", f"threshold = {threshold}",
             f"horizon = {max(len(t) for t in traces.values())}", "", "[world]"]
    for region in world:
        b = region.bounds
        lines.append(f"{region.id} {region.parent or '-'} {b.lat_min!r} {b.lat_max!r} {b.lon_min!r} {b.lon_max!r}")
    lines += ["", "[topology]"]
    for node in net.nodes.values():
        known = ",".join(f"{r}={n}" for r, n in sorted(node.known.items())) or "-"
        lines.append(f"{node.id} {node.managed} {node.parent or '-'} {known}")
    home = net.region_owner[world.root]
    lines += ["", "[profiles]"]
    for user in traces:
        lines.append(f"{user} walker sms {home}")
    lines += ["", "[schedule]"]
    for tick in range(max(len(t) for t in traces.values())):
        for user, trace in traces.items():
            if tick < len(trace):
                lines.append(f"{tick} nmea {user} {format_gga(trace[tick])}")
    return "\n".join(lines) + "\n"
