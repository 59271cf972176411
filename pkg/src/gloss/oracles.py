"""Brute-force reference computations.

These deliberately avoid the tree-descent and routing code they are used to
check: regions are scanned exhaustively, depths are recomputed from parent
links, routes come from breadth-first search over the node graph, and
distances use the chord formula instead of haversine.
"""

from __future__ import annotations

import math
from collections import deque

from .geo import GeoPoint, Rect, WorldTree

EARTH_RADIUS_M = 6_371_000.0


def _depths(world: WorldTree) -> dict[str, int]:
    regions = {r.id: r for r in world}
    depth = {}
    for rid in regions:
        d, cur = 0, regions[rid].parent
        while cur is not None:
            d += 1
            cur = regions[cur].parent
        depth[rid] = d
    return depth


def _inside(b: Rect, lat: float, lon: float) -> bool:
    return b.lat_min <= lat < b.lat_max and b.lon_min <= lon < b.lon_max


def scan_region_path(world: WorldTree, p: GeoPoint) -> list[str]:
    depth = _depths(world)
    hits = [r.id for r in world if _inside(r.bounds, p.lat, p.lon)]
    return sorted(hits, key=depth.__getitem__)


def scan_deepest_region(world: WorldTree, p: GeoPoint) -> str | None:
    path = scan_region_path(world, p)
    return path[-1] if path else None


def _rect_within(inner: Rect, outer: Rect) -> bool:
    return (outer.lat_min <= inner.lat_min and inner.lat_max <= outer.lat_max
            and outer.lon_min <= inner.lon_min and inner.lon_max <= outer.lon_max)


def scan_deepest_container(world: WorldTree, rect: Rect) -> str | None:
    depth = _depths(world)
    best = None
    for r in world:
        if _rect_within(rect, r.bounds) and (best is None or depth[r.id] > depth[best]):
            best = r.id
    return best


def scan_owning_node(net, region_id: str) -> str | None:
    """Deepest node whose managed region contains ``region_id``'s bounds,
    considering only regions no deeper than the target."""
    world = net.world
    depth = _depths(world)
    target = world[region_id].bounds
    best = None
    for node in net.nodes.values():
        r = world[node.managed]
        if depth[r.id] > depth[region_id] or not _rect_within(target, r.bounds):
            continue
        if best is None or depth[r.id] > depth[world[net.nodes[best].managed].id]:
            best = node.id
    return best


def bfs_path(net, start: str, goal: str) -> list[str] | None:
    adj: dict[str, set[str]] = {nid: set() for nid in net.nodes}
    for node in net.nodes.values():
        if node.parent is not None:
            adj[node.id].add(node.parent)
            adj[node.parent].add(node.id)
    prev = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            path = []
            while cur is not None:
                path.append(cur)
                cur = prev[cur]
            return path[::-1]
        for nxt in sorted(adj[cur]):
            if nxt not in prev:
                prev[nxt] = cur
                queue.append(nxt)
    return None


def route_oracle(net, start: str, target_region: str) -> tuple[str | None, list[str] | None]:
    """(terminal node, tree path from start) by exhaustive scan + BFS."""
    terminal = scan_owning_node(net, target_region)
    if terminal is None:
        return None, None
    return terminal, bfs_path(net, start, terminal)


def chord_distance_m(a: GeoPoint, b: GeoPoint, radius: float = EARTH_RADIUS_M) -> float:
    def unit(p):
        phi, lam = math.radians(p.lat), math.radians(p.lon)
        return (math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi))

    ua, ub = unit(a), unit(b)
    chord = math.sqrt(sum((x - y) ** 2 for x, y in zip(ua, ub)))
    return 2 * radius * math.asin(min(1.0, chord / 2))


def replay_threshold(points: list[GeoPoint], threshold: float) -> list[int]:
    """Indices a threshold filter must emit for ``points``."""
    kept: list[int] = []
    for i, p in enumerate(points):
        if not kept or chord_distance_m(points[kept[-1]], p) > threshold:
            kept.append(i)
    return kept
