"""Hierarchical "where" model: half-open lat/lon rectangles arranged in a
containment tree.

A point inside a parent but outside every child resolves to the parent, so
children do not have to tile their parent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import (
    PointOutsideWorld,
    TargetOutsideWorld,
    UnknownRegion,
    WorldValidationError,
)
from .textfmt import iter_records

RegionId = str


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lon})")

    @property
    def is_geographic(self) -> bool:
        """True when the point is a real lat/lon position."""
        return -90.0 <= self.lat < 90.0 and -180.0 <= self.lon < 180.0

    def __str__(self):
        return f"({self.lat:g}, {self.lon:g})"


@dataclass(frozen=True)
class Rect:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        vals = (self.lat_min, self.lat_max, self.lon_min, self.lon_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite bounds {vals}")
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError(f"empty rectangle {vals}")

    def contains_point(self, p: GeoPoint) -> bool:
        return self.lat_min <= p.lat < self.lat_max and self.lon_min <= p.lon < self.lon_max

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.lat_min <= other.lat_min
            and other.lat_max <= self.lat_max
            and self.lon_min <= other.lon_min
            and other.lon_max <= self.lon_max
        )

    def intersects(self, other: "Rect") -> bool:
        # half-open: touching edges do not intersect
        return (
            self.lat_min < other.lat_max
            and other.lat_min < self.lat_max
            and self.lon_min < other.lon_max
            and other.lon_min < self.lon_max
        )


@dataclass(frozen=True)
class Region:
    id: RegionId
    bounds: Rect
    parent: RegionId | None = None
    children: tuple[RegionId, ...] = ()
    depth: int = 0


def contains(region: Region, p: GeoPoint) -> bool:
    return region.bounds.contains_point(p)


class WorldTree:
    """Immutable containment tree of regions.

    Build one with :meth:`from_records`; the constructor-side checks reject
    overlapping siblings, children escaping their parent, cycles and
    multiple roots, naming the offending region.
    """

    def __init__(self, regions: dict[RegionId, Region], root: RegionId):
        self._regions = dict(regions)
        self.root = root

    @classmethod
    def from_records(
        cls, records: Iterable[tuple[RegionId, RegionId | None, Rect]]
    ) -> "WorldTree":
        order: list[RegionId] = []
        bounds: dict[RegionId, Rect] = {}
        parents: dict[RegionId, RegionId | None] = {}
        for rid, parent, rect in records:
            if rid in bounds:
                raise WorldValidationError(rid, "duplicate region id")
            order.append(rid)
            bounds[rid] = rect
            parents[rid] = parent

        roots = [rid for rid in order if parents[rid] is None]
        if not roots:
            raise WorldValidationError(order[0] if order else "-", "world has no root region")
        if len(roots) > 1:
            raise WorldValidationError(roots[1], f"second root (first root is {roots[0]!r})")
        children: dict[RegionId, list[RegionId]] = {rid: [] for rid in order}
        for rid in order:
            parent = parents[rid]
            if parent is None:
                continue
            if parent not in bounds:
                raise WorldValidationError(rid, f"unknown parent {parent!r}")
            children[parent].append(rid)

        root = roots[0]
        depth: dict[RegionId, int] = {root: 0}
        stack = [root]
        while stack:
            rid = stack.pop()
            for child in children[rid]:
                depth[child] = depth[rid] + 1
                stack.append(child)
        for rid in order:
            if rid not in depth:
                raise WorldValidationError(rid, "not reachable from the root (cycle?)")

        for rid in order:
            parent = parents[rid]
            if parent is not None and not bounds[parent].contains_rect(bounds[rid]):
                raise WorldValidationError(rid, f"bounds escape parent {parent!r}")
            kids = children[rid]
            for i, a in enumerate(kids):
                for b in kids[i + 1:]:
                    if bounds[a].intersects(bounds[b]):
                        raise WorldValidationError(b, f"overlaps sibling {a!r}", other=a)

        regions = {
            rid: Region(rid, bounds[rid], parents[rid], tuple(children[rid]), depth[rid])
            for rid in order
        }
        return cls(regions, root)

    def __contains__(self, rid) -> bool:
        return rid in self._regions

    def __iter__(self):
        return iter(self._regions.values())

    def __len__(self):
        return len(self._regions)

    def __getitem__(self, rid: RegionId) -> Region:
        try:
            return self._regions[rid]
        except KeyError:
            raise UnknownRegion(rid) from None

    @property
    def ids(self) -> list[RegionId]:
        return list(self._regions)

    @property
    def max_depth(self) -> int:
        return max(r.depth for r in self._regions.values())

    def depth(self, rid: RegionId) -> int:
        return self[rid].depth

    def ancestors(self, rid: RegionId) -> list[RegionId]:
        """Path root..rid inclusive."""
        path = []
        cur: RegionId | None = rid
        while cur is not None:
            path.append(cur)
            cur = self[cur].parent
        path.reverse()
        return path

    def is_ancestor(self, a: RegionId, b: RegionId, strict: bool = True) -> bool:
        """Whether ``a`` is an ancestor of ``b``."""
        ra, rb = self[a], self[b]
        if ra.depth > rb.depth or (strict and ra.depth == rb.depth):
            return False
        cur = rb
        while cur.depth > ra.depth:
            cur = self._regions[cur.parent]
        return cur.id == a

    def resolve_deepest(self, p: GeoPoint) -> RegionId:
        return self.region_path(p)[-1]

    def region_path(self, p: GeoPoint) -> list[RegionId]:
        node = self._regions[self.root]
        if not node.bounds.contains_point(p):
            raise PointOutsideWorld(p)
        path = [node.id]
        while True:
            for cid in node.children:
                child = self._regions[cid]
                if child.bounds.contains_point(p):
                    node = child
                    path.append(cid)
                    break
            else:
                return path

    def deepest_container(self, target: Union[RegionId, Rect]) -> RegionId:
        if isinstance(target, str):
            if target not in self._regions:
                raise UnknownRegion(target)
            return target
        node = self._regions[self.root]
        if not node.bounds.contains_rect(target):
            raise TargetOutsideWorld(f"rectangle {target} lies outside the world root")
        while True:
            for cid in node.children:
                child = self._regions[cid]
                if child.bounds.contains_rect(target):
                    node = child
                    break
            else:
                return node.id

    def ancestor_at(self, p: GeoPoint, depth: int) -> RegionId:
        path = self.region_path(p)
        return path[min(depth, len(path) - 1)]

    def transition_count(self, trace: Sequence[GeoPoint], depth: int) -> int:
        if depth < 0:
            raise ValueError("depth must be non-negative")
        labels = [self.ancestor_at(p, depth) for p in trace]
        return sum(1 for a, b in zip(labels, labels[1:]) if a != b)

    def transitions_by_depth(self, trace: Sequence[GeoPoint]) -> list[int]:
        """transition_count for every depth 0..max_depth, one path lookup per point."""
        paths = [self.region_path(p) for p in trace]
        counts = []
        for d in range(self.max_depth + 1):
            labels = [path[min(d, len(path) - 1)] for path in paths]
            counts.append(sum(1 for a, b in zip(labels, labels[1:]) if a != b))
        return counts


# Module-level spellings of the tree operations.

def resolve_deepest(world: WorldTree, p: GeoPoint) -> RegionId:
    return world.resolve_deepest(p)


def region_path(world: WorldTree, p: GeoPoint) -> list[RegionId]:
    return world.region_path(p)


def deepest_container(world: WorldTree, target: Union[RegionId, Rect]) -> RegionId:
    return world.deepest_container(target)


def transition_count(world: WorldTree, trace: Sequence[GeoPoint], depth: int) -> int:
    return world.transition_count(trace, depth)


def parse_world(lines: Iterable[str], first_line: int = 1) -> WorldTree:
    """Parse ``id parent lat_min lat_max lon_min lon_max`` records."""
    from .errors import ScenarioParseError

    records = []
    for lineno, tokens in iter_records(lines, first_line):
        if len(tokens) != 6:
            raise ScenarioParseError(
                f"region record needs 6 fields, got {len(tokens)}", line=lineno
            )
        rid, parent = tokens[0], tokens[1]
        try:
            rect = Rect(*(float(t) for t in tokens[2:]))
        except ValueError as exc:
            raise WorldValidationError(rid, str(exc)) from None
        records.append((rid, None if parent == "-" else parent, rect))
    return WorldTree.from_records(records)


def load_world(path: Union[str, Path]) -> WorldTree:
    return parse_world(Path(path).read_text().splitlines())
