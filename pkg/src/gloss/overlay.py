"""Hybrid hierarchical overlay: a tree of region-managing nodes with peer
links and optional shortcut knowledge, routing by region containment.

Each node chooses, for a message bound to a target region, between handling
it locally, passing it to a child, jumping to a known node, going to its
parent, or flooding its peers (in that order of preference).
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, NamedTuple

from .errors import TopologyError, UnknownTargetRegion
from .geo import RegionId, WorldTree
from .pipeline.events import Event, EventKind
from .textfmt import iter_records, split_list

NodeId = str
DEFAULT_HOP_LIMIT = 32


class Action(enum.Enum):
    LOCAL = "Local"
    TO_CHILD = "ToChild"
    TO_KNOWN_PEER = "ToKnownPeer"
    TO_PARENT = "ToParent"
    BROADCAST_PEERS = "BroadcastPeers"


class Decision(NamedTuple):
    action: Action
    node: NodeId | None = None

    def __str__(self):
        return f"{self.action.value}({self.node})" if self.node else self.action.value


@dataclass
class OverlayNode:
    id: NodeId
    managed: RegionId
    parent: NodeId | None = None
    children: dict[RegionId, NodeId] = field(default_factory=dict)
    peers: set[NodeId] = field(default_factory=set)
    known: dict[RegionId, NodeId] = field(default_factory=dict)
    host: str | None = None
    # filled in lazily by the hearsay and profile modules
    hearsay_store: Any = None
    profile_cache: dict = field(default_factory=dict)
    home_profiles: dict = field(default_factory=dict)


@dataclass
class MessageEnvelope:
    msg_id: str
    target: RegionId
    payload: Event
    origin: NodeId
    hops: int = 0
    visited: set[NodeId] = field(default_factory=set)


@dataclass
class DeliveryTrace:
    msg_id: str
    nodes: list[NodeId] = field(default_factory=list)
    edges: list[tuple[NodeId, NodeId, str]] = field(default_factory=list)
    status: str = "undeliverable"
    terminal: NodeId | None = None
    path: list[NodeId] = field(default_factory=list)
    reason: str = ""

    @property
    def delivered(self) -> bool:
        return self.status == "delivered"

    @property
    def hops(self) -> int:
        return len(self.path) - 1 if self.path else 0

    def log_line(self) -> str:
        tail = f" terminal={self.terminal}" if self.terminal else f" reason={self.reason}"
        return f"route msg={self.msg_id} nodes={'>'.join(self.nodes)} status={self.status}{tail}"


@dataclass
class NetworkStats:
    arrivals: Counter = field(default_factory=Counter)
    created: int = 0
    delivered: int = 0
    undeliverable: int = 0
    dropped_branches: int = 0
    hop_histogram: Counter = field(default_factory=Counter)
    envelopes: list[tuple[str, str, Event, tuple[NodeId, ...]]] = field(default_factory=list)


def decide(node: OverlayNode, world: WorldTree, env: MessageEnvelope) -> Decision:
    target = env.target
    if target not in world:
        raise UnknownTargetRegion(f"unknown target region {target!r}")
    managed = node.managed
    if target == managed:
        return Decision(Action.LOCAL)
    visited = env.visited

    def covers(region):
        return region == target or world.is_ancestor(region, target)

    def deepest(candidates):
        best = None
        for region, nid in candidates:
            if nid in visited or not covers(region):
                continue
            if best is None or world.depth(region) > world.depth(best[0]):
                best = (region, nid)
        return best

    if world.is_ancestor(managed, target):
        child = deepest(node.children.items())
        if child:
            return Decision(Action.TO_CHILD, child[1])
        below = [(r, n) for r, n in node.known.items() if world.is_ancestor(managed, r)]
        known = deepest(below)
        if known:
            return Decision(Action.TO_KNOWN_PEER, known[1])
        return Decision(Action.LOCAL)

    # Entries for our own ancestors point back up the tree; the parent
    # link already covers them and using them can lengthen the route.
    lateral = [
        (r, n) for r, n in node.known.items()
        if not (r == managed or world.is_ancestor(r, managed))
    ]
    known = deepest(lateral)
    if known:
        return Decision(Action.TO_KNOWN_PEER, known[1])
    if node.parent is not None and node.parent not in visited:
        return Decision(Action.TO_PARENT, node.parent)
    return Decision(Action.BROADCAST_PEERS)


class Network:
    """Overlay nodes over a world; owns routing statistics for a run."""

    def __init__(self, world: WorldTree, nodes: dict[NodeId, OverlayNode], hop_limit: int = DEFAULT_HOP_LIMIT):
        if hop_limit <= 0:
            raise ValueError("hop_limit must be positive")
        self.world = world
        self.nodes = nodes
        self.hop_limit = hop_limit
        self.region_owner: dict[RegionId, NodeId] = {n.managed: n.id for n in nodes.values()}
        self.stats = NetworkStats()
        self.log_envelopes = True
        self._ids = itertools.count(1)

    @classmethod
    def build(
        cls,
        world: WorldTree,
        records: Iterable[tuple],
        hop_limit: int = DEFAULT_HOP_LIMIT,
    ) -> "Network":
        """Records are ``(node, region, parent|None, known: dict, host|None)``;
        the last two fields may be omitted."""
        nodes: dict[NodeId, OverlayNode] = {}
        owner: dict[RegionId, NodeId] = {}
        for rec in records:
            nid, region, parent, *rest = rec
            known = dict(rest[0]) if rest and rest[0] else {}
            host = rest[1] if len(rest) > 1 else None
            if nid in nodes:
                raise TopologyError(nid, "duplicate node id")
            if region not in world:
                raise TopologyError(nid, f"manages unknown region {region!r}")
            if region in owner:
                raise TopologyError(nid, f"region {region!r} already managed by {owner[region]!r}")
            owner[region] = nid
            nodes[nid] = OverlayNode(nid, region, parent, known=known, host=host)

        for node in nodes.values():
            if node.parent is None:
                continue
            parent = nodes.get(node.parent)
            if parent is None:
                raise TopologyError(node.id, f"unknown parent node {node.parent!r}")
            if not world.is_ancestor(parent.managed, node.managed):
                raise TopologyError(
                    node.id, f"region {node.managed!r} is not below parent's region {parent.managed!r}"
                )
            parent.children[node.managed] = node.id
        by_parent: dict[NodeId | None, list[NodeId]] = {}
        for node in nodes.values():
            by_parent.setdefault(node.parent, []).append(node.id)
        for siblings in by_parent.values():
            for nid in siblings:
                nodes[nid].peers = set(siblings) - {nid}
        for node in nodes.values():
            for region, target in node.known.items():
                if owner.get(region) != target:
                    raise TopologyError(node.id, f"known entry {region}={target} does not match the region's owner")
        return cls(world, nodes, hop_limit)

    def __getitem__(self, nid: NodeId) -> OverlayNode:
        return self.nodes[nid]

    def next_msg_id(self) -> str:
        return f"m{next(self._ids)}"

    def node_depth(self, nid: NodeId) -> int:
        """Depth of the node's managed region in the world tree."""
        return self.world.depth(self.nodes[nid].managed)

    def owner_of(self, region: RegionId) -> NodeId | None:
        """Node managing ``region`` or else its deepest managed ancestor."""
        for rid in reversed(self.world.ancestors(region)):
            nid = self.region_owner.get(rid)
            if nid is not None:
                return nid
        return None

    def envelope(self, target: RegionId, payload: Event, origin: NodeId) -> MessageEnvelope:
        return MessageEnvelope(self.next_msg_id(), target, payload, origin)

    def record_hops(self, msg_id: str, kind: str, payload: Event, path: list[NodeId]) -> None:
        """Account for an envelope that travelled ``path`` (arrivals exclude the sender)."""
        for nid in path[1:]:
            self.stats.arrivals[nid] += 1
        if self.log_envelopes:
            self.stats.envelopes.append((msg_id, kind, payload, tuple(path)))


def deliver(
    net: Network,
    start: NodeId,
    env: MessageEnvelope,
    intercept: Callable[[OverlayNode], bool] | None = None,
) -> DeliveryTrace:
    """Route ``env`` from ``start`` until some node handles it locally.

    ``intercept`` lets a caller answer at an intermediate node (used for
    cache hits); it is never consulted at ``start``.
    """
    if env.target not in net.world:
        raise UnknownTargetRegion(f"unknown target region {env.target!r}")
    trace = DeliveryTrace(env.msg_id)
    net.stats.created += 1
    env.visited.add(start)
    queue: deque[tuple[NodeId, list[NodeId]]] = deque([(start, [start])])
    hop_exceeded = False

    while queue:
        nid, path = queue.popleft()
        node = net.nodes[nid]
        trace.nodes.append(nid)
        env.hops = len(path) - 1
        if trace.terminal is not None:
            # a sibling branch already delivered; this copy just stops here
            net.stats.dropped_branches += 1
            continue
        if intercept is not None and nid != start and intercept(node):
            trace.terminal, trace.path = nid, path
            continue
        decision = decide(node, net.world, env)
        if decision.action is Action.LOCAL:
            trace.terminal, trace.path = nid, path
            continue
        if decision.action is Action.BROADCAST_PEERS:
            nexts = sorted(p for p in node.peers if p not in env.visited)
        else:
            nexts = [decision.node]
        if not nexts:
            net.stats.dropped_branches += 1
            continue
        if len(path) - 1 >= net.hop_limit:
            hop_exceeded = True
            continue
        for nxt in nexts:
            env.visited.add(nxt)
            trace.edges.append((nid, nxt, decision.action.value))
            queue.append((nxt, path + [nxt]))

    arrivals = [b for _, b, _ in trace.edges]
    for nid in arrivals:
        net.stats.arrivals[nid] += 1
    if net.log_envelopes:
        net.stats.envelopes.append((env.msg_id, env.payload.kind.value, env.payload, tuple(trace.nodes)))
    if trace.terminal is not None:
        trace.status = "delivered"
        env.hops = len(trace.path) - 1
        net.stats.delivered += 1
        net.stats.hop_histogram[env.hops] += 1
    else:
        trace.reason = "hop-limit" if hop_exceeded else "no-route"
        net.stats.undeliverable += 1
    return trace


def ingress(net: Network, gateway: NodeId, event: Event) -> tuple[MessageEnvelope, DeliveryTrace]:
    """Turn a location report into an EnterWhere message for the region
    containing the point and route it from ``gateway``."""
    if event.kind is not EventKind.LOCATION:
        raise TypeError(f"ingress expects a Location event, got {event.kind.value}")
    where = net.world.resolve_deepest(event.point)
    payload = Event.enter_where(event["user"], where, event["t"])
    env = net.envelope(where, payload, gateway)
    return env, deliver(net, gateway, env)


def parse_topology(world: WorldTree, lines: Iterable[str], first_line: int = 1,
                   hop_limit: int = DEFAULT_HOP_LIMIT) -> Network:
    """Parse ``node region parent|- [known] [host=label]`` records, where
    ``known`` is ``region=node,region=node`` or ``-``."""
    from .errors import ScenarioParseError

    records = []
    for lineno, tokens in iter_records(lines, first_line):
        host = None
        if tokens and tokens[-1].startswith("host="):
            host = tokens.pop()[5:]
        if len(tokens) not in (3, 4):
            raise ScenarioParseError(f"topology record needs 3 or 4 fields, got {len(tokens)}", line=lineno)
        known = {}
        if len(tokens) == 4:
            for item in split_list(tokens[3]):
                region, sep, target = item.partition("=")
                if not sep:
                    raise ScenarioParseError(f"known entry {item!r} is not region=node", line=lineno)
                known[region] = target
        parent = None if tokens[2] == "-" else tokens[2]
        records.append((tokens[0], tokens[1], parent, known, host))
    return Network.build(world, records, hop_limit)


def load_topology(world: WorldTree, path, hop_limit: int = DEFAULT_HOP_LIMIT) -> Network:
    return parse_topology(world, Path(path).read_text().splitlines(), hop_limit=hop_limit)
