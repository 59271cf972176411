"""User profiles: authoritative copies on home nodes, fetched through the
overlay and cached along the way with a TTL that depends on tree depth.

Shallow nodes see slow-changing, coarse movement and keep entries longer;
leaf nodes keep them briefly. A request that meets a fresh entry part-way
to the home node is answered there, and the reply retraces the request
path, leaving a copy at every node it passes.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ProfileUnavailable, Undeliverable, UnknownUser
from .overlay import Network, NodeId, OverlayNode, deliver
from .pipeline.events import Event


@dataclass(frozen=True)
class Profile:
    user: str
    tags: frozenset[str]
    contacts: tuple[str, ...]
    home: NodeId

    def __post_init__(self):
        object.__setattr__(self, "tags", frozenset(self.tags))
        object.__setattr__(self, "contacts", tuple(self.contacts))
        if not self.contacts:
            raise ValueError(f"profile {self.user!r} has no contact methods")
        if any(not t for t in self.tags):
            raise ValueError(f"profile {self.user!r} has an empty tag")


@dataclass
class CacheEntry:
    profile: Profile
    fetched_at: int
    ttl: int

    def __post_init__(self):
        if self.ttl <= 0:
            raise ValueError("ttl must be positive")

    def fresh(self, now: int) -> bool:
        return now - self.fetched_at <= self.ttl


@dataclass(frozen=True)
class CachePolicy:
    ttl_by_depth: Mapping[int, int]

    def __post_init__(self):
        items = sorted(self.ttl_by_depth.items())
        if not items:
            raise ValueError("cache policy needs at least one depth entry")
        for depth, ttl in items:
            if depth < 0 or ttl <= 0:
                raise ValueError(f"bad policy entry {depth}:{ttl}")
        for (d1, t1), (d2, t2) in zip(items, items[1:]):
            if t2 > t1:
                raise ValueError(f"ttl must not grow with depth ({d1}:{t1} then {d2}:{t2})")
        object.__setattr__(self, "ttl_by_depth", dict(items))

    @classmethod
    def parse(cls, text: str) -> "CachePolicy":
        """``"0:3600 1:600 2:120 3:60"`` (commas also accepted)."""
        pairs = {}
        for item in text.replace(",", " ").split():
            depth, _, ttl = item.partition(":")
            pairs[int(depth)] = int(ttl)
        return cls(pairs)

    def ttl_for(self, depth: int) -> int:
        depths = list(self.ttl_by_depth)
        i = bisect.bisect_right(depths, depth) - 1
        return self.ttl_by_depth[depths[max(i, 0)]]

    def __str__(self):
        return " ".join(f"{d}:{t}" for d, t in self.ttl_by_depth.items())


DEFAULT_POLICY = CachePolicy({0: 3600, 1: 600, 2: 120, 3: 60})


def ttl_for(policy: CachePolicy, depth: int) -> int:
    return policy.ttl_for(depth)


def expire(node: OverlayNode, now: int) -> int:
    stale = [user for user, entry in node.profile_cache.items() if not entry.fresh(now)]
    for user in stale:
        del node.profile_cache[user]
    return len(stale)


@dataclass
class CacheStats:
    hits: Counter = field(default_factory=Counter)
    misses: Counter = field(default_factory=Counter)


@dataclass
class FetchResult:
    profile: Profile
    request_path: list[NodeId] = field(default_factory=list)
    reply_path: list[NodeId] = field(default_factory=list)
    answered_by: NodeId | None = None

    @property
    def cache_hit(self) -> bool:
        return not self.request_path

    @property
    def envelopes(self) -> int:
        return int(bool(self.request_path)) + int(bool(self.reply_path))


class ProfileService:
    """Fetch front-end for one network. ``caching=False`` gives the
    no-cache baseline: every fetch goes to the home node."""

    def __init__(self, net: Network, policy: CachePolicy = DEFAULT_POLICY, caching: bool = True):
        self.net = net
        self.policy = policy
        self.caching = caching
        self.stats = CacheStats()
        self.homes: dict[str, NodeId] = {}

    def install(self, profiles: Iterable[Profile]) -> None:
        for prof in profiles:
            if prof.home not in self.net.nodes:
                raise UnknownUser(f"profile {prof.user!r}: home node {prof.home!r} does not exist")
            self.homes[prof.user] = prof.home
            self.net[prof.home].home_profiles[prof.user] = prof

    def home_copy(self, user: str) -> Profile:
        try:
            return self.net[self.homes[user]].home_profiles[user]
        except KeyError:
            raise UnknownUser(user) from None

    def _lookup(self, node: OverlayNode, user: str, now: int) -> Profile | None:
        if user in node.home_profiles:
            return node.home_profiles[user]
        if not self.caching:
            return None
        depth = self.net.node_depth(node.id)
        entry = node.profile_cache.get(user)
        if entry is not None and entry.fresh(now):
            self.stats.hits[depth] += 1
            return entry.profile
        self.stats.misses[depth] += 1
        return None

    def fetch(self, requester: NodeId, user: str, now: int) -> FetchResult:
        if user not in self.homes:
            raise UnknownUser(user)
        net = self.net
        local = self._lookup(net[requester], user, now)
        if local is not None:
            return FetchResult(local, answered_by=requester)

        home = self.homes[user]
        env = net.envelope(net[home].managed, Event.profile_request(user), requester)
        found: dict[NodeId, Profile] = {}

        def intercept(node: OverlayNode) -> bool:
            prof = self._lookup(node, user, now)
            if prof is not None:
                found[node.id] = prof
            return prof is not None

        trace = deliver(net, requester, env, intercept=intercept)
        if not trace.delivered:
            raise Undeliverable(f"profile request for {user!r} from {requester!r}: {trace.reason}", trace)
        responder = trace.terminal
        profile = found.get(responder) or net[responder].home_profiles.get(user)
        if profile is None:
            raise ProfileUnavailable(f"{responder!r} reached but holds no profile for {user!r}")

        reply_path = list(reversed(trace.path))
        net.record_hops(env.msg_id + "r", "ProfileReply", Event.profile_reply(profile), reply_path)
        net.stats.created += 1
        net.stats.delivered += 1
        net.stats.hop_histogram[len(reply_path) - 1] += 1
        if self.caching:
            for nid in reply_path[1:]:
                if nid != home:
                    ttl = self.policy.ttl_for(net.node_depth(nid))
                    net[nid].profile_cache[user] = CacheEntry(profile, now, ttl)
        return FetchResult(profile, list(trace.path), reply_path, responder)

    def expire_all(self, now: int) -> int:
        return sum(expire(node, now) for node in self.net.nodes.values())

