"""Hearsay: notes bound to a region and an interest predicate, stored on the
node responsible for that region and handed to matching users who enter it.

Matching runs on the storing node. The user's profile is pulled there
through the profile cache; hearsay never travels to the user's home.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    AllChannelsFailed,
    GlossError,
    InvariantViolation,
    Undeliverable,
    UnknownWhere,
)
from .geo import RegionId
from .overlay import Network, NodeId, OverlayNode, deliver
from .pipeline.events import Event
from .profiles import Profile, ProfileService


@dataclass(frozen=True)
class ProfilePredicate:
    required_tags: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "required_tags", frozenset(self.required_tags))
        if any(not t for t in self.required_tags):
            raise ValueError("predicate tags must be non-empty strings")


def match(profile: Profile, pred: ProfilePredicate) -> bool:
    return pred.required_tags <= profile.tags


@dataclass(frozen=True)
class HearsayRecord:
    hearsay_id: str
    where: RegionId
    predicate: ProfilePredicate
    info: str
    depositor: str
    inserted_at: int = 0

    def to_event(self) -> Event:
        return Event.generic(
            "hearsay",
            id=self.hearsay_id,
            where=self.where,
            tags=",".join(sorted(self.predicate.required_tags)),
            info=self.info,
            depositor=self.depositor,
            t=self.inserted_at,
        )


@dataclass
class PendingNotice:
    notice: Event
    retries: int = 0


@dataclass
class HearsayStore:
    node_id: NodeId
    records: dict[str, HearsayRecord] = field(default_factory=dict)
    delivered: set[tuple[str, str]] = field(default_factory=set)
    pending: dict[tuple[str, str], PendingNotice] = field(default_factory=dict)
    # profiles seen during entry handling, kept so the proxy can reach the user
    contacts: dict[str, Profile] = field(default_factory=dict)


def store_of(node: OverlayNode) -> HearsayStore:
    if node.hearsay_store is None:
        node.hearsay_store = HearsayStore(node.id)
    return node.hearsay_store


@dataclass(frozen=True)
class Receipt:
    user: str
    hearsay_id: str
    channel: str


class ChannelRegistry:
    """Per-user delivery channels with scripted up/down state.

    A successful send appends to :attr:`outbox`; the simulator drains it
    into the user's conduit assembly. Unregistered channels count as down.
    """

    def __init__(self):
        self.status: dict[tuple[str, str], bool] = {}
        self.outbox: list[tuple[str, str, Event]] = []

    def register(self, user: str, channels: Iterable[str], up: bool = True) -> None:
        for ch in channels:
            self.status.setdefault((user, ch), up)

    def set(self, user: str, channel: str, up: bool) -> None:
        self.status[(user, channel)] = up

    def is_up(self, user: str, channel: str) -> bool:
        return self.status.get((user, channel), False)

    def send(self, user: str, channel: str, notice: Event) -> bool:
        if not self.is_up(user, channel):
            return False
        self.outbox.append((user, channel, notice))
        return True

    def drain(self) -> list[tuple[str, str, Event]]:
        out, self.outbox = self.outbox, []
        return out


def notify(profile: Profile, notice: Event, channels: ChannelRegistry) -> Receipt:
    """Try the profile's contact methods in order; first success wins."""
    for channel in profile.contacts:
        if channels.send(profile.user, channel, notice):
            return Receipt(profile.user, notice["id"], channel)
    raise AllChannelsFailed(f"no channel reached {profile.user!r} for {notice['id']!r}")


class HearsayService:
    def __init__(self, net: Network, profiles: ProfileService, channels: ChannelRegistry | None = None):
        self.net = net
        self.profiles = profiles
        self.channels = channels if channels is not None else ChannelRegistry()
        self.stats: Counter[str] = Counter()
        self.placements: dict[str, NodeId] = {}
        # (node where matching ran, hearsay id, user)
        self.match_log: list[tuple[NodeId, str, str]] = []
        self.receipts: list[Receipt] = []

    def insert(self, origin: NodeId, record: HearsayRecord) -> NodeId:
        if record.where not in self.net.world:
            raise UnknownWhere(f"unknown where {record.where!r}")
        env = self.net.envelope(record.where, record.to_event(), origin)
        trace = deliver(self.net, origin, env)
        if not trace.delivered:
            raise Undeliverable(f"hearsay {record.hearsay_id!r}: {trace.reason}", trace)
        node = self.net[trace.terminal]
        world = self.net.world
        if not (record.where == node.managed or world.is_ancestor(node.managed, record.where)):
            raise InvariantViolation(f"hearsay {record.hearsay_id!r} for {record.where!r} landed on {node.id!r}")
        store_of(node).records[record.hearsay_id] = record
        self.placements[record.hearsay_id] = node.id
        return node.id

    def on_enter(self, node_id: NodeId, user: str, where: RegionId, now: int) -> list[Event]:
        """New notices for ``user`` entering ``where``; each (hearsay, user)
        pair is produced at most once."""
        node = self.net[node_id]
        store = store_of(node)
        if not store.records:
            return []
        world = self.net.world
        relevant = [
            r for r in store.records.values()
            if r.where == where or world.is_ancestor(r.where, where)
        ]
        if not relevant:
            return []
        try:
            profile = self.profiles.fetch(node_id, user, now).profile
        except GlossError:
            self.stats["profile_unavailable"] += 1
            return []
        store.contacts[user] = profile
        notices = []
        for rec in relevant:
            self.match_log.append((node_id, rec.hearsay_id, user))
            key = (rec.hearsay_id, user)
            if key in store.delivered or not match(profile, rec.predicate):
                continue
            store.delivered.add(key)
            notices.append(Event.hearsay_notice(rec.hearsay_id, rec.info, user))
        return notices

    def retries(self, node_id: NodeId, user: str) -> list[Event]:
        store = store_of(self.net[node_id])
        return [p.notice for (hid, u), p in store.pending.items() if u == user]

    def deliver_notice(self, node_id: NodeId, notice: Event) -> Receipt | None:
        """Send a notice from its storing node; on total failure keep it for
        the user's next entry and return None."""
        store = store_of(self.net[node_id])
        user = notice["user"]
        key = (notice["id"], user)
        profile = store.contacts.get(user)
        try:
            if profile is None:
                raise AllChannelsFailed(f"no contact details for {user!r}")
            receipt = notify(profile, notice, self.channels)
        except AllChannelsFailed:
            pending = store.pending.setdefault(key, PendingNotice(notice))
            pending.retries += 1
            self.stats["notify_failed"] += 1
            return None
        store.pending.pop(key, None)
        self.receipts.append(receipt)
        return receipt
