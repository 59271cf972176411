"""Typed events and their canonical XML-fragment wire format.

Each event serializes to a single empty element whose name encodes the kind
and whose attributes carry the payload in a fixed order::

    <location user="bob" lat="48.117300" lon="11.516667" t="12"/>

Coordinates always use 6 decimal places. Generic events use their own
element name and sort attributes by key.
"""

from __future__ import annotations

import enum
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Any, Mapping
from xml.sax.saxutils import quoteattr

from ..geo import GeoPoint


class EventKind(str, enum.Enum):
    RAW = "RawDeviceString"
    LOCATION = "Location"
    ENTER_WHERE = "EnterWhere"
    HEARSAY_NOTICE = "HearsayNotice"
    PROFILE_REQUEST = "ProfileRequest"
    PROFILE_REPLY = "ProfileReply"
    GENERIC = "Generic"

    @classmethod
    def parse(cls, text: str) -> "EventKind":
        for kind in cls:
            if text in (kind.value, kind.name, ELEMENT_NAMES.get(kind)):
                return kind
        raise ValueError(f"unknown event kind {text!r}")


ELEMENT_NAMES = {
    EventKind.RAW: "raw",
    EventKind.LOCATION: "location",
    EventKind.ENTER_WHERE: "enter-where",
    EventKind.HEARSAY_NOTICE: "hearsay-notice",
    EventKind.PROFILE_REQUEST: "profile-request",
    EventKind.PROFILE_REPLY: "profile-reply",
}
_KIND_BY_ELEMENT = {v: k for k, v in ELEMENT_NAMES.items()}

ATTRIBUTE_ORDER = {
    EventKind.RAW: ("user", "line"),
    EventKind.LOCATION: ("user", "lat", "lon", "t"),
    EventKind.ENTER_WHERE: ("user", "where", "t"),
    EventKind.HEARSAY_NOTICE: ("id", "user", "info"),
    EventKind.PROFILE_REQUEST: ("user",),
    EventKind.PROFILE_REPLY: ("user", "tags", "contacts", "home"),
}


@dataclass(frozen=True)
class Event:
    kind: EventKind
    payload: Mapping[str, Any] = field(default_factory=dict)
    seq: int = 0

    def __getitem__(self, key):
        return self.payload[key]

    def get(self, key, default=None):
        return self.payload.get(key, default)

    @property
    def point(self) -> GeoPoint:
        return self.payload["point"]

    def with_seq(self, seq: int) -> "Event":
        return Event(self.kind, self.payload, seq)

    # constructors

    @classmethod
    def raw(cls, line: str, user: str | None = None) -> "Event":
        payload = {"line": line}
        if user is not None:
            payload["user"] = user
        return cls(EventKind.RAW, payload)

    @classmethod
    def location(cls, user: str, point: GeoPoint, t: int) -> "Event":
        return cls(EventKind.LOCATION, {"user": user, "point": point, "t": t})

    @classmethod
    def enter_where(cls, user: str, where: str, t: int) -> "Event":
        return cls(EventKind.ENTER_WHERE, {"user": user, "where": where, "t": t})

    @classmethod
    def hearsay_notice(cls, hearsay_id: str, info: str, user: str) -> "Event":
        return cls(EventKind.HEARSAY_NOTICE, {"id": hearsay_id, "info": info, "user": user})

    @classmethod
    def profile_request(cls, user: str) -> "Event":
        return cls(EventKind.PROFILE_REQUEST, {"user": user})

    @classmethod
    def profile_reply(cls, profile) -> "Event":
        return cls(EventKind.PROFILE_REPLY, {"user": profile.user, "profile": profile})

    @classmethod
    def generic(cls, element: str, **attrs: Any) -> "Event":
        return cls(EventKind.GENERIC, {"element": element, "attrs": dict(attrs)})

    def to_xml(self) -> str:
        return to_xml(self)


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _attr_pairs(event: Event) -> list[tuple[str, str]]:
    p = event.payload
    kind = event.kind
    if kind is EventKind.GENERIC:
        return [(k, _fmt(v)) for k, v in sorted(p["attrs"].items())]
    if kind is EventKind.LOCATION:
        pt = p["point"]
        values = {"user": p["user"], "lat": f"{pt.lat:.6f}", "lon": f"{pt.lon:.6f}", "t": str(p["t"])}
    elif kind is EventKind.PROFILE_REPLY:
        prof = p["profile"]
        values = {
            "user": prof.user,
            "tags": ",".join(sorted(prof.tags)),
            "contacts": ",".join(prof.contacts),
            "home": prof.home,
        }
    else:
        values = {k: _fmt(v) for k, v in p.items()}
    return [(k, values[k]) for k in ATTRIBUTE_ORDER[kind] if k in values]


def to_xml(event: Event) -> str:
    if event.kind is EventKind.GENERIC:
        name = event.payload["element"]
    else:
        name = ELEMENT_NAMES[event.kind]
    attrs = "".join(f" {k}={quoteattr(v)}" for k, v in _attr_pairs(event))
    return f"<{name}{attrs}/>"


def from_xml(text: str) -> Event:
    """Inverse of :func:`to_xml` (coordinates come back rounded to 1e-6)."""
    elem = ET.fromstring(text)
    a = dict(elem.attrib)
    kind = _KIND_BY_ELEMENT.get(elem.tag)
    if kind is None:
        return Event.generic(elem.tag, **a)
    if kind is EventKind.LOCATION:
        return Event.location(a["user"], GeoPoint(float(a["lat"]), float(a["lon"])), int(a["t"]))
    if kind is EventKind.ENTER_WHERE:
        return Event.enter_where(a["user"], a["where"], int(a["t"]))
    if kind is EventKind.HEARSAY_NOTICE:
        return Event.hearsay_notice(a["id"], a["info"], a["user"])
    if kind is EventKind.PROFILE_REQUEST:
        return Event.profile_request(a["user"])
    if kind is EventKind.PROFILE_REPLY:
        from ..profiles import Profile

        tags = frozenset(t for t in a["tags"].split(",") if t)
        contacts = tuple(c for c in a["contacts"].split(",") if c)
        return Event.profile_reply(Profile(a["user"], tags, contacts, a["home"]))
    return Event.raw(a["line"], a.get("user"))
