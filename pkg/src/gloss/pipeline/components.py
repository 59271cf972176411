"""Pipeline component types and the registry used by :func:`assemble`."""

from __future__ import annotations

from collections import Counter, deque
from typing import Any, Callable, ClassVar, Iterable

from ..errors import NmeaError, UnsupportedSentence
from ..geo import GeoPoint
from .events import Event, EventKind
from .nmea import nmea_adapt, threshold_filter

K = EventKind
ALL_KINDS = frozenset(EventKind)


def parse_kinds(text: str) -> frozenset[EventKind]:
    return frozenset(EventKind.parse(t) for t in text.split(",") if t)


class Component:
    """Base pipeline component.

    Subclasses declare ``inputs``/``outputs`` kind-sets and implement
    :meth:`accept`. The assembly router enforces both sets.
    """

    type_name: ClassVar[str] = ""
    inputs: frozenset[EventKind] = frozenset()
    outputs: frozenset[EventKind] = frozenset()

    def __init__(self, name: str, **params: Any):
        self.name = name
        self.params = params
        self.metrics: Counter[str] = Counter()
        self.assembly = None
        if params:
            raise TypeError(f"{self.type_name} {name!r}: unexpected parameters {sorted(params)}")

    @property
    def now(self) -> int:
        return self.assembly.now if self.assembly is not None else 0

    def accept(self, event: Event) -> list[Event]:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


class Passthrough(Component):
    """Forwards every accepted event unchanged."""

    def accept(self, event):
        return [event]


class GpsDevice(Passthrough):
    """Trace-driven stand-in for a GPS receiver: emits the NMEA lines fed to it."""

    type_name = "gps-device"
    inputs = outputs = frozenset({K.RAW})


class NmeaAdapter(Component):
    type_name = "nmea-adapter"
    inputs = frozenset({K.RAW})
    outputs = frozenset({K.LOCATION})

    def __init__(self, name, user: str | None = None):
        super().__init__(name)
        self.user = user

    def accept(self, event):
        user = self.user or event.get("user") or (self.assembly and self.assembly.owner)
        try:
            loc = nmea_adapt(event, user, self.now)
        except UnsupportedSentence:
            self.metrics["nmea_skipped"] += 1
            return []
        except NmeaError as exc:
            self.metrics[f"nmea_{_snake(type(exc).__name__)}"] += 1
            return []
        return [loc]


def _snake(name: str) -> str:
    return "".join("_" + c.lower() if c.isupper() else c for c in name).lstrip("_")


class ThresholdFilter(Component):
    """Drops location events that moved no more than ``threshold`` metres.

    Holds one last-emitted point, so an instance serves a single user.
    """

    type_name = "threshold-filter"
    inputs = outputs = frozenset({K.LOCATION})

    def __init__(self, name, threshold: float = 100.0):
        super().__init__(name)
        self.threshold = float(threshold)
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        self.state: GeoPoint | None = None

    def accept(self, event):
        self.state, out = threshold_filter(self.state, event, self.threshold)
        if out is None:
            self.metrics["filter_suppressed"] += 1
            return []
        return [out]


class Buffer(Component):
    """Bounded FIFO. Accept only enqueues; :meth:`drain` releases the contents.

    On overflow the oldest event is discarded.
    """

    type_name = "buffer"

    def __init__(self, name, capacity: int = 16, kinds: str | None = None):
        super().__init__(name)
        self.capacity = int(capacity)
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        self.inputs = self.outputs = parse_kinds(kinds) if kinds else ALL_KINDS
        self.queue: deque[Event] = deque()

    def accept(self, event):
        if len(self.queue) == self.capacity:
            self.queue.popleft()
            self.metrics["buffer_dropped"] += 1
        self.queue.append(event)
        return []

    def drain(self) -> list[Event]:
        out = list(self.queue)
        self.queue.clear()
        return out


class HearsayUI(Component):
    """The user-facing tool on a conduit; records everything it displays."""

    type_name = "hearsay-ui"
    inputs = outputs = frozenset({K.LOCATION, K.HEARSAY_NOTICE})

    def __init__(self, name):
        super().__init__(name)
        self.shown: list[Event] = []

    def accept(self, event):
        self.shown.append(event)
        return [event]


class SmsDevice(Passthrough):
    """Conduit radio: outbound locations leave through the sink, inbound
    notices are passed on to whatever is piped downstream."""

    type_name = "sms-device"
    inputs = outputs = frozenset({K.LOCATION, K.HEARSAY_NOTICE})


class SmsGateway(Passthrough):
    type_name = "sms-gateway"
    inputs = outputs = frozenset({K.LOCATION})


class LocationService(Passthrough):
    type_name = "location-service"
    inputs = outputs = frozenset({K.LOCATION})


class P2POut(Passthrough):
    """Hands events to the overlay; the simulator reads this sink."""

    type_name = "p2p-out"
    inputs = outputs = frozenset({K.LOCATION})


class P2PIn(Passthrough):
    type_name = "p2p-in"
    inputs = outputs = frozenset({K.ENTER_WHERE})


class _Bound(Component):
    """Component whose behaviour comes from a callback bound after assembly."""

    def __init__(self, name):
        super().__init__(name)
        self.handler: Callable[[Event], Iterable[Event]] | None = None

    def accept(self, event):
        if self.handler is None:
            self.metrics["unbound"] += 1
            return []
        return list(self.handler(event))


class HearsayService(_Bound):
    type_name = "hearsay-service"
    inputs = frozenset({K.ENTER_WHERE})
    outputs = frozenset({K.HEARSAY_NOTICE})


class UserProxy(_Bound):
    """Sends notices to users over their preferred channel via ``handler``,
    which returns the notices that went out."""

    type_name = "user-proxy"
    inputs = outputs = frozenset({K.HEARSAY_NOTICE})


class Tap(Component):
    """Generic configurable passthrough, mostly for tests and ad-hoc assemblies."""

    type_name = "tap"

    def __init__(self, name, kinds: str | None = None, inputs: str | None = None, outputs: str | None = None):
        super().__init__(name)
        base = parse_kinds(kinds) if kinds else ALL_KINDS
        self.inputs = parse_kinds(inputs) if inputs else base
        self.outputs = parse_kinds(outputs) if outputs else base
        self.seen: list[Event] = []

    def accept(self, event):
        self.seen.append(event)
        return [event] if event.kind in self.outputs else []


REGISTRY: dict[str, type[Component]] = {
    cls.type_name: cls
    for cls in (
        GpsDevice, NmeaAdapter, ThresholdFilter, Buffer, HearsayUI, SmsDevice,
        SmsGateway, LocationService, P2POut, P2PIn, HearsayService, UserProxy, Tap,
    )
}


def register(cls: type[Component]) -> type[Component]:
    REGISTRY[cls.type_name] = cls
    return cls
