"""Assemblies: named components wired by pipes and buses.

Assembly spec text, one directive per line::

    component <name> <type> [key=value ...]
    pipe <src> <dst> [kinds=K1,K2]
    bus <name> [kinds=K1,...] [from=a,b] [to=x,y]
    source <name>
    sink <name>

Propagation is synchronous and depth-first: an event handed to a link is
fully processed downstream before the next link sees it, so bus subscribers
run in subscription order and every run is reproducible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from string import Template
from typing import Iterable, NamedTuple

from ..errors import (
    CycleDetected,
    InvariantViolation,
    KindIncompatible,
    KindMismatch,
    ScenarioParseError,
    UnknownComponent,
    UnknownSource,
)
from ..textfmt import iter_records, split_list, split_params
from .components import REGISTRY, Buffer, Component, parse_kinds
from .events import Event, EventKind


@dataclass
class ComponentDecl:
    name: str
    type: str
    params: dict[str, str] = field(default_factory=dict)
    line: int | None = None


@dataclass
class PipeDecl:
    src: str
    dst: str
    kinds: frozenset[EventKind] | None = None
    line: int | None = None


@dataclass
class BusDecl:
    name: str
    kinds: frozenset[EventKind] | None = None
    publishers: list[str] = field(default_factory=list)
    subscribers: list[str] = field(default_factory=list)
    line: int | None = None


@dataclass
class AssemblySpec:
    components: list[ComponentDecl] = field(default_factory=list)
    pipes: list[PipeDecl] = field(default_factory=list)
    buses: list[BusDecl] = field(default_factory=list)
    sources: list[str] = field(default_factory=list)
    sinks: list[str] = field(default_factory=list)


def parse_assembly_spec(lines: Iterable[str], first_line: int = 1) -> AssemblySpec:
    spec = AssemblySpec()
    for lineno, tokens in iter_records(lines, first_line):
        directive, rest = tokens[0], tokens[1:]
        pos, params = split_params(rest)
        try:
            if directive == "component":
                name, ctype = pos
                spec.components.append(ComponentDecl(name, ctype, params, lineno))
            elif directive == "pipe":
                if len(pos) == 3 and pos[1] in ("->", "→"):
                    pos = [pos[0], pos[2]]
                src, dst = pos
                kinds = parse_kinds(params["kinds"]) if "kinds" in params else None
                spec.pipes.append(PipeDecl(src, dst, kinds, lineno))
            elif directive == "bus":
                (name,) = pos
                kinds = parse_kinds(params["kinds"]) if "kinds" in params else None
                spec.buses.append(BusDecl(
                    name, kinds, split_list(params.get("from", "")),
                    split_list(params.get("to", "")), lineno,
                ))
            elif directive in ("source", "sink"):
                getattr(spec, directive + "s").extend(pos)
            else:
                raise ScenarioParseError(f"unknown assembly directive {directive!r}", line=lineno)
        except ValueError as exc:
            raise ScenarioParseError(f"bad {directive} directive: {exc}", line=lineno) from None
    return spec


def load_assembly_spec(path) -> AssemblySpec:
    return parse_assembly_spec(Path(path).read_text().splitlines())


class SinkOutput(NamedTuple):
    sink: str
    event: Event


@dataclass
class Bus:
    name: str
    kinds: frozenset[EventKind]
    subscribers: list[str]
    dropped: int = 0


@dataclass
class _Link:
    dst: str
    kinds: frozenset[EventKind]
    is_bus: bool = False


class Assembly:
    """A wired, validated set of component instances (see :func:`assemble`)."""

    def __init__(self, components, buses, links, sources, sinks, owner=None):
        self.components: dict[str, Component] = components
        self.buses: dict[str, Bus] = buses
        self.links: dict[str, list[_Link]] = links
        self.sources: list[str] = sources
        self.sinks: list[str] = sinks
        self.owner = owner
        self.now = 0
        self.dropped = 0
        self._seq = 0
        for comp in components.values():
            comp.assembly = self

    def _stamp(self, event: Event) -> Event:
        self._seq += 1
        return event.with_seq(self._seq)

    def inject(self, source: str, event: Event) -> list[SinkOutput]:
        if source not in self.sources:
            raise UnknownSource(f"{source!r} is not a source of this assembly")
        comp = self.components[source]
        if event.kind not in comp.inputs:
            raise KindMismatch(f"source {source!r} does not accept {event.kind.value}")
        out: list[SinkOutput] = []
        self._accept(source, self._stamp(event), out)
        return out

    def publish(self, bus_name: str, event: Event) -> list[SinkOutput]:
        bus = self.buses[bus_name]
        if event.kind not in bus.kinds:
            raise KindMismatch(f"bus {bus_name!r} does not carry {event.kind.value}")
        out: list[SinkOutput] = []
        self._publish(bus, self._stamp(event), out)
        return out

    def flush(self, name: str) -> list[SinkOutput]:
        """Release a buffer component's queue downstream."""
        comp = self.components[name]
        if not isinstance(comp, Buffer):
            raise TypeError(f"{name!r} is not a buffer")
        out: list[SinkOutput] = []
        for event in comp.drain():
            self._emit(name, event, out)
        return out

    def _accept(self, name: str, event: Event, out: list[SinkOutput]) -> None:
        comp = self.components[name]
        if event.kind not in comp.inputs:
            raise InvariantViolation(f"{name!r} handed {event.kind.value} outside its inputs")
        for result in comp.accept(event):
            if result.kind not in comp.outputs:
                raise InvariantViolation(f"{name!r} emitted undeclared {result.kind.value}")
            self._emit(name, self._stamp(result), out)

    def _emit(self, name: str, event: Event, out: list[SinkOutput]) -> None:
        forwarded = False
        if name in self.sinks:
            out.append(SinkOutput(name, event))
            forwarded = True
        for link in self.links.get(name, ()):
            if event.kind not in link.kinds:
                continue
            forwarded = True
            if link.is_bus:
                self._publish(self.buses[link.dst], event, out)
            else:
                self._accept(link.dst, event, out)
        if not forwarded:
            self.dropped += 1

    def _publish(self, bus: Bus, event: Event, out: list[SinkOutput]) -> None:
        if not bus.subscribers:
            bus.dropped += 1
            return
        for sub in bus.subscribers:
            self._accept(sub, event, out)

    def metrics(self) -> Counter:
        total: Counter[str] = Counter()
        for comp in self.components.values():
            total.update(comp.metrics)
        total["bus_dropped"] += sum(b.dropped for b in self.buses.values())
        total["unrouted"] += self.dropped
        return +total


def bus_publish(assembly: Assembly, bus_name: str, event: Event) -> list[SinkOutput]:
    return assembly.publish(bus_name, event)


def inject(assembly: Assembly, source: str, event: Event) -> list[SinkOutput]:
    return assembly.inject(source, event)


def assemble(spec: AssemblySpec | str, owner: str | None = None, registry=None) -> Assembly:
    if isinstance(spec, str):
        spec = parse_assembly_spec(spec.splitlines())
    registry = REGISTRY if registry is None else registry

    components: dict[str, Component] = {}
    for decl in spec.components:
        if decl.name in components:
            raise UnknownComponent(f"duplicate component name {decl.name!r}")
        cls = registry.get(decl.type)
        if cls is None:
            raise UnknownComponent(f"component {decl.name!r}: unknown type {decl.type!r}")
        try:
            components[decl.name] = cls(decl.name, **decl.params)
        except (TypeError, ValueError) as exc:
            raise UnknownComponent(f"component {decl.name!r}: {exc}") from None

    def need(name, what):
        if name not in components:
            raise UnknownComponent(f"{what} refers to unknown component {name!r}")
        return components[name]

    links: dict[str, list[_Link]] = {}
    buses: dict[str, Bus] = {}
    edges: list[tuple[str, str, str]] = []  # (src, dst, label)

    for pipe in spec.pipes:
        label = f"pipe {pipe.src}->{pipe.dst}"
        src, dst = need(pipe.src, label), need(pipe.dst, label)
        kinds = src.outputs & dst.inputs
        if pipe.kinds is not None:
            kinds &= pipe.kinds
        if not kinds:
            raise KindIncompatible(f"{label}: no event kind flows from {src.type_name} to {dst.type_name}")
        links.setdefault(pipe.src, []).append(_Link(pipe.dst, frozenset(kinds)))
        edges.append((pipe.src, pipe.dst, label))

    for decl in spec.buses:
        if decl.name in components or decl.name in buses:
            raise UnknownComponent(f"bus name {decl.name!r} clashes with another name")
        pubs = [need(p, f"bus {decl.name}") for p in decl.publishers]
        subs = [need(s, f"bus {decl.name}") for s in decl.subscribers]
        kinds = decl.kinds
        if kinds is None:
            kinds = frozenset().union(*(p.outputs for p in pubs)) if pubs else frozenset()
        if not kinds:
            raise KindIncompatible(f"bus {decl.name}: cannot infer kinds (no publishers)")
        for pub in pubs:
            carried = pub.outputs & kinds
            if not carried:
                raise KindIncompatible(f"bus {decl.name}: publisher {pub.name!r} emits none of its kinds")
            links.setdefault(pub.name, []).append(_Link(decl.name, frozenset(carried), is_bus=True))
            edges.append((pub.name, decl.name, f"bus {decl.name} from {pub.name}"))
        for sub in subs:
            if not kinds <= sub.inputs:
                raise KindIncompatible(f"bus {decl.name}: subscriber {sub.name!r} cannot accept all bus kinds")
            edges.append((decl.name, sub.name, f"bus {decl.name} to {sub.name}"))
        buses[decl.name] = Bus(decl.name, kinds, list(decl.subscribers))

    _check_acyclic(edges)
    for name in spec.sources + spec.sinks:
        need(name, "source/sink list")
    return Assembly(components, buses, links, list(spec.sources), list(spec.sinks), owner)


def _check_acyclic(edges: list[tuple[str, str, str]]) -> None:
    graph: dict[str, list[tuple[str, str]]] = {}
    for src, dst, label in edges:
        graph.setdefault(src, []).append((dst, label))
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node):
        state[node] = 1
        for nxt, label in graph.get(node, ()):
            mark = state.get(nxt)
            if mark == 1:
                raise CycleDetected(f"cycle through {label}")
            if mark is None:
                visit(nxt)
        state[node] = 2

    for node in list(graph):
        if node not in state:
            visit(node)


CONDUIT_TEMPLATE = Template("""\
component gps      gps-device
component adapter  nmea-adapter
component filter   threshold-filter threshold=$threshold
component ui       hearsay-ui
component sms      sms-device
pipe gps adapter
pipe adapter filter
bus  location kinds=Location from=filter to=ui,sms
pipe sms ui kinds=HearsayNotice
source gps
source sms
sink ui
sink sms
""")

SERVER_TEMPLATE = """\
component sms       sms-gateway
component location  location-service
component p2p-out   p2p-out
component p2p-in    p2p-in
component hearsay   hearsay-service
component proxy     user-proxy
bus  sms-bus kinds=Location from=sms to=location
pipe location p2p-out
bus  p2p-bus kinds=EnterWhere from=p2p-in to=hearsay
pipe hearsay proxy
source sms
source p2p-in
sink p2p-out
sink proxy
"""


def conduit_spec(threshold: float = 100.0) -> str:
    return CONDUIT_TEMPLATE.substitute(threshold=threshold)
