"""Deterministic tick-driven replay of a scenario.

Each scheduled input is processed to completion within its tick: the
conduit pipeline runs, uplinked locations enter the overlay at the user's
gateway, the EnterWhere message is routed to the storing node, matching
runs there, and any notice is pushed back into the user's conduit. Hop
counts are recorded rather than simulated as delay.
"""

from __future__ import annotations

import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from ..errors import GlossError, InvariantViolation, NmeaError
from ..geo import GeoPoint
from ..hearsay import ChannelRegistry, HearsayRecord, HearsayService, ProfilePredicate
from ..overlay import Network, ingress
from ..pipeline.assembly import Assembly, SinkOutput, assemble
from ..pipeline.components import HearsayService as HearsayComponent
from ..pipeline.components import SmsDevice, UserProxy
from ..pipeline.events import Event, EventKind
from ..pipeline.nmea import parse_gga
from ..profiles import ProfileService
from .report import Report
from .scenario import Scenario, ScheduledInput

log = logging.getLogger(__name__)


@dataclass
class Clock:
    now: int = 0

    def advance(self, tick: int) -> None:
        if tick < self.now:
            raise InvariantViolation(f"clock moved backwards: {self.now} -> {tick}")
        self.now = tick


def _source_for(asm: Assembly, kind: EventKind, prefer: str | None = None) -> str:
    if prefer in asm.sources and kind in asm.components[prefer].inputs:
        return prefer
    for name in asm.sources:
        if kind in asm.components[name].inputs:
            return name
    raise InvariantViolation(f"assembly has no source for {kind.value}")


class Simulator:
    def __init__(self, scenario: Scenario, seed: int | None = None, caching: bool = True, trace: bool = False):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        # Scripted scenarios draw nothing from this; it is the single
        # randomness source any stochastic input must use.
        self.rng = random.Random(self.seed)
        self.caching = caching
        self.tracing = trace
        self.trace_lines: list[str] = []
        self.clock = Clock()
        self.counters: Counter[str] = Counter()
        self.deliveries: list[tuple[int, str, str, str]] = []
        self.user_points: dict[str, list[GeoPoint]] = defaultdict(list)

        s = scenario
        self.net: Network = s.build_network()
        self.profiles = ProfileService(self.net, s.policy, caching=caching)
        self.profiles.install(s.profiles)
        self.profile_by_user = {p.user: p for p in s.profiles}
        self.channels = ChannelRegistry()
        for prof in s.profiles:
            self.channels.register(prof.user, prof.contacts)
        self.hearsay = HearsayService(self.net, self.profiles, self.channels)

        self.conduits = {user: assemble(spec, owner=user) for user, spec in s.conduits.items()}
        self.servers: dict[str, Assembly] = {}
        for nid in self.net.nodes:
            asm = assemble(s.server_spec(nid), owner=nid)
            for comp in asm.components.values():
                if isinstance(comp, HearsayComponent):
                    comp.handler = self._entry_handler(nid)
                elif isinstance(comp, UserProxy):
                    comp.handler = self._proxy_handler(nid)
            self.servers[nid] = asm

    # component callbacks

    def _entry_handler(self, nid):
        def handle(event: Event):
            user, where, t = event["user"], event["where"], event["t"]
            return self.hearsay.retries(nid, user) + self.hearsay.on_enter(nid, user, where, t)
        return handle

    def _proxy_handler(self, nid):
        def handle(notice: Event):
            receipt = self.hearsay.deliver_notice(nid, notice)
            if receipt is None:
                return []
            self.deliveries.append((self.clock.now, receipt.user, receipt.hearsay_id, receipt.channel))
            return [notice]
        return handle

    def _trace(self, line: str) -> None:
        if self.tracing:
            self.trace_lines.append(f"t={self.clock.now} {line}")

    # input handling

    def _feed_nmea(self, user: str, line: str) -> None:
        try:
            point, _ = parse_gga(line)
        except NmeaError:
            point = None
        if point is not None and self.scenario.world[self.scenario.world.root].bounds.contains_point(point):
            self.user_points[user].append(point)
        conduit = self.conduits[user]
        src = _source_for(conduit, EventKind.RAW)
        self._handle_conduit_outputs(user, conduit.inject(src, Event.raw(line, user)))

    def _handle_conduit_outputs(self, user: str, outputs: list[SinkOutput]) -> None:
        conduit = self.conduits[user]
        for out in outputs:
            if self.tracing:
                self._trace(f"{user}/{out.sink} {out.event.to_xml()}")
            if out.event.kind is EventKind.LOCATION and isinstance(conduit.components[out.sink], SmsDevice):
                self._uplink(user, out.event)

    def _uplink(self, user: str, location: Event) -> None:
        gateway = self.scenario.gateways[user]
        server = self.servers[gateway]
        for out in server.inject(_source_for(server, EventKind.LOCATION, "sms"), location):
            if out.event.kind is not EventKind.LOCATION:
                continue
            try:
                env, trace = ingress(self.net, gateway, out.event)
            except GlossError as exc:
                self.counters["runtime_errors"] += 1
                log.debug("ingress failed: %s", exc)
                continue
            if self.tracing:
                self._trace(env.payload.to_xml())
                self._trace(trace.log_line())
            if trace.delivered:
                dest = self.servers[trace.terminal]
                dest.inject(_source_for(dest, EventKind.ENTER_WHERE, "p2p-in"), env.payload)
        self._drain_channels()

    def _drain_channels(self) -> None:
        for user, channel, notice in self.channels.drain():
            conduit = self.conduits[user]
            src = _source_for(conduit, EventKind.HEARSAY_NOTICE, channel)
            self._handle_conduit_outputs(user, conduit.inject(src, notice))

    def _insert(self, args: dict) -> None:
        rec = HearsayRecord(
            args["id"], args["where"], ProfilePredicate(args["tags"]), args["info"],
            args["depositor"], self.clock.now,
        )
        try:
            node = self.hearsay.insert(args["origin"], rec)
        except GlossError as exc:
            self.counters["runtime_errors"] += 1
            log.debug("insert failed: %s", exc)
            return
        self._trace(rec.to_event().to_xml())
        self._trace(f"placed hearsay={rec.hearsay_id} node={node}")

    def _fetch(self, node: str, user: str) -> None:
        try:
            result = self.profiles.fetch(node, user, self.clock.now)
        except GlossError as exc:
            self.counters["profile_unavailable"] += 1
            log.debug("fetch failed: %s", exc)
            return
        path = ">".join(result.request_path + result.reply_path[1:]) or node
        self._trace(f"fetch user={user} from={node} answered_by={result.answered_by} path={path}")

    def _dispatch(self, item: ScheduledInput) -> None:
        a = item.args
        if item.kind == "nmea":
            self._feed_nmea(a["user"], a["line"])
        elif item.kind == "hearsay":
            self._insert(a)
        elif item.kind == "channel":
            self.channels.set(a["user"], a["channel"], a["up"])
            self._trace(f"channel user={a['user']} name={a['channel']} {'up' if a['up'] else 'down'}")
        elif item.kind == "fetch":
            self._fetch(a["node"], a["user"])

    def run(self) -> Report:
        s = self.scenario
        schedule = list(s.schedule)
        pos = 0
        for tick in range(s.horizon + 1):
            self.clock.advance(tick)
            for asm in (*self.conduits.values(), *self.servers.values()):
                asm.now = tick
            if self.caching:
                self.counters["cache_evictions"] += self.profiles.expire_all(tick)
            while pos < len(schedule) and schedule[pos].tick == tick:
                self._dispatch(schedule[pos])
                pos += 1
        self.counters["inputs_after_horizon"] += len(schedule) - pos
        return self.report()

    def report(self) -> Report:
        net, s = self.net, self.scenario
        st = net.stats
        c = Counter(self.counters)
        for asm in (*self.conduits.values(), *self.servers.values()):
            c.update(asm.metrics())
        c.update(self.hearsay.stats)
        c["envelopes_created"] = st.created
        c["envelopes_delivered"] = st.delivered
        c["envelopes_undeliverable"] = st.undeliverable
        c["envelopes_in_flight"] = st.created - st.delivered - st.undeliverable
        c["dropped_branches"] = st.dropped_branches
        c.pop("unbound", None)
        if c["envelopes_in_flight"] != 0:
            raise InvariantViolation("envelopes left in flight by a synchronous run")
        return Report(
            scenario=s.name,
            seed=self.seed,
            horizon=s.horizon,
            caching=self.caching,
            deliveries=list(self.deliveries),
            node_messages={nid: st.arrivals.get(nid, 0) for nid in net.nodes},
            node_depths={nid: net.node_depth(nid) for nid in net.nodes},
            max_depth=s.world.max_depth,
            hop_histogram=dict(st.hop_histogram),
            cache_hits=dict(self.profiles.stats.hits),
            cache_misses=dict(self.profiles.stats.misses),
            transitions={u: s.world.transitions_by_depth(pts) for u, pts in sorted(self.user_points.items())},
            placements=dict(self.hearsay.placements),
            counters=c,
        )


def run(scenario: Scenario, seed: int | None = None, caching: bool = True, trace: bool = False) -> Report:
    return Simulator(scenario, seed=seed, caching=caching, trace=trace).run()
