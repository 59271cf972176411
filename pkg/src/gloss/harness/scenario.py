"""Scenario files: everything needed to replay a run, in one sectioned
text file. See docs/scenario-format.md for the grammar."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import GlossError, ScenarioError, ScenarioParseError, ScenarioValidationError
from ..geo import WorldTree, parse_world
from ..overlay import DEFAULT_HOP_LIMIT, Network, parse_topology
from ..pipeline.assembly import (
    SERVER_TEMPLATE,
    AssemblySpec,
    assemble,
    conduit_spec,
    parse_assembly_spec,
)
from ..pipeline.components import SmsDevice
from ..pipeline.events import EventKind
from ..profiles import DEFAULT_POLICY, CachePolicy, Profile
from ..textfmt import iter_records, split_list, split_params

SECTION_RE = re.compile(r"^\[\s*([a-z]+)(?:\s+(\S+))?\s*\]\s*$")
INPUT_KINDS = ("nmea", "hearsay", "channel", "fetch")


@dataclass
class ScheduledInput:
    tick: int
    kind: str
    args: dict
    line: int | None = None


@dataclass
class Scenario:
    name: str
    world: WorldTree
    topology: list[tuple]
    profiles: list[Profile]
    gateways: dict[str, str]
    conduits: dict[str, AssemblySpec]
    servers: dict[str, AssemblySpec]
    schedule: list[ScheduledInput]
    seed: int = 0
    horizon: int = 0
    hop_limit: int = DEFAULT_HOP_LIMIT
    policy: CachePolicy = DEFAULT_POLICY
    threshold: float = 100.0
    source: str | None = None

    def build_network(self) -> Network:
        return Network.build(self.world, self.topology, self.hop_limit)

    def server_spec(self, node: str) -> AssemblySpec:
        return self.servers.get(node) or self.servers["*"]


def _sections(lines: list[str], path):
    """Yield (name, arg, first_line, body_lines)."""
    current = None
    for idx, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if stripped.startswith("["):
            m = SECTION_RE.match(stripped)
            if not m:
                raise ScenarioParseError(f"bad section header {stripped!r}", path, idx)
            if current:
                yield current
            current = (m.group(1), m.group(2), idx + 1, [])
        elif current is not None:
            current[3].append(raw)
        elif stripped and not stripped.startswith("#"):
            raise ScenarioParseError("content before the first section", path, idx)
    if current:
        yield current


def _int(text, what, path, line):
    try:
        return int(text)
    except ValueError:
        raise ScenarioParseError(f"{what} must be an integer, got {text!r}", path, line) from None


def parse_scenario(text: str, path=None, name: str | None = None) -> Scenario:
    lines = text.splitlines()
    config: dict[str, tuple[str, int]] = {}
    world_lines = topo_lines = profile_lines = schedule_lines = None
    conduit_specs: dict[str, tuple[list[str], int]] = {}
    server_specs: dict[str, tuple[list[str], int]] = {}

    for section, arg, first, body in _sections(lines, path):
        if section == "config":
            for lineno, raw in enumerate(body, start=first):
                s = raw.split("#", 1)[0].strip()
                if not s:
                    continue
                key, sep, value = s.partition("=")
                if not sep:
                    raise ScenarioParseError(f"config line needs key = value: {s!r}", path, lineno)
                config[key.strip()] = (value.strip(), lineno)
        elif section in ("world", "topology", "profiles", "schedule") and arg is None:
            block = (body, first)
            if section == "world":
                world_lines = block
            elif section == "topology":
                topo_lines = block
            elif section == "profiles":
                profile_lines = block
            else:
                schedule_lines = block
        elif section == "assembly" and arg:
            conduit_specs[arg] = (body, first)
        elif section == "server" and arg:
            server_specs[arg] = (body, first)
        else:
            raise ScenarioParseError(f"unknown section [{section}{' ' + arg if arg else ''}]", path, first - 1)

    for label, block in (("world", world_lines), ("topology", topo_lines), ("profiles", profile_lines)):
        if block is None:
            raise ScenarioValidationError(f"missing [{label}] section", path)

    def cfg(key, default, conv):
        if key not in config:
            return default
        value, lineno = config[key]
        try:
            return conv(value)
        except (ValueError, TypeError) as exc:
            raise ScenarioParseError(f"config {key}: {exc}", path, lineno) from None

    known_keys = {"seed", "horizon", "hop_limit", "cache", "threshold", "name"}
    for key, (_, lineno) in config.items():
        if key not in known_keys:
            raise ScenarioParseError(f"unknown config key {key!r}", path, lineno)

    try:
        world = parse_world(world_lines[0], world_lines[1])
    except ScenarioError as exc:
        raise ScenarioParseError(exc.message, path, exc.line) from None
    except GlossError as exc:
        raise ScenarioValidationError(f"[world] {exc}", path) from None

    hop_limit = cfg("hop_limit", DEFAULT_HOP_LIMIT, int)
    try:
        net = parse_topology(world, topo_lines[0], topo_lines[1], hop_limit)
    except ScenarioError as exc:
        raise ScenarioParseError(exc.message, path, exc.line) from None
    except (GlossError, ValueError) as exc:
        raise ScenarioValidationError(f"[topology] {exc}", path) from None
    topology = [
        (n.id, n.managed, n.parent, dict(n.known), n.host) for n in net.nodes.values()
    ]

    profiles: list[Profile] = []
    gateways: dict[str, str] = {}
    for lineno, tokens in iter_records(profile_lines[0], profile_lines[1]):
        if len(tokens) not in (4, 5):
            raise ScenarioParseError("profile record is: user tags contacts home [gateway]", path, lineno)
        user, tags, contacts, home = tokens[:4]
        gateway = tokens[4] if len(tokens) == 5 else home
        for label, nid in (("home", home), ("gateway", gateway)):
            if nid not in net.nodes:
                raise ScenarioValidationError(f"profile {user!r}: unknown {label} node {nid!r}", path, lineno)
        if user in gateways:
            raise ScenarioValidationError(f"duplicate profile {user!r}", path, lineno)
        try:
            profiles.append(Profile(user, frozenset(split_list(tags)), tuple(split_list(contacts)), home))
        except ValueError as exc:
            raise ScenarioValidationError(str(exc), path, lineno) from None
        gateways[user] = gateway

    threshold = cfg("threshold", 100.0, float)
    conduits: dict[str, AssemblySpec] = {}
    for user, (body, first) in conduit_specs.items():
        if user not in gateways:
            raise ScenarioValidationError(f"[assembly {user}] has no matching profile", path, first - 1)
        conduits[user] = parse_assembly_spec(body, first)
    for user in gateways:
        conduits.setdefault(user, parse_assembly_spec(conduit_spec(threshold).splitlines()))
    servers: dict[str, AssemblySpec] = {"*": parse_assembly_spec(SERVER_TEMPLATE.splitlines())}
    for node, (body, first) in server_specs.items():
        if node != "*" and node not in net.nodes:
            raise ScenarioValidationError(f"[server {node}] names an unknown node", path, first - 1)
        servers[node] = parse_assembly_spec(body, first)

    for owner, spec in list(conduits.items()):
        _check_assembly(spec, owner, conduit=True, path=path)
    for owner, spec in servers.items():
        _check_assembly(spec, owner, conduit=False, path=path)

    schedule = _parse_schedule(schedule_lines, world, net, gateways, path) if schedule_lines else []
    horizon = cfg("horizon", schedule[-1].tick if schedule else 0, int)

    return Scenario(
        name=cfg("name", name or (Path(path).stem if path else "scenario"), str),
        world=world,
        topology=topology,
        profiles=profiles,
        gateways=gateways,
        conduits=conduits,
        servers=servers,
        schedule=schedule,
        seed=cfg("seed", 0, int),
        horizon=horizon,
        hop_limit=hop_limit,
        policy=cfg("cache", DEFAULT_POLICY, CachePolicy.parse),
        threshold=threshold,
        source=str(path) if path else None,
    )


def _check_assembly(spec: AssemblySpec, owner: str, conduit: bool, path) -> None:
    label = f"[assembly {owner}]" if conduit else f"[server {owner}]"
    try:
        asm = assemble(spec, owner=owner)
    except GlossError as exc:
        raise ScenarioValidationError(f"{label} {exc}", path) from None

    def has_source(kind):
        return any(kind in asm.components[s].inputs for s in asm.sources)

    if conduit:
        needs = [(has_source(EventKind.RAW), "a source accepting RawDeviceString"),
                 (has_source(EventKind.HEARSAY_NOTICE), "a source accepting HearsayNotice"),
                 (any(isinstance(asm.components[s], SmsDevice) for s in asm.sinks), "an sms-device sink")]
    else:
        needs = [(has_source(EventKind.LOCATION), "a source accepting Location"),
                 (has_source(EventKind.ENTER_WHERE), "a source accepting EnterWhere")]
    for ok, what in needs:
        if not ok:
            raise ScenarioValidationError(f"{label} needs {what}", path)


def _parse_schedule(block, world, net, gateways, path) -> list[ScheduledInput]:
    body, first = block
    schedule: list[ScheduledInput] = []
    last_tick = -1
    auto_id = 0
    for lineno, tokens in iter_records(body, first):
        if len(tokens) < 2:
            raise ScenarioParseError("schedule record needs a tick and a kind", path, lineno)
        tick = _int(tokens[0], "tick", path, lineno)
        kind = tokens[1]
        if tick < 0:
            raise ScenarioValidationError("tick must be non-negative", path, lineno)
        if tick < last_tick:
            raise ScenarioValidationError(f"schedule not sorted: tick {tick} after {last_tick}", path, lineno)
        last_tick = tick
        pos, params = split_params(tokens[2:])

        def need_user(u):
            if u not in gateways:
                raise ScenarioValidationError(f"unknown user {u!r}", path, lineno)

        def need_node(n):
            if n not in net.nodes:
                raise ScenarioValidationError(f"unknown node {n!r}", path, lineno)

        if kind == "nmea":
            if len(pos) != 2:
                raise ScenarioParseError("nmea record is: tick nmea user sentence", path, lineno)
            need_user(pos[0])
            args = {"user": pos[0], "line": pos[1]}
        elif kind == "hearsay":
            if len(pos) != 4:
                raise ScenarioParseError("hearsay record is: tick hearsay depositor where tags info", path, lineno)
            depositor, where, tags, info = pos
            if where not in world:
                raise ScenarioValidationError(f"hearsay where {where!r} is not a region", path, lineno)
            origin = params.get("from", net.region_owner[world.root] if world.root in net.region_owner else next(iter(net.nodes)))
            need_node(origin)
            auto_id += 1
            args = {
                "depositor": depositor, "where": where, "tags": frozenset(split_list(tags)),
                "info": info, "origin": origin, "id": params.get("id", f"h{auto_id}"),
            }
        elif kind == "channel":
            if len(pos) != 3 or pos[2] not in ("up", "down"):
                raise ScenarioParseError("channel record is: tick channel user name up|down", path, lineno)
            need_user(pos[0])
            args = {"user": pos[0], "channel": pos[1], "up": pos[2] == "up"}
        elif kind == "fetch":
            if len(pos) != 2:
                raise ScenarioParseError("fetch record is: tick fetch node user", path, lineno)
            need_node(pos[0])
            need_user(pos[1])
            args = {"node": pos[0], "user": pos[1]}
        else:
            raise ScenarioParseError(f"unknown schedule kind {kind!r} (expected one of {', '.join(INPUT_KINDS)})", path, lineno)
        schedule.append(ScheduledInput(tick, kind, args, lineno))
    return schedule


def bundled_scenarios() -> list[str]:
    root = resources.files("gloss") / "scenarios"
    return sorted(p.name[:-6] for p in root.iterdir() if p.name.endswith(".gloss"))


def resolve_scenario_path(ref: str):
    path = Path(ref)
    if path.exists():
        return path
    bundled = resources.files("gloss") / "scenarios" / f"{ref}.gloss"
    if bundled.is_file():
        return bundled
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")


def load_scenario(ref) -> Scenario:
    """Load a scenario from a path or a bundled name such as ``anna-bob``."""
    path = resolve_scenario_path(str(ref))
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}", str(ref)) from None
    name = path.name[:-6] if path.name.endswith(".gloss") else Path(str(path)).stem
    return parse_scenario(text, path=str(ref), name=name)
