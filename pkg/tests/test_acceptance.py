"""Acceptance checks, one test per criterion. Each prints a PASS/FAIL line
(also collected into the pytest terminal summary)."""

from __future__ import annotations

import random

import pytest

from conftest import ACCEPTANCE_LINES
from gloss.errors import ChecksumMismatch
from gloss.generate import add_random_known, random_network, random_trace, random_world, trace_scenario_text
from gloss.geo import GeoPoint, Rect
from gloss.harness import load_scenario, parse_scenario, report_emit, run
from gloss.harness.scenario import resolve_scenario_path
from gloss.harness.simulator import Simulator
from gloss.hearsay import HearsayRecord, HearsayService, ProfilePredicate
from gloss.oracles import chord_distance_m, replay_threshold, route_oracle, scan_owning_node
from gloss.overlay import deliver
from gloss.pipeline import Event, EventKind, assemble, format_gga, parse_gga
from gloss.profiles import ProfileService

SEED = 20261018


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n} {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def routing_cases(count=1000):
    rng = random.Random(SEED)
    for _ in range(count):
        world = random_world(rng, max_depth=5, max_fanout=4)
        net = random_network(rng, world)
        start = rng.choice(sorted(net.nodes))
        target = rng.choice(sorted(net.region_owner))
        yield rng, world, net, start, target


def route(net, start, target):
    return deliver(net, start, net.envelope(target, Event.generic("probe"), start))


@pytest.fixture(scope="module")
def anna_bob_runs():
    sims = []
    for _ in range(10):
        sim = Simulator(load_scenario("anna-bob"), trace=True)
        sims.append((sim, sim.run()))
    return sims


def test_criterion_1_routing_reachability():
    total = ok = bounded = 0
    for _, world, net, start, target in routing_cases():
        total += 1
        trace = route(net, start, target)
        terminal, path = route_oracle(net, start, target)
        if trace.delivered and trace.terminal == terminal and trace.path == path:
            ok += 1
        if len(trace.nodes) <= 2 * world.max_depth + 1:
            bounded += 1
    verdict(1, ok == total == bounded, f"delivered-at-oracle {ok}/{total}, length bound {bounded}/{total}")


def test_criterion_2_shortcut_soundness():
    total = same = not_longer = shorter = 0
    for rng, _, net, start, target in routing_cases():
        total += 1
        base = route(net, start, target)
        add_random_known(rng, net, p=0.5, max_entries=3)
        cut = route(net, start, target)
        same += cut.terminal == base.terminal
        not_longer += len(cut.nodes) <= len(base.nodes) and len(cut.path) <= len(base.path)
        shorter += len(cut.path) < len(base.path)
    verdict(2, same == not_longer == total,
            f"terminal unchanged {same}/{total}, never longer {not_longer}/{total} ({shorter} shortened)")


def test_criterion_3_anna_bob_replay(anna_bob_runs):
    reports = [report_emit(r, "machine") for _, r in anna_bob_runs]
    sim, r = anna_bob_runs[0]
    bob = [d for d in r.deliveries if d[1] == "bob"]
    carol = [d for d in r.deliveries if d[1] == "carol"]
    # Bob's street entries, as seen by the routing trace
    entries = [int(l.split()[0][2:]) for l in sim.trace_lines
               if 'enter-where user="bob" where="rue-x"' in l]
    repeat_ok = len(entries) >= 2 and not [d for d in bob if d[0] > entries[0]]
    ok = (
        len(bob) == 1 and bob[0][2:] == ("h-cafe", "sms")
        and not carol and repeat_ok and len(set(reports)) == 1
    )
    verdict(3, ok, f"bob={bob} carol={carol} rue-x entries at {entries} "
                   f"identical reports {reports.count(reports[0])}/10")


def test_criterion_4_placement_oracle():
    rng = random.Random(SEED + 4)
    total = ok = 0
    for _ in range(500):
        world = random_world(rng, max_depth=5, max_fanout=4)
        net = random_network(rng, world, own_p=rng.choice([0.3, 0.6, 0.9]))
        svc = HearsayService(net, ProfileService(net))
        where = rng.choice(sorted(r.id for r in world))
        origin = rng.choice(sorted(net.nodes))
        placed = svc.insert(origin, HearsayRecord("h", where, ProfilePredicate(), "", "anna"))
        total += 1
        ok += placed == scan_owning_node(net, where)
    verdict(4, ok == total, f"placement equals scan {ok}/{total}")


def test_criterion_5_transition_hypothesis():
    rng = random.Random(SEED + 5)
    world = random_world(rng, root=Rect(-80.0, 80.0, -170.0, 170.0), max_depth=5, max_fanout=4)
    net = random_network(rng, world)
    bounds = world[world.root].bounds
    traces = {f"walker{i:03d}": random_trace(rng, bounds, 1000) for i in range(100)}
    monotone = 0
    expected = {}
    for user, pts in traces.items():
        counts = world.transitions_by_depth(pts)
        expected[user] = counts
        monotone += all(a <= b for a, b in zip(counts, counts[1:]))
    # the same traces through the full pipeline; threshold below the NMEA resolution step
    report = run(parse_scenario(trace_scenario_text(world, net, traces, threshold=0.01)))
    table = report.transitions_total
    table_ok = all(a <= b for a, b in zip(table, table[1:]))
    verdict(5, monotone == len(traces) and table_ok,
            f"monotone traces {monotone}/{len(traces)}, report table by depth {table}")


def test_criterion_6_cache_effectiveness():
    text = resolve_scenario_path("cache-workload").read_text()
    fetches = [l for l in text.splitlines() if " fetch " in f" {l} "]
    single_text = text.replace("\n".join(fetches[1:]) + "\n", "")
    single = run(parse_scenario(single_text)).messages_by_depth[0]
    s = load_scenario("cache-workload")
    cached = run(s).messages_by_depth[0]
    baseline = run(s, caching=False).messages_by_depth[0]
    n = len(fetches)
    ok = n == 50 and single > 0 and cached == single and baseline == n * single and cached <= 0.02 * baseline
    verdict(6, ok, f"root envelopes: one fetch {single}, cached x{n} {cached}, "
                   f"no-cache x{n} {baseline} ({100 * cached / baseline:.1f}% of baseline)")


def test_criterion_7_threshold_filter():
    rng = random.Random(SEED + 7)
    total = ok = 0
    for _ in range(1000):
        threshold = rng.choice([5.0, 20.0, 100.0, 500.0])
        step = threshold / 111_195 * rng.uniform(0.2, 2.0)
        lat, lon = rng.uniform(-60, 60), rng.uniform(-170, 170)
        lines = []
        for _ in range(rng.randint(1, 60)):
            lat += rng.gauss(0, step)
            lon += rng.gauss(0, step)
            lines.append(format_gga(GeoPoint(lat, lon)))
        asm = assemble(
            "component gps gps-device\ncomponent a nmea-adapter\n"
            f"component f threshold-filter threshold={threshold}\n"
            "pipe gps a\npipe a f\nsource gps\nsink f\n",
            owner="u",
        )
        emitted = [o.event.point for line in lines for o in asm.inject("gps", Event.raw(line))]
        fixes = [parse_gga(line)[0] for line in lines]
        spaced = all(chord_distance_m(a, b) > threshold for a, b in zip(emitted, emitted[1:]))
        total += 1
        ok += spaced and emitted == [fixes[i] for i in replay_threshold(fixes, threshold)]
    verdict(7, ok == total, f"spacing and replay equivalence {ok}/{total}")


def test_criterion_8_nmea_adapter():
    rng = random.Random(SEED + 8)
    total = close = rejected = 0
    for _ in range(1000):
        p = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180))
        if not p.is_geographic:
            continue
        total += 1
        line = format_gga(p)
        q, _ = parse_gga(line)
        close += abs(q.lat - p.lat) <= 1e-4 and abs(q.lon - p.lon) <= 1e-4
        good = int(line[-2:], 16)
        bad = (good + rng.randint(1, 255)) % 256
        try:
            parse_gga(f"{line[:-2]}{bad:02X}")
        except ChecksumMismatch:
            rejected += 1
    verdict(8, close == rejected == total, f"round-trip {close}/{total}, corrupted rejected {rejected}/{total}")


def test_criterion_9_matching_locality(anna_bob_runs):
    sim, _ = anna_bob_runs[0]
    envelopes = sim.net.stats.envelopes
    leaks = []
    replies = 0
    for msg_id, kind, payload, _path in envelopes:
        carries_profile = "profile" in payload.payload or "contacts=" in payload.to_xml()
        if kind == EventKind.PROFILE_REPLY.value:
            replies += 1
        elif carries_profile:
            leaks.append(msg_id)
    placements = sim.hearsay.placements
    log = sim.hearsay.match_log
    off_node = [(n, h, u) for n, h, u in log if placements.get(h) != n]
    ok = not leaks and replies > 0 and bool(log) and not off_node
    verdict(9, ok, f"{len(envelopes)} envelopes, {replies} profile replies, profile leaks {len(leaks)}, "
                   f"{len(log)} matches all on storing node: {not off_node}")
