"""Run report and its two text renderings.

Machine format (``gloss-report v1``): one record per line, ``kind`` followed
by ``key=value`` fields, sections in a fixed order and rows sorted by key::

    gloss-report v1
    meta scenario=<name> seed=<n> horizon=<n> cache=on|off
    delivery tick=<n> user=<id> hearsay=<id> channel=<name>
    messages depth=<d> count=<n>
    node id=<node> depth=<d> count=<n>
    hops n=<hops> count=<n>
    cache depth=<d> hits=<n> misses=<n>
    transitions user=<id> depth=<d> count=<n>
    transitions-total depth=<d> count=<n>
    placement hearsay=<id> node=<node>
    counter name=<name> value=<n>
    end
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

COUNTER_NAMES = (
    "envelopes_created",
    "envelopes_delivered",
    "envelopes_undeliverable",
    "envelopes_in_flight",
    "dropped_branches",
    "nmea_checksum_mismatch",
    "nmea_malformed_sentence",
    "nmea_no_fix",
    "nmea_skipped",
    "filter_suppressed",
    "bus_dropped",
    "unrouted",
    "profile_unavailable",
    "notify_failed",
    "cache_evictions",
    "runtime_errors",
    "inputs_after_horizon",
)


@dataclass
class Report:
    scenario: str = ""
    seed: int = 0
    horizon: int = 0
    caching: bool = True
    deliveries: list[tuple[int, str, str, str]] = field(default_factory=list)
    node_messages: dict[str, int] = field(default_factory=dict)
    node_depths: dict[str, int] = field(default_factory=dict)
    max_depth: int = 0
    hop_histogram: dict[int, int] = field(default_factory=dict)
    cache_hits: dict[int, int] = field(default_factory=dict)
    cache_misses: dict[int, int] = field(default_factory=dict)
    transitions: dict[str, list[int]] = field(default_factory=dict)
    placements: dict[str, str] = field(default_factory=dict)
    counters: Counter = field(default_factory=Counter)

    @property
    def messages_by_depth(self) -> dict[int, int]:
        out = {d: 0 for d in range(self.max_depth + 1)}
        for nid, count in self.node_messages.items():
            d = self.node_depths[nid]
            out[d] = out.get(d, 0) + count
        return out

    @property
    def total_messages(self) -> int:
        return sum(self.node_messages.values())

    @property
    def transitions_total(self) -> list[int]:
        total = [0] * (self.max_depth + 1)
        for counts in self.transitions.values():
            for d, c in enumerate(counts):
                total[d] += c
        return total

    def counter(self, name: str) -> int:
        return self.counters.get(name, 0)


def emit_machine(r: Report) -> str:
    out = ["gloss-report v1",
           f"meta scenario={r.scenario} seed={r.seed} horizon={r.horizon} cache={'on' if r.caching else 'off'}"]
    for tick, user, hid, channel in r.deliveries:
        out.append(f"delivery tick={tick} user={user} hearsay={hid} channel={channel}")
    for d, count in sorted(r.messages_by_depth.items()):
        out.append(f"messages depth={d} count={count}")
    for nid in sorted(r.node_depths):
        out.append(f"node id={nid} depth={r.node_depths[nid]} count={r.node_messages.get(nid, 0)}")
    for hops in sorted(r.hop_histogram):
        out.append(f"hops n={hops} count={r.hop_histogram[hops]}")
    for d in range(r.max_depth + 1):
        out.append(f"cache depth={d} hits={r.cache_hits.get(d, 0)} misses={r.cache_misses.get(d, 0)}")
    for user in sorted(r.transitions):
        for d, count in enumerate(r.transitions[user]):
            out.append(f"transitions user={user} depth={d} count={count}")
    for d, count in enumerate(r.transitions_total):
        out.append(f"transitions-total depth={d} count={count}")
    for hid in sorted(r.placements):
        out.append(f"placement hearsay={hid} node={r.placements[hid]}")
    for name in sorted(set(COUNTER_NAMES) | set(r.counters)):
        out.append(f"counter name={name} value={r.counter(name)}")
    out.append("end")
    return "\n".join(out) + "\n"


def _table(title: str, header: list[str], rows: list[list]) -> list[str]:
    cells = [header] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [title] + [fmt.format(*row).rstrip() for row in [header, ["-" * w for w in widths], *cells[1:]]]
    if not rows:
        lines.append("(none)")
    return lines + [""]


def emit_human(r: Report) -> str:
    lines = [f"scenario {r.scenario}  seed {r.seed}  horizon {r.horizon}  cache {'on' if r.caching else 'off'}", ""]
    lines += _table("Deliveries", ["tick", "user", "hearsay", "channel"], [list(d) for d in r.deliveries])
    lines += _table("Messages by depth", ["depth", "messages"], [[d, c] for d, c in sorted(r.messages_by_depth.items())])
    lines += _table("Hop counts", ["hops", "envelopes"], [[h, r.hop_histogram[h]] for h in sorted(r.hop_histogram)])
    lines += _table("Cache", ["depth", "hits", "misses"],
                    [[d, r.cache_hits.get(d, 0), r.cache_misses.get(d, 0)] for d in range(r.max_depth + 1)])
    users = sorted(r.transitions)
    rows = [[d] + [r.transitions[u][d] for u in users] + [total]
            for d, total in enumerate(r.transitions_total)]
    lines += _table("Region transitions", ["depth"] + users + ["total"], rows)
    lines += _table("Counters", ["counter", "value"],
                    [[n, r.counter(n)] for n in sorted(set(COUNTER_NAMES) | set(r.counters))])
    return "\n".join(lines)


def report_emit(r: Report, format: str = "human") -> str:
    if format == "machine":
        return emit_machine(r)
    if format == "human":
        return emit_human(r)
    raise ValueError(f"unknown report format {format!r}")
