import pytest

from gloss.geo import GeoPoint, Rect, WorldTree
from gloss.overlay import Network

# WORLD-1: abstract half-open rectangles on [0,100)^2, names mirroring the
# Anna/Bob story. Tuples are (id, parent, lat_min, lat_max, lon_min, lon_max).
WORLD1 = [
    ("world", None, 0, 100, 0, 100),
    ("france", "world", 0, 50, 0, 100),
    ("belgium", "world", 50, 100, 0, 100),
    ("paris", "france", 0, 25, 0, 50),
    ("rue-x", "paris", 0, 5, 0, 5),
    ("brussels", "belgium", 50, 75, 0, 50),
]

WORLD1_NODES = [
    ("world", "world", None),
    ("france", "france", "world"),
    ("belgium", "belgium", "world"),
    ("paris", "paris", "france"),
    ("rue-x", "rue-x", "paris"),
    ("brussels", "brussels", "belgium"),
]


def make_world1() -> WorldTree:
    return WorldTree.from_records((rid, parent, Rect(*b)) for rid, parent, *b in WORLD1)


def make_net1(known=None, nodes=WORLD1_NODES, hop_limit=32) -> Network:
    known = known or {}
    return Network.build(
        make_world1(),
        [(nid, region, parent, known.get(nid, {})) for nid, region, parent in nodes],
        hop_limit,
    )


@pytest.fixture
def world1():
    return make_world1()


@pytest.fixture
def net1():
    return make_net1()


def P(lat, lon):
    return GeoPoint(lat, lon)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1])):
            terminalreporter.write_line(line)
