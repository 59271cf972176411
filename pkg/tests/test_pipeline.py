import random

import pytest
from hypothesis import given, settings, strategies as st

from gloss.errors import (
    CycleDetected, InvariantViolation, KindIncompatible, KindMismatch, UnknownComponent, UnknownSource,
)
from gloss.geo import GeoPoint
from gloss.oracles import replay_threshold
from gloss.pipeline import (
    Component, Event, EventKind, assemble, bus_publish, conduit_spec, format_gga, from_xml, inject,
)
from gloss.pipeline.assembly import SERVER_TEMPLATE, parse_assembly_spec
from gloss.pipeline.components import ThresholdFilter
from gloss.profiles import Profile

MUNICH = "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47"


@pytest.fixture
def conduit():
    return assemble(conduit_spec(100), owner="bob")


def test_default_conduit_shape(conduit):
    assert len(conduit.components) == 5
    assert len(conduit.buses) == 1
    assert list(conduit.buses["location"].subscribers) == ["ui", "sms"]


def test_inject_valid_nmea_reaches_both_sinks(conduit):
    out = conduit.inject("gps", Event.raw(MUNICH))
    assert [o.sink for o in out] == ["ui", "sms"]
    for o in out:
        assert o.event.kind is EventKind.LOCATION
        assert o.event["user"] == "bob"
        assert round(o.event.point.lat, 4) == 48.1173


def test_bad_checksum_gives_no_output_and_one_error(conduit):
    assert conduit.inject("gps", Event.raw(MUNICH[:-2] + "00")) == []
    assert conduit.metrics()["nmea_checksum_mismatch"] == 1


def test_two_fixes_10m_apart_give_one_output():
    asm = assemble(conduit_spec(100), owner="bob")
    a = GeoPoint(48.1, 11.5)
    b = GeoPoint(48.1 + 10 / 111_195, 11.5)  # ~10 m north
    outs = [o for line in (format_gga(a), format_gga(b)) for o in asm.inject("gps", Event.raw(line))]
    assert [o.sink for o in outs] == ["ui", "sms"]


def test_bus_subscription_order():
    text = """
    component src tap kinds=Location
    component ui hearsay-ui
    component sms sms-device
    bus b kinds=Location from=src to=ui,sms
    source src
    sink ui
    sink sms
    """
    order = []
    asm = assemble(text)
    for name in ("ui", "sms"):
        comp = asm.components[name]
        orig = comp.accept
        comp.accept = lambda e, orig=orig, name=name: (order.append(name), orig(e))[1]
    ev = Event.location("bob", GeoPoint(1, 1), 0)
    out = bus_publish(asm, "b", ev)
    assert order == ["ui", "sms"]
    assert [o.sink for o in out] == ["ui", "sms"]


def test_bus_without_subscribers_counts_drop():
    asm = assemble("component src tap kinds=Location\nbus b kinds=Location from=src\nsource src\n")
    assert asm.inject("src", Event.location("u", GeoPoint(0, 0), 0)) == []
    assert asm.buses["b"].dropped == 1
    assert asm.metrics()["bus_dropped"] == 1


def test_single_subscriber_bus_equals_pipe():
    ev = Event.location("u", GeoPoint(0, 0), 0)
    via_bus = assemble("component a tap kinds=Location\ncomponent b tap kinds=Location\n"
                       "bus x from=a to=b\nsource a\nsink b\n")
    via_pipe = assemble("component a tap kinds=Location\ncomponent b tap kinds=Location\n"
                        "pipe a b\nsource a\nsink b\n")
    assert via_bus.inject("a", ev) == via_pipe.inject("a", ev)


def test_bus_kind_mismatch():
    asm = assemble(conduit_spec(), owner="bob")
    with pytest.raises(KindMismatch):
        asm.publish("location", Event.raw("x"))


def test_cycle_detected():
    text = "component a tap\ncomponent b tap\npipe a b\npipe b a\nsource a\n"
    with pytest.raises(CycleDetected, match="pipe b->a|pipe a->b"):
        assemble(text)


def test_raw_into_threshold_filter_is_incompatible():
    text = "component gps gps-device\ncomponent f threshold-filter\npipe gps f\nsource gps\n"
    with pytest.raises(KindIncompatible, match="gps->f"):
        assemble(text)


def test_unknown_component_type():
    with pytest.raises(UnknownComponent, match="warp-drive"):
        assemble("component x warp-drive\n")


def test_unknown_source(conduit):
    with pytest.raises(UnknownSource):
        conduit.inject("adapter", Event.raw(MUNICH))


def test_source_kind_checked(conduit):
    with pytest.raises(KindMismatch):
        conduit.inject("gps", Event.location("bob", GeoPoint(0, 0), 0))


def test_component_emitting_undeclared_kind_is_caught():
    class Liar(Component):
        type_name = "liar"
        inputs = frozenset({EventKind.LOCATION})
        outputs = frozenset({EventKind.LOCATION})

        def accept(self, event):
            return [Event.raw("nope")]

    asm = assemble("component l liar\nsource l\nsink l\n", registry={"liar": Liar})
    with pytest.raises(InvariantViolation):
        asm.inject("l", Event.location("u", GeoPoint(0, 0), 0))


def test_sequence_numbers_increase(conduit):
    out = conduit.inject("gps", Event.raw(MUNICH))
    out += conduit.inject("gps", Event.raw(format_gga(GeoPoint(10, 10))))
    seqs = [o.event.seq for o in out]
    assert seqs == sorted(seqs) and seqs[0] > 0


def test_notice_path_through_sms_to_ui(conduit):
    notice = Event.hearsay_notice("h1", "cafe", "bob")
    out = conduit.inject("sms", notice)
    assert {o.sink for o in out} == {"ui", "sms"}
    assert conduit.components["ui"].shown[-1]["id"] == "h1"


def test_buffer_drop_oldest():
    asm = assemble("component buf buffer capacity=2 kinds=Location\ncomponent out tap\n"
                   "pipe buf out\nsource buf\nsink out\n")
    for i in range(3):
        assert asm.inject("buf", Event.location("u", GeoPoint(i, 0), i)) == []
    flushed = asm.flush("buf")
    assert [o.event["t"] for o in flushed] == [1, 2]
    assert asm.metrics()["buffer_dropped"] == 1


def test_server_template_assembles():
    asm = assemble(SERVER_TEMPLATE, owner="n1")
    assert set(asm.sources) == {"sms", "p2p-in"}
    out = asm.inject("sms", Event.location("bob", GeoPoint(1, 1), 3))
    assert [o.sink for o in out] == ["p2p-out"]


def test_spec_parse_arrow_pipes():
    spec = parse_assembly_spec(["component a tap", "component b tap", "pipe a -> b"])
    assert (spec.pipes[0].src, spec.pipes[0].dst) == ("a", "b")


# wire format

def test_location_xml_canonical():
    ev = Event.location("bob", GeoPoint(48.1173, 11.516667), 12)
    assert ev.to_xml() == '<location user="bob" lat="48.117300" lon="11.516667" t="12"/>'


@pytest.mark.parametrize("ev", [
    Event.enter_where("bob", "rue-x", 4),
    Event.hearsay_notice("h1", 'Cafe "Lumiere" & co <3', "bob"),
    Event.profile_request("bob"),
    Event.profile_reply(Profile("bob", frozenset({"jazz", "cafe"}), ("sms", "gprs"), "n-b")),
    Event.raw(MUNICH, "bob"),
    Event.generic("hearsay", id="h1", where="rue-x"),
])
def test_xml_round_trip(ev):
    back = from_xml(ev.to_xml())
    assert back.kind is ev.kind
    assert back.to_xml() == ev.to_xml()


def test_profile_reply_attribute_order():
    ev = Event.profile_reply(Profile("bob", frozenset({"jazz", "cafe"}), ("sms", "gprs"), "n-b"))
    assert ev.to_xml() == '<profile-reply user="bob" tags="cafe,jazz" contacts="sms,gprs" home="n-b"/>'


# properties

@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_filter_replay_equivalence(seed):
    rng = random.Random(seed)
    pts = [GeoPoint(48 + rng.uniform(0, 0.01), 11 + rng.uniform(0, 0.01)) for _ in range(rng.randint(1, 60))]
    f = ThresholdFilter("f", threshold=rng.choice([20, 100, 400]))
    emitted = [i for i, p in enumerate(pts) if f.accept(Event.location("u", p, i))]
    assert emitted == replay_threshold(pts, f.threshold)


def test_determinism_of_identical_assemblies():
    rng = random.Random(3)
    lines = [format_gga(GeoPoint(48 + rng.uniform(0, .02), 11 + rng.uniform(0, .02))) for _ in range(100)]
    runs = []
    for _ in range(2):
        asm = assemble(conduit_spec(100), owner="bob")
        runs.append([(o.sink, o.event.seq, o.event.to_xml()) for line in lines for o in asm.inject("gps", Event.raw(line))])
    assert runs[0] == runs[1]
