import random

import pytest
from hypothesis import given, strategies as st

from conftest import WORLD1_NODES, make_net1
from gloss.errors import AllChannelsFailed, UnknownWhere
from gloss.generate import random_network, random_world
from gloss.hearsay import (
    ChannelRegistry, HearsayRecord, HearsayService, ProfilePredicate, match, notify, store_of,
)
from gloss.oracles import scan_owning_node
from gloss.pipeline import Event
from gloss.profiles import Profile, ProfileService

BOB = Profile("bob", {"cafe", "jazz"}, ("sms", "gprs"), "brussels")
CAROL = Profile("carol", {"opera"}, ("sms",), "brussels")
CAFE = HearsayRecord("h-cafe", "rue-x", ProfilePredicate({"cafe"}), "good coffee", "anna")


def service(net=None, profiles=(BOB, CAROL)):
    net = net or make_net1()
    ps = ProfileService(net)
    ps.install(profiles)
    channels = ChannelRegistry()
    for p in profiles:
        channels.register(p.user, p.contacts)
    return HearsayService(net, ps, channels)


# placement

@pytest.mark.parametrize("origin", ["brussels", "world", "paris", "rue-x"])
def test_cafe_stored_on_street_node(origin):
    svc = service()
    assert svc.insert(origin, CAFE) == "rue-x"
    assert "h-cafe" in store_of(svc.net["rue-x"]).records


def test_unowned_where_goes_to_deepest_owner():
    nodes = [("rue-x", "rue-x", "france") if n == "rue-x" else (n, r, p)
             for n, r, p in WORLD1_NODES if n != "paris"]
    net = make_net1(nodes=nodes)
    assert scan_owning_node(net, "paris") == "france"
    svc = service(net)
    rec = HearsayRecord("h-p", "paris", ProfilePredicate(), "x", "anna")
    assert svc.insert("brussels", rec) == "france"


def test_zero_hop_placement():
    svc = service()
    svc.insert("rue-x", CAFE)
    assert svc.net.stats.hop_histogram == {0: 1}


def test_unknown_where():
    with pytest.raises(UnknownWhere):
        service().insert("world", HearsayRecord("h", "atlantis", ProfilePredicate(), "", "a"))


@given(st.integers(0, 10**6))
def test_placement_matches_scan(seed):
    rng = random.Random(seed)
    world = random_world(rng)
    net = random_network(rng, world)
    svc = HearsayService(net, ProfileService(net))
    where = rng.choice(sorted(r.id for r in world))
    rec = HearsayRecord("h", where, ProfilePredicate(), "", "a")
    assert svc.insert(rng.choice(sorted(net.nodes)), rec) == scan_owning_node(net, where)


# matching

@pytest.mark.parametrize("tags,required,expected", [
    ({"cafe", "jazz"}, {"cafe"}, True),
    ({"jazz"}, {"cafe"}, False),
    (set(), set(), True),
    ({"jazz"}, set(), True),
])
def test_match(tags, required, expected):
    assert match(Profile("u", tags, ("sms",), "h"), ProfilePredicate(required)) is expected


def test_bob_gets_one_notice_then_none():
    svc = service()
    svc.insert("brussels", CAFE)
    first = svc.on_enter("rue-x", "bob", "rue-x", 10)
    assert [e.to_xml() for e in first] == [
        Event.hearsay_notice("h-cafe", "good coffee", "bob").to_xml()
    ]
    assert svc.on_enter("rue-x", "bob", "rue-x", 11) == []


def test_non_matching_user_gets_nothing():
    svc = service()
    svc.insert("brussels", CAFE)
    assert svc.on_enter("rue-x", "carol", "rue-x", 3) == []


def test_no_fetch_when_nothing_relevant():
    svc = service()
    assert svc.on_enter("rue-x", "bob", "rue-x", 0) == []
    assert svc.net.stats.created == 0


def test_matching_runs_on_storing_node():
    svc = service()
    svc.insert("brussels", CAFE)
    svc.on_enter("rue-x", "bob", "rue-x", 1)
    svc.on_enter("rue-x", "carol", "rue-x", 2)
    assert {node for node, _, _ in svc.match_log} == {svc.placements["h-cafe"]}


def test_hearsay_for_ancestor_where_fires_in_descendant():
    # a paris note lives on the paris node, which is also told about street entries
    svc = service()
    svc.insert("world", HearsayRecord("h-p", "paris", ProfilePredicate({"jazz"}), "gig", "anna"))
    assert [e["id"] for e in svc.on_enter("paris", "bob", "rue-x", 0)] == ["h-p"]


# notification

def notice():
    return Event.hearsay_notice("h-cafe", "good coffee", "bob")


def test_notify_prefers_first_channel():
    ch = ChannelRegistry()
    ch.register("bob", ["sms", "gprs"])
    assert notify(BOB, notice(), ch).channel == "sms"
    assert ch.drain() == [("bob", "sms", notice())]


def test_notify_falls_back():
    ch = ChannelRegistry()
    ch.register("bob", ["sms", "gprs"])
    ch.set("bob", "sms", False)
    assert notify(BOB, notice(), ch).channel == "gprs"


def test_notify_all_down():
    ch = ChannelRegistry()
    with pytest.raises(AllChannelsFailed):
        notify(BOB, notice(), ch)
    assert ch.outbox == []


def test_failed_notice_retried_on_next_entry():
    svc = service()
    svc.insert("brussels", CAFE)
    svc.channels.set("bob", "sms", False)
    svc.channels.set("bob", "gprs", False)
    [n] = svc.on_enter("rue-x", "bob", "rue-x", 5)
    assert svc.deliver_notice("rue-x", n) is None
    store = store_of(svc.net["rue-x"])
    assert store.pending[("h-cafe", "bob")].retries == 1
    assert svc.on_enter("rue-x", "bob", "rue-x", 6) == []
    svc.channels.set("bob", "gprs", True)
    [again] = svc.retries("rue-x", "bob")
    receipt = svc.deliver_notice("rue-x", again)
    assert receipt.channel == "gprs"
    assert not store.pending and svc.receipts == [receipt]
