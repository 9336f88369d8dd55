"""Net parsing, firing rule, reachability, and the distant relation."""

import json
import random

import pytest

from conftest import random_one_safe_net
from tracenet import NetFormatError, NotOneSafeError, parse_net, reachability_graph
from tracenet.reference import FIG2_NET_DOC

SELF_LOOP = {
    "places": ["p"],
    "transitions": [{"id": "t", "pre": ["p"], "post": ["p"]}],
    "initial_marking": ["p"],
}


def test_parse_demo_net(fig2_net):
    assert fig2_net.places == ("p0", "p1", "p2", "p3")
    assert [t.name for t in fig2_net.transitions] == ["a", "b", "c", "d", "e"]
    assert fig2_net.initial_marking == frozenset({"p0", "p2", "p3"})


def test_parse_minimal_self_loop():
    net = parse_net(json.dumps(SELF_LOOP))
    assert net.transitions[0].pre == net.transitions[0].post == frozenset({"p"})


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d["transitions"].append({"id": "x", "pre": [], "post": ["p0"]}),
         "empty preset"),
        (lambda d: d["transitions"].append({"id": "x", "pre": ["p0"], "post": []}),
         "empty postset"),
        (lambda d: d["transitions"].append({"id": "a", "pre": ["p0"], "post": ["p0"]}),
         "duplicate identifier"),
        (lambda d: d["places"].append("p0"), "duplicate identifier"),
        (lambda d: d["transitions"][0]["pre"].__setitem__(0, "nope"),
         "unknown place"),
        (lambda d: d.__setitem__("extra", 1), "unknown keys"),
        (lambda d: d.__setitem__("initial_marking", ["p0", "p0"]), "duplicate"),
    ],
)
def test_parse_rejects_bad_documents(mutate, fragment):
    doc = json.loads(json.dumps(FIG2_NET_DOC))
    mutate(doc)
    with pytest.raises(NetFormatError, match=fragment):
        parse_net(json.dumps(doc))


def test_parse_rejects_bad_json():
    with pytest.raises(NetFormatError, match="invalid JSON"):
        parse_net("{not json")


def test_enables(fig2_net):
    m0 = fig2_net.initial_marking
    assert not fig2_net.enables(m0, "c")
    assert fig2_net.enables(m0, "b")
    assert not fig2_net.enables(frozenset(), "a")


def test_fire_rule(fig2_net):
    m0 = fig2_net.initial_marking
    assert fig2_net.fire(m0, "b") == frozenset({"p1", "p2", "p3"})
    # read places persist through a self-loop transition
    assert fig2_net.fire(m0, "d") == m0
    with pytest.raises(ValueError, match="not enabled"):
        fig2_net.fire(m0, "c")


def test_fire_consumes_and_produces():
    doc = {
        "places": ["r1", "r2", "r3", "out_a", "out_b"],
        "transitions": [
            {"id": "a", "pre": ["r1"], "post": ["out_a"]},
            {"id": "b", "pre": ["r2", "r3"], "post": ["out_b", "r3"]},
        ],
        "initial_marking": ["r1", "r2", "r3"],
    }
    net = parse_net(json.dumps(doc))
    after = net.fire(net.initial_marking, "b")
    assert after == frozenset({"r1", "r3", "out_b"})


def test_reachability_demo(fig2_net, fig2_graph):
    assert len(fig2_graph.markings) == 2
    assert fig2_graph.markings[0] == fig2_net.initial_marking
    assert fig2_graph.markings[1] == frozenset({"p1", "p2", "p3"})
    assert fig2_graph.dead_transitions == ()


def test_reachability_self_loop():
    net = parse_net(json.dumps(SELF_LOOP))
    graph = reachability_graph(net)
    assert len(graph.markings) == 1
    assert graph.edges == ((0, "t", 0),)


def test_not_one_safe_witness():
    doc = {
        "places": ["p1", "p2"],
        "transitions": [{"id": "t", "pre": ["p1"], "post": ["p2"]}],
        "initial_marking": ["p1", "p2"],
    }
    net = parse_net(json.dumps(doc))
    with pytest.raises(NotOneSafeError) as err:
        reachability_graph(net)
    assert err.value.witness == ("t",)


def test_reachability_deterministic(fig2_net):
    g1 = reachability_graph(fig2_net)
    g2 = reachability_graph(fig2_net)
    assert g1.markings == g2.markings
    assert g1.edges == g2.edges


def test_distant_pairs(fig2_net):
    assert fig2_net.distant("a", "d")
    assert not fig2_net.distant("a", "b")  # share p0
    assert not fig2_net.distant("c", "d")  # share p2
    with pytest.raises(ValueError):
        fig2_net.distant("a", "a")


def test_independence_alphabet(fig2_net):
    alphabet, pairs = fig2_net.independence_alphabet()
    assert alphabet == ("a", "b", "c", "d", "e")
    assert pairs == frozenset(
        frozenset(p) for p in [("a", "d"), ("a", "e"), ("b", "d"), ("b", "e"), ("c", "e")]
    )


def test_independence_free_and_parallel():
    shared = {
        "places": ["p"],
        "transitions": [
            {"id": "t", "pre": ["p"], "post": ["p"]},
            {"id": "u", "pre": ["p"], "post": ["p"]},
        ],
        "initial_marking": ["p"],
    }
    _, pairs = parse_net(json.dumps(shared)).independence_alphabet()
    assert pairs == frozenset()

    disjoint = {
        "places": ["p", "q"],
        "transitions": [
            {"id": "t", "pre": ["p"], "post": ["p"]},
            {"id": "u", "pre": ["q"], "post": ["q"]},
        ],
        "initial_marking": ["p", "q"],
    }
    _, pairs = parse_net(json.dumps(disjoint)).independence_alphabet()
    assert pairs == frozenset({frozenset({"t", "u"})})


def test_distant_firings_commute_on_random_nets():
    rng = random.Random(20240811)
    for _ in range(25):
        net, graph = random_one_safe_net(rng)
        for marking in graph.markings:
            names = [t.name for t in net.transitions]
            for i, t in enumerate(names):
                for u in names[i + 1:]:
                    if not net.distant(t, u):
                        continue
                    if not (net.enables(marking, t) and net.enables(marking, u)):
                        continue
                    after_t = net.fire(marking, t)
                    # firing one distant transition does not disable the other
                    assert net.enables(after_t, u)
                    assert net.fire(after_t, u) == net.fire(net.fire(marking, u), t)


def test_distant_symmetric_irreflexive_on_random_nets():
    rng = random.Random(7)
    for _ in range(10):
        net, _ = random_one_safe_net(rng)
        names = [t.name for t in net.transitions]
        for i, t in enumerate(names):
            for u in names[i + 1:]:
                assert net.distant(t, u) == net.distant(u, t)
