"""Shared fixtures: the bundled demo net pipeline and a seeded generator of
small random 1-safe nets for structural property tests."""

from __future__ import annotations

import json
import random

import pytest

from tracenet import (
    NotOneSafeError,
    TraceMonoid,
    UniformMeasure,
    build_system,
    parse_net,
    reachability_graph,
)
from tracenet.chain import build_chain
from tracenet.reference import FIG2_NET_DOC

SQRT2 = 2.0 ** 0.5
Q0 = SQRT2 - 1.0


@pytest.fixture(scope="session")
def fig2_net():
    return parse_net(json.dumps(FIG2_NET_DOC))


@pytest.fixture(scope="session")
def fig2_graph(fig2_net):
    return reachability_graph(fig2_net)


@pytest.fixture(scope="session")
def fig2_system(fig2_net, fig2_graph):
    return build_system(fig2_net, fig2_graph)


@pytest.fixture(scope="session")
def fig2_monoid(fig2_system):
    return fig2_system.monoid


@pytest.fixture(scope="session")
def fig2_measure(fig2_system):
    q0 = fig2_system.characteristic_root()
    return UniformMeasure(fig2_system, fig2_system.cocycle(q0))


@pytest.fixture(scope="session")
def fig2_chain(fig2_measure):
    return build_chain(fig2_measure, 0)


def example_monoid() -> TraceMonoid:
    return TraceMonoid(
        "abcde", [("a", "d"), ("a", "e"), ("b", "d"), ("b", "e"), ("c", "e")]
    )


def random_monoid(rng: random.Random, max_letters: int = 6) -> TraceMonoid:
    k = rng.randint(1, max_letters)
    letters = [chr(ord("a") + i) for i in range(k)]
    pairs = [
        (a, b)
        for i, a in enumerate(letters)
        for b in letters[i + 1:]
        if rng.random() < 0.4
    ]
    return TraceMonoid(letters, pairs)


def random_one_safe_net(rng: random.Random, max_transitions: int = 6):
    """Draw small nets until one passes the 1-safety check.

    Self-loop places are added freely, so most draws have live transitions
    and a decent share of distant pairs."""
    while True:
        n_places = rng.randint(2, 6)
        places = [f"p{i}" for i in range(n_places)]
        n_trans = rng.randint(1, max_transitions)
        transitions = []
        for i in range(n_trans):
            pre = rng.sample(places, rng.randint(1, min(2, n_places)))
            post = rng.sample(places, rng.randint(1, min(2, n_places)))
            transitions.append({"id": f"t{i}", "pre": pre, "post": post})
        marked = rng.sample(places, rng.randint(1, n_places))
        doc = {
            "places": places,
            "transitions": transitions,
            "initial_marking": marked,
        }
        net = parse_net(json.dumps(doc))
        try:
            graph = reachability_graph(net, max_states=4096)
        except NotOneSafeError:
            continue
        return net, graph
