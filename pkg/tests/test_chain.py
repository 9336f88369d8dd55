"""States-and-cliques chain: construction, lumping, sampling, validation."""

import json
import math

import numpy as np
import pytest

from tracenet import NumericError, UniformMeasure, build_system, parse_net, reachability_graph
from tracenet.chain import (
    SUPPORT_TOL,
    build_chain,
    clique_label,
    empirical_validation,
    initial_law,
    lumping_check,
    marking_mass_matrix,
    sample_execution,
)

SQRT2 = math.sqrt(2.0)

EXPECTED_PAIRS = (
    "M0,a", "M0,c", "M0,ad", "M0,ae", "M0,ce",
    "M1,b", "M1,d", "M1,e", "M1,bd", "M1,be",
)

ROW_M1_E = {"M1,d": 2 - SQRT2, "M1,e": SQRT2 - 1}
ROW_M0_A = {"M0,a": SQRT2 - 1, "M1,b": 2 - SQRT2}
ROW_M0_C = {
    "M0,a": 1.5 * SQRT2 - 2,
    "M0,ad": 1 - SQRT2 / 2,
    "M1,b": 3 - 2 * SQRT2,
    "M1,bd": SQRT2 - 1,
}
ROW_KAPPA_M0 = {
    "M0,a": 5 * SQRT2 - 7,
    "M0,ad": 3 - 2 * SQRT2,
    "M0,ae": 3 - 2 * SQRT2,
    "M1,b": 10 - 7 * SQRT2,
    "M1,bd": 3 * SQRT2 - 4,
    "M1,be": 3 * SQRT2 - 4,
}
ROW_KAPPA_M1 = {
    "M0,c": 3 - 2 * SQRT2,
    "M0,ce": 1.5 * SQRT2 - 2,
    "M1,d": SQRT2 - 1,
    "M1,e": 1 - SQRT2 / 2,
}


def _row(chain, label):
    i = chain.labels().index(label)
    return {
        chain.pair_label(chain.pairs[j]): float(v)
        for j, v in enumerate(chain.transitions[i])
        if v > 0
    }


def _assert_row(chain, label, expected):
    got = _row(chain, label)
    assert set(got) == set(expected), label
    for k, v in expected.items():
        assert abs(got[k] - v) <= 1e-9, (label, k)


def test_reachable_pairs(fig2_chain):
    assert fig2_chain.labels() == EXPECTED_PAIRS
    # d and e alone never start an execution from the initial marking
    assert "M0,d" not in fig2_chain.labels()
    assert "M0,e" not in fig2_chain.labels()


def test_transition_rows_closed_forms(fig2_chain):
    _assert_row(fig2_chain, "M0,a", ROW_M0_A)
    _assert_row(fig2_chain, "M0,c", ROW_M0_C)
    for label in ("M0,ad", "M0,ae", "M0,ce"):
        _assert_row(fig2_chain, label, ROW_KAPPA_M0)
    for label in ("M1,d", "M1,bd", "M1,be"):
        _assert_row(fig2_chain, label, ROW_KAPPA_M1)
    _assert_row(fig2_chain, "M1,e", ROW_M1_E)
    # the disputed row: after b only c can follow
    _assert_row(fig2_chain, "M1,b", {"M0,c": 1.0})


def test_rows_stochastic_and_supported(fig2_chain):
    monoid = fig2_chain.system.monoid
    sums = fig2_chain.transitions.sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) <= 1e-9
    assert np.min(fig2_chain.transitions) >= 0.0
    for i, (state, clique) in enumerate(fig2_chain.pairs):
        for j, value in enumerate(fig2_chain.transitions[i]):
            if value <= 0:
                continue
            nxt_state, nxt = fig2_chain.pairs[j]
            assert monoid.is_normal_pair(clique, nxt)
            assert fig2_chain.system.clique_action(state, nxt) == nxt_state


def test_initial_law(fig2_measure, fig2_chain):
    law = initial_law(fig2_measure, 0)
    labeled = {fig2_chain.pair_label(p): v for p, v in law.items()}
    assert abs(labeled["M1,b"] - (10 - 7 * SQRT2)) <= 1e-9
    assert "M0,ce" not in labeled  # c is blocked at the start
    assert abs(sum(law.values()) - 1.0) <= 1e-9
    by_index = {fig2_chain.pair_index[p]: v for p, v in law.items()}
    for i, v in enumerate(fig2_chain.initial_law):
        assert abs(v - by_index.get(i, 0.0)) <= 1e-12


def test_transitions_independent_of_start_state(fig2_measure, fig2_chain):
    other = build_chain(fig2_measure, 1)
    shared = set(fig2_chain.labels()) & set(other.labels())
    assert shared == set(EXPECTED_PAIRS)
    for label in shared:
        a = _row(fig2_chain, label)
        b = _row(other, label)
        assert set(a) == set(b)
        for k in a:
            assert abs(a[k] - b[k]) <= 1e-12


def test_every_transition_matches_oracle_conditional(fig2_measure, fig2_chain):
    system = fig2_measure.system
    monoid = system.monoid
    index = fig2_chain.pair_index
    for (state, clique), i in index.items():
        for prev in range(system.state_count):
            if system.clique_action(prev, clique) != state:
                continue
            law = fig2_measure.first_clique_law(prev)
            if law.weights[clique] <= SUPPORT_TOL:
                continue
            denom = fig2_measure.prefix_probability(prev, (clique,))
            for nxt in monoid.cliques():
                if not monoid.is_normal_pair(clique, nxt):
                    continue
                cond = fig2_measure.prefix_probability(prev, (clique, nxt)) / denom
                target = (system.clique_action(state, nxt), nxt)
                value = (
                    float(fig2_chain.transitions[i][index[target]])
                    if target in index
                    else 0.0
                )
                assert abs(cond - value) <= 1e-9, (prev, clique, nxt)


def test_no_continuation_only_for_genuine_breakage(fig2_chain):
    # every reachable pair has positive continuation mass by construction
    assert np.min(fig2_chain.transitions.sum(axis=1)) > 0.99


def test_lumping_demo(fig2_chain):
    result = lumping_check(fig2_chain)
    assert not result.lumpable
    assert ("M1,d", "M1,e") in result.witnesses
    # the initial-marking group does aggregate, matching (sqrt2-1, 2-sqrt2)
    mass, states = marking_mass_matrix(fig2_chain)
    m0_rows = [i for i, p in enumerate(fig2_chain.pairs) if p[0] == 0]
    for i in m0_rows:
        assert abs(mass[i][0] - (SQRT2 - 1)) <= 1e-9
        assert abs(mass[i][1] - (2 - SQRT2)) <= 1e-9


def test_lumping_single_marking():
    # two self-loops on a shared place: one marking, root 1/2
    doc = {
        "places": ["p"],
        "transitions": [
            {"id": "t", "pre": ["p"], "post": ["p"]},
            {"id": "u", "pre": ["p"], "post": ["p"]},
        ],
        "initial_marking": ["p"],
    }
    net = parse_net(json.dumps(doc))
    graph = reachability_graph(net)
    system = build_system(net, graph)
    um = UniformMeasure(system, system.cocycle(system.characteristic_root()))
    chain = build_chain(um, 0)
    result = lumping_check(chain)
    assert result.lumpable
    assert result.matrix.shape == (1, 1)
    assert abs(result.matrix[0][0] - 1.0) <= 1e-12


def test_chain_refuses_degenerate_root():
    doc = {
        "places": ["p", "q"],
        "transitions": [
            {"id": "a", "pre": ["p"], "post": ["p"]},
            {"id": "b", "pre": ["q"], "post": ["q"]},
        ],
        "initial_marking": ["p", "q"],
    }
    net = parse_net(json.dumps(doc))
    system = build_system(net, reachability_graph(net))
    um = UniformMeasure(system, system.cocycle(system.characteristic_root()))
    with pytest.raises(NumericError, match="root is at 1"):
        build_chain(um, 0)


def test_sampling_reproducible(fig2_chain):
    a = sample_execution(fig2_chain, 0, 25, seed=42)
    b = sample_execution(fig2_chain, 0, 25, seed=42)
    assert a == b
    c = sample_execution(fig2_chain, 0, 25, seed=43)
    assert a != c
    d = sample_execution(fig2_chain, 0, 25, seed=42, run_index=1)
    assert a != d


def test_sampling_rejects_zero_steps(fig2_chain):
    with pytest.raises(ValueError, match="steps"):
        sample_execution(fig2_chain, 0, 0, seed=1)


def test_samples_satisfy_invariants(fig2_net, fig2_graph, fig2_chain):
    monoid = fig2_chain.system.monoid
    for run in range(50):
        sample = sample_execution(fig2_chain, 0, 12, seed=99, run_index=run)
        cliques = sample.cliques()
        for g, h in zip(cliques, cliques[1:]):
            assert monoid.is_normal_pair(g, h)
        # marking evolution matches the action, step by step
        state = 0
        for clique, after in sample.steps:
            state = fig2_chain.system.clique_action(state, clique)
            assert state == after
        # the linearization is a firing sequence of the net
        marking = fig2_graph.markings[0]
        for name in sample.firing_sequence():
            assert fig2_net.enables(marking, name)
            marking = fig2_net.fire(marking, name)


def test_empirical_validation_passes(fig2_chain, fig2_measure):
    report = empirical_validation(fig2_chain, fig2_measure, 0, 2000, 2, seed=5)
    assert report.passed
    assert report.runs == 2000
    assert any(c.kind == "first_clique" for c in report.cells)
    assert any(c.kind == "depth2_prefix" for c in report.cells)
    assert "sigma" in report.note


def test_empirical_validation_detects_corrupted_root(fig2_chain, fig2_measure):
    bad = fig2_measure.with_root(fig2_measure.q0 + 0.02)
    report = empirical_validation(fig2_chain, bad, 0, 30000, 2, seed=5)
    depth1 = [c for c in report.cells if c.kind == "first_clique"]
    assert any(not c.ok for c in depth1)
    assert not report.passed


def test_empirical_validation_run_minimum(fig2_chain, fig2_measure):
    with pytest.raises(ValueError, match="1000"):
        empirical_validation(fig2_chain, fig2_measure, 0, 10, 2, seed=5)


def test_clique_label():
    assert clique_label(("a", "d")) == "ad"
    assert clique_label(("t1", "t2")) == "t1+t2"
