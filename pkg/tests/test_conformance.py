import numpy as np
import pytest

from prosim.conformance import (StochasticProcessModel, align_trace,
                                compute_branching_probabilities, make_conformant,
                                repair_trace, replace_trace, replay_with_times,
                                replays)
from prosim.discovery import DiscoveryParams, Node, ProcessGraph, discover
from prosim.errors import ReplayError
from prosim.log import Event, Trace

from conftest import variants_log
from oracles import brute_force_alignment_cost


def linear_graph(labels):
    nodes = [Node("start", "start"), Node("end", "end")] + \
            [Node(f"task:{l}", "task", l) for l in labels]
    edges = [("start", f"task:{labels[0]}")]
    for a, b in zip(labels, labels[1:]):
        edges.append((f"task:{a}", f"task:{b}"))
    edges.append((f"task:{labels[-1]}", "end"))
    return ProcessGraph(nodes, edges)


def and_graph():
    """A -> (B parallel C) -> D."""
    nodes = [Node("start", "start"), Node("end", "end"),
             Node("task:A", "task", "A"), Node("task:B", "task", "B"),
             Node("task:C", "task", "C"), Node("task:D", "task", "D"),
             Node("split", "and_split"), Node("join", "and_join")]
    edges = [("start", "task:A"), ("task:A", "split"),
             ("split", "task:B"), ("split", "task:C"),
             ("task:B", "join"), ("task:C", "join"),
             ("join", "task:D"), ("task:D", "end")]
    return ProcessGraph(nodes, edges)


def test_align_conformant_costs_zero():
    graph = linear_graph("ABC")
    alignment = align_trace(graph, ("A", "B", "C"))
    assert alignment.cost == 0
    assert alignment.sync_projection() == ("A", "B", "C")


def test_align_model_skip():
    alignment = align_trace(linear_graph("ABC"), ("A", "C"))
    assert alignment.cost == 1
    skipped = [p for k, p in alignment.moves
               if k == "model_skip" and p.startswith("task:")]
    assert skipped == ["task:B"]


def test_align_log_skip():
    alignment = align_trace(linear_graph("AB"), ("A", "X", "B"))
    assert alignment.cost == 1
    assert ("log_skip", "X") in alignment.moves


def _random_small_instance(rng):
    variants = [tuple("ABD"), tuple("ACD"), tuple("ABCD"), tuple("AD")]
    chosen = [variants[int(rng.integers(len(variants)))]
              for _ in range(int(rng.integers(2, 5)))]
    log = variants_log([(v, 1) for v in set(chosen)])
    graph = discover(log, DiscoveryParams(float(rng.random()),
                                          float(rng.random())))
    length = int(rng.integers(1, 7))
    trace = tuple("ABCDX"[int(rng.integers(5))] for _ in range(length))
    return graph, trace


def test_align_matches_exhaustive_oracle():
    rng = np.random.default_rng(3)
    for _ in range(40):
        graph, trace = _random_small_instance(rng)
        expected = brute_force_alignment_cost(graph, trace)
        assert expected is not None
        assert align_trace(graph, trace).cost == expected


def test_repair_projection_cases():
    graph = linear_graph("AB")
    alignment = align_trace(graph, ("A", "X", "B"))
    assert repair_trace(graph, alignment) == ("A", "B")

    conformant = align_trace(graph, ("A", "B"))
    assert repair_trace(graph, conformant) == ("A", "B")

    # Model skip mid-trace: sync projection does not replay, model path does.
    abc = linear_graph("ABC")
    alignment = align_trace(abc, ("A", "C"))
    repaired = repair_trace(abc, alignment)
    assert replays(abc, repaired)
    assert repaired == ("A", "B", "C")


def test_replace_cases():
    pool = [("A", "B"), ("A", "B", "C", "D")]
    assert replace_trace(("A", "B"), pool) == ("A", "B")
    assert replace_trace(("A", "B", "C"), pool) == ("A", "B")  # tie -> first
    assert replace_trace(("Z",), [("A", "B")]) == ("A", "B")
    with pytest.raises(ValueError):
        replace_trace(("A",), [])


def test_replay_sequential_waiting():
    graph = linear_graph("AB")
    trace = Trace.from_events("c", [
        Event("A", 36000, 36000 + 600),   # ends 10:10
        Event("B", 36000 + 900, 36000 + 1200),  # starts 10:15
    ])
    result = replay_with_times(graph, trace)
    a, b = result.instances
    assert a.waiting == 0 and a.enablement == 36000
    assert b.enablement == 36600
    assert b.waiting == 300
    assert b.processing == 300


def test_replay_and_join_max():
    graph = and_graph()
    t0 = 0
    trace = Trace.from_events("c", [
        Event("A", t0, t0 + 60),
        Event("B", t0 + 60, 36000),        # branch ends 10:00
        Event("C", t0 + 60, 36000 + 1200),  # branch ends 10:20
        Event("D", 36000 + 1800, 36000 + 2400),  # starts 10:30
    ])
    result = replay_with_times(graph, trace)
    d = result.instances[-1]
    assert d.enablement == 36000 + 1200
    assert d.waiting == 600


def test_replay_clamps_negative_waiting():
    graph = linear_graph("AB")
    trace = Trace.from_events("c", [
        Event("A", 0, 1000),
        Event("B", 500, 1500),  # starts before A ends
    ])
    result = replay_with_times(graph, trace)
    b = result.instances[1]
    assert b.waiting == 0
    assert b.clamped
    assert result.clamped_count == 1
    assert all(i.waiting >= 0 and i.processing >= 0 for i in result.instances)


def test_replay_error_on_nonfitting():
    with pytest.raises(ReplayError):
        replay_with_times(linear_graph("AB"),
                          Trace.from_events("c", [Event("B", 0, 1)]))


def xor_graph():
    log = variants_log([(("A", "B", "D"), 7), (("A", "C", "D"), 3)])
    return discover(log, DiscoveryParams(1.0, 0.0))


def test_branching_equiprobable():
    graph = xor_graph()
    model = compute_branching_probabilities(graph, [], mode="equiprobable")
    dist = list(model.probs.values())[0]
    assert sorted(dist.values()) == [0.5, 0.5]


def test_branching_discovered_counts():
    graph = xor_graph()
    seqs = [("A", "B", "D")] * 70 + [("A", "C", "D")] * 30
    model = compute_branching_probabilities(graph, seqs, mode="discovered")
    dist = model.probs[graph.xor_splits()[0].id]
    assert dist["task:B"] == pytest.approx(0.7)
    assert dist["task:C"] == pytest.approx(0.3)


def test_branching_unreached_split_falls_back():
    graph = xor_graph()
    model = compute_branching_probabilities(graph, [], mode="discovered")
    dist = list(model.probs.values())[0]
    assert sorted(dist.values()) == [0.5, 0.5]


def test_model_probability_invariants():
    graph = xor_graph()
    split = graph.xor_splits()[0].id
    with pytest.raises(ValueError, match="sum"):
        StochasticProcessModel(graph, {split: {"task:B": 0.6, "task:C": 0.5}})
    with pytest.raises(ValueError):
        StochasticProcessModel(graph, {split: {"task:B": 1.0}})


def test_make_conformant_full_fitness_and_counts():
    log = variants_log([(("A", "B", "D"), 5), (("A", "C", "D"), 3),
                        (("A", "X", "B", "D"), 2)])
    graph = discover(variants_log([(("A", "B", "D"), 5), (("A", "C", "D"), 3)]),
                     DiscoveryParams(1.0, 0.0))
    for strategy in ("repair", "replace"):
        out, diag = make_conformant(graph, log.sequences(), strategy)
        assert len(out) == len(log.traces)
        assert all(replays(graph, seq) for seq in out)
        if strategy == "replace":
            assert diag["replaced"] == 2
        else:
            assert diag["repaired"] == 2
        assert diag["conformant"] == 8
