"""Process-graph discovery from a directly-follows graph.

The procedure: count directly-follows relations, drop infrequent edges by a
quantile filter (re-adding each activity's strongest in/out edge so nodes
stay connected), detect concurrent activity pairs from bidirectional edge
balance, and assemble a gateway-structured graph where concurrent successor
groups fan out through AND-splits and alternatives through XOR-splits.
Parallelism sensitivity eta and filter strength epsilon are the two knobs
the structure search tunes.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DiscoveryError

START = "__START__"
END = "__END__"

TASK = "task"
XOR_SPLIT = "xor_split"
XOR_JOIN = "xor_join"
AND_SPLIT = "and_split"
AND_JOIN = "and_join"
NODE_KINDS = (TASK, XOR_SPLIT, XOR_JOIN, AND_SPLIT, AND_JOIN, "start", "end")
GATEWAY_KINDS = (XOR_SPLIT, XOR_JOIN, AND_SPLIT, AND_JOIN)


@dataclass(frozen=True)
class DiscoveryParams:
    eta: float = 0.5
    epsilon: float = 0.5

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class DFG:
    """Directly-follows counts over activities plus synthetic START/END."""
    nodes: frozenset
    edge_freq: tuple  # sorted ((source, target), count) pairs

    @classmethod
    def from_counts(cls, counts):
        nodes = {START, END}
        for (a, b) in counts:
            nodes.add(a)
            nodes.add(b)
        return cls(frozenset(nodes), tuple(sorted(counts.items())))

    def freq(self):
        return dict(self.edge_freq)

    def successors(self, node):
        return sorted({b for (a, b), _ in self.edge_freq if a == node})

    def predecessors(self, node):
        return sorted({a for (a, b), _ in self.edge_freq if b == node})

    def activities(self):
        return sorted(self.nodes - {START, END})


def build_dfg(log):
    """Count consecutive activity pairs per trace, with START/END borders."""
    if not log.traces:
        raise ValueError("cannot build a DFG from an empty log")
    counts = {}

    def bump(a, b):
        counts[(a, b)] = counts.get((a, b), 0) + 1

    for trace in log.traces:
        seq = trace.activities()
        bump(START, seq[0])
        for a, b in zip(seq, seq[1:]):
            bump(a, b)
        bump(seq[-1], END)
    return DFG.from_counts(counts)


def filter_dfg(dfg, epsilon):
    """Keep edges at or above the epsilon-quantile frequency.

    Afterwards each activity's single most frequent incoming and outgoing
    edge is re-added so no node is orphaned.  epsilon=0 is the identity.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    freq = dfg.freq()
    if not freq:
        return dfg
    threshold = float(np.quantile(np.array(list(freq.values()), dtype=float),
                                  epsilon))
    kept = {e: c for e, c in freq.items() if c >= threshold}
    # Strongest in/out per activity; ties broken by edge labels for determinism.
    for node in dfg.activities():
        incoming = [(c, a) for (a, b), c in freq.items() if b == node]
        outgoing = [(c, b) for (a, b), c in freq.items() if a == node]
        if incoming:
            c, a = max(incoming, key=lambda t: (t[0], t[1]))
            kept[(a, node)] = freq[(a, node)]
        if outgoing:
            c, b = max(outgoing, key=lambda t: (t[0], t[1]))
            kept[(node, b)] = freq[(node, b)]
    return DFG.from_counts(kept)


def detect_concurrency(dfg, eta):
    """Unordered pairs judged parallel: both directions seen, counts balanced.

    A pair qualifies when |f(a,b) - f(b,a)| / max(f(a,b), f(b,a)) <= 1 - eta,
    so eta=1 accepts only perfectly balanced pairs and eta=0 accepts any
    bidirectional pair.
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    freq = dfg.freq()
    pairs = set()
    for (a, b), f_ab in freq.items():
        if a in (START, END) or b in (START, END) or a == b:
            continue
        f_ba = freq.get((b, a))
        if f_ba is None:
            continue
        balance = abs(f_ab - f_ba) / max(f_ab, f_ba)
        if balance <= 1 - eta:
            pairs.add(tuple(sorted((a, b))))
    return frozenset(pairs)


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    label: str | None = None


class ProcessGraph:
    """Gateway-structured graph; immutable by convention after construction."""

    def __init__(self, nodes, edges):
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self._by_id = {n.id: n for n in self.nodes}
        self._out = {n.id: [] for n in self.nodes}
        self._in = {n.id: [] for n in self.nodes}
        for idx, (src, dst) in enumerate(self.edges):
            self._out[src].append(idx)
            self._in[dst].append(idx)
        starts = [n for n in self.nodes if n.kind == "start"]
        ends = [n for n in self.nodes if n.kind == "end"]
        self.start_id = starts[0].id if starts else None
        self.end_id = ends[0].id if ends else None

    def node(self, node_id):
        return self._by_id[node_id]

    def out_edges(self, node_id):
        return self._out[node_id]

    def in_edges(self, node_id):
        return self._in[node_id]

    def successors(self, node_id):
        return [self.edges[i][1] for i in self._out[node_id]]

    def predecessors(self, node_id):
        return [self.edges[i][0] for i in self._in[node_id]]

    def tasks(self):
        return [n for n in self.nodes if n.kind == TASK]

    def task_labels(self):
        return sorted(n.label for n in self.tasks())

    def xor_splits(self):
        return [n for n in self.nodes if n.kind == XOR_SPLIT]

    def to_json(self):
        return {
            "nodes": [{"id": n.id, "kind": n.kind, "label": n.label}
                      for n in self.nodes],
            "edges": [{"source": s, "target": t} for s, t in self.edges],
        }

    @classmethod
    def from_json(cls, doc):
        nodes = [Node(d["id"], d["kind"], d.get("label")) for d in doc["nodes"]]
        edges = [(d["source"], d["target"]) for d in doc["edges"]]
        return cls(nodes, edges)

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def validate_graph(graph):
    """Raise DiscoveryError on any structural invariant violation."""
    kinds = {}
    for n in graph.nodes:
        if n.kind not in NODE_KINDS:
            raise DiscoveryError(f"node '{n.id}' has unknown kind '{n.kind}'")
        kinds.setdefault(n.kind, []).append(n)
    ids = [n.id for n in graph.nodes]
    if len(set(ids)) != len(ids):
        raise DiscoveryError("duplicate node ids")
    if len(kinds.get("start", [])) != 1 or len(kinds.get("end", [])) != 1:
        raise DiscoveryError("graph must have exactly one start and one end")
    for src, dst in graph.edges:
        if src not in graph._by_id or dst not in graph._by_id:
            raise DiscoveryError(f"edge ({src}, {dst}) references unknown node")
    for n in graph.nodes:
        n_in = len(graph.in_edges(n.id))
        n_out = len(graph.out_edges(n.id))
        if n.kind == TASK and (n_in != 1 or n_out != 1):
            raise DiscoveryError(
                f"task '{n.id}' must have exactly one in and one out edge")
        if n.kind == "start" and (n_in != 0 or n_out != 1):
            raise DiscoveryError("start must have no in edges and one out edge")
        if n.kind == "end" and (n_out != 0 or n_in != 1):
            raise DiscoveryError("end must have one in edge and no out edges")
        if n.kind in (XOR_SPLIT, AND_SPLIT) and (n_out < 2 or n_in != 1):
            raise DiscoveryError(
                f"split '{n.id}' needs one in edge and at least two out edges")
        if n.kind in (XOR_JOIN, AND_JOIN) and (n_in < 2 or n_out != 1):
            raise DiscoveryError(
                f"join '{n.id}' needs at least two in edges and one out edge")
    # Reachability from start and co-reachability to end.
    fwd = {graph.start_id}
    stack = [graph.start_id]
    while stack:
        for nxt in graph.successors(stack.pop()):
            if nxt not in fwd:
                fwd.add(nxt)
                stack.append(nxt)
    bwd = {graph.end_id}
    stack = [graph.end_id]
    while stack:
        for prv in graph.predecessors(stack.pop()):
            if prv not in bwd:
                bwd.add(prv)
                stack.append(prv)
    for n in graph.nodes:
        if n.id not in fwd or n.id not in bwd:
            raise DiscoveryError(f"node '{n.id}' is not on a start-to-end path")
    return graph


def _concurrency_groups(members, concurrent):
    """Greedy maximal cliques over the concurrency relation, lexicographic."""
    remaining = sorted(members)
    groups = []
    while remaining:
        seed = remaining.pop(0)
        group = [seed]
        rest = []
        for cand in remaining:
            if all(tuple(sorted((cand, g))) in concurrent for g in group):
                group.append(cand)
            else:
                rest.append(cand)
        remaining = rest
        groups.append(group)
    return groups


def construct_graph(dfg, concurrent):
    """Assemble the gateway graph from a filtered DFG and concurrent pairs.

    Edges inside a concurrent pair are dropped, then each activity's
    successor set is partitioned into concurrency cliques: cliques of two or
    more fan out through an AND-split, and multiple groups are chosen among
    by an XOR-split.  A pair whose edge removal would leave either activity
    with no successor or no predecessor is demoted to sequential so the
    graph stays connected.  Join structure mirrors the splits on the
    predecessor side.  Raises DiscoveryError if any node ends up off a
    start-end path.
    """
    freq = dict(dfg.freq())
    out_deg = {}
    in_deg = {}
    for (a, b) in freq:
        out_deg[a] = out_deg.get(a, 0) + 1
        in_deg[b] = in_deg.get(b, 0) + 1
    kept_pairs = set()
    for a, b in sorted(concurrent):
        if (a, b) not in freq or (b, a) not in freq:
            continue
        if out_deg[a] < 2 or in_deg[a] < 2 or out_deg[b] < 2 or in_deg[b] < 2:
            continue  # removal would orphan a node; treat as sequential
        del freq[(a, b)]
        del freq[(b, a)]
        out_deg[a] -= 1
        out_deg[b] -= 1
        in_deg[a] -= 1
        in_deg[b] -= 1
        kept_pairs.add((a, b))
    concurrent = frozenset(kept_pairs)
    succ = {}
    pred = {}
    for (a, b) in freq:
        succ.setdefault(a, set()).add(b)
        pred.setdefault(b, set()).add(a)
    activities = dfg.activities()

    nodes = [Node("start", "start"), Node("end", "end")]
    for act in activities:
        nodes.append(Node(f"task:{act}", TASK, act))
    edges = []
    counter = {"n": 0}

    def gateway(kind):
        counter["n"] += 1
        node = Node(f"{kind}_{counter['n']}", kind)
        nodes.append(node)
        return node.id

    def exit_port(dfg_node):
        return "start" if dfg_node == START else f"task:{dfg_node}"

    def entry_port(dfg_node):
        return "end" if dfg_node == END else f"task:{dfg_node}"

    # Partition every node's predecessors into concurrency cliques.  Targets
    # whose partitions contain the same clique share one AND-join (they are
    # complete-bipartite with it by construction), so a choice between such
    # targets is made once, after the join, instead of independently on every
    # parallel branch (which would deadlock the token game).
    groups_of = {b: _concurrency_groups(sorted(pred.get(b, ())), concurrent)
                 for b in activities + [END]}
    bundles = {}  # clique (sorted tuple, len >= 2) -> sorted target list
    for b in activities + [END]:
        for group in groups_of[b]:
            if len(group) >= 2:
                bundles.setdefault(tuple(group), []).append(b)
    join_of = {gkey: gateway(AND_JOIN) for gkey in sorted(bundles)}

    # Entry structure per target: one arm per predecessor group; several
    # arms converge through an XOR-join.  Arms are keyed by their source:
    # ("direct", predecessor) or ("bundle", clique).
    entry = {}
    for b in activities + [END]:
        arms = [("bundle", tuple(g)) if len(g) >= 2 else ("direct", g[0])
                for g in groups_of[b]]
        if not arms:
            continue
        if len(arms) == 1:
            entry[(b, arms[0])] = entry_port(b)
        else:
            xor = gateway(XOR_JOIN)
            edges.append((xor, entry_port(b)))
            for arm in arms:
                entry[(b, arm)] = xor

    for gkey in sorted(bundles):
        targets = sorted(bundles[gkey])
        join = join_of[gkey]
        if len(targets) == 1:
            edges.append((join, entry[(targets[0], ("bundle", gkey))]))
        else:
            fan = gateway(XOR_SPLIT)
            edges.append((join, fan))
            for b in targets:
                edges.append((fan, entry[(b, ("bundle", gkey))]))

    # Exit structure per source: successors reached through a shared
    # AND-join collapse into one arm pointing at that join; the remaining
    # direct successors are partitioned into concurrency cliques (AND-split
    # per clique).  Multiple arms are chosen among by an XOR-split.
    for a in [START] + activities:
        succs = sorted(succ.get(a, ()))
        if not succs:
            continue
        direct = []
        bundle_arms = set()
        for b in succs:
            group = next(g for g in groups_of[b] if a in g)
            if len(group) >= 2:
                bundle_arms.add(tuple(group))
            else:
                direct.append(b)
        arms = [("group", g) for g in _concurrency_groups(direct, concurrent)]
        arms += [("join", gkey) for gkey in sorted(bundle_arms)]

        def attach(source_id, arm):
            kind, payload = arm
            if kind == "join":
                edges.append((source_id, join_of[payload]))
            elif len(payload) >= 2:
                split = gateway(AND_SPLIT)
                edges.append((source_id, split))
                for b in payload:
                    edges.append((split, entry[(b, ("direct", a))]))
            else:
                edges.append((source_id, entry[(payload[0], ("direct", a))]))

        if len(arms) == 1:
            attach(exit_port(a), arms[0])
        else:
            xor = gateway(XOR_SPLIT)
            edges.append((exit_port(a), xor))
            for arm in arms:
                attach(xor, arm)

    graph = ProcessGraph(nodes, edges)
    return validate_graph(graph)


def discover(log, params):
    """Full discovery chain: DFG, filter, concurrency, graph construction."""
    dfg = build_dfg(log)
    filtered = filter_dfg(dfg, params.epsilon)
    concurrent = detect_concurrency(filtered, params.eta)
    return construct_graph(filtered, concurrent)
