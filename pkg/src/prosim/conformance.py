"""Trace alignment, repair/replacement, timed replay, branching probabilities.

The process graph executes as a token game: edges hold tokens, tasks consume
their single in-token and produce on their out-edge, AND gateways fork/join
all branches, XOR gateways route one token.  Alignment searches the
synchronous product of a trace and the reachable markings with uniform-cost
search; gateway firings are silent (cost 0) while task skips and log skips
cost 1.
"""

import heapq
from collections import deque
from dataclasses import dataclass

from .discovery import AND_JOIN, AND_SPLIT, TASK, XOR_JOIN, XOR_SPLIT
from .errors import AlignmentBudgetError, ReplayError
from ._kernels import encode_sequences, levenshtein

SYNC = "sync"
MODEL_SKIP = "model_skip"
LOG_SKIP = "log_skip"

DEFAULT_STATE_BUDGET = 1_000_000


@dataclass(frozen=True)
class Alignment:
    """Minimum-cost mapping of a trace onto a graph firing sequence.

    moves: (kind, payload) tuples where sync/log_skip carry an activity
    label and model_skip carries a node id (gateway skips cost nothing,
    task skips cost one).
    """
    moves: tuple
    cost: int

    def sync_projection(self):
        return tuple(p for k, p in self.moves if k == SYNC)

    def log_projection(self):
        return tuple(p for k, p in self.moves if k in (SYNC, LOG_SKIP))


@dataclass(frozen=True)
class ActivityInstance:
    activity: str
    start: int
    end: int
    enablement: int
    processing: int
    waiting: int
    clamped: bool


@dataclass(frozen=True)
class ReplayResult:
    instances: tuple
    fitted: bool

    @property
    def clamped_count(self):
        return sum(1 for inst in self.instances if inst.clamped)


@dataclass(frozen=True)
class StochasticProcessModel:
    """Process graph whose XOR split out-edges carry traversal probabilities."""
    graph: object
    probs: dict  # split id -> {successor node id -> probability}

    def __post_init__(self):
        for split in self.graph.xor_splits():
            targets = sorted(self.graph.successors(split.id))
            dist = self.probs.get(split.id)
            if dist is None or sorted(dist) != targets:
                raise ValueError(
                    f"split '{split.id}' needs probabilities for exactly its "
                    f"successors {targets}")
            if any(p < 0 for p in dist.values()):
                raise ValueError(f"split '{split.id}' has a negative probability")
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(
                    f"split '{split.id}' probabilities sum to {total}, not 1")

    def to_json(self):
        doc = self.graph.to_json()
        doc["probabilities"] = {
            split: {t: p for t, p in sorted(dist.items())}
            for split, dist in sorted(self.probs.items())}
        return doc

    @classmethod
    def from_json(cls, doc):
        from .discovery import ProcessGraph, validate_graph
        graph = validate_graph(ProcessGraph.from_json(doc))
        probs = {s: dict(d) for s, d in doc.get("probabilities", {}).items()}
        return cls(graph, probs)


# --- token game -------------------------------------------------------------

def initial_marking(graph):
    """One token on the start node's out-edge."""
    return ((graph.out_edges(graph.start_id)[0], 1),)


def _add(counts, edge, k=1):
    counts[edge] = counts.get(edge, 0) + k
    if counts[edge] == 0:
        del counts[edge]


def _canon(counts):
    return tuple(sorted(counts.items()))


def firing_options(graph, marking):
    """Every (node_id, consumed_edges, produced_edges) fireable from marking.

    XOR joins yield one option per marked in-edge; XOR splits one option per
    out-edge; AND joins need every in-edge marked.  The end node only fires
    when its token is the last one, which makes firing it complete the case.
    """
    counts = dict(marking)
    options = []
    marked = set(counts)
    for n in graph.nodes:
        kind = n.kind
        if kind == "start":
            continue
        in_edges = graph.in_edges(n.id)
        out_edges = graph.out_edges(n.id)
        if kind in (TASK, XOR_JOIN):
            for e in in_edges:
                if e in marked:
                    options.append((n.id, (e,), tuple(out_edges)))
        elif kind == XOR_SPLIT:
            e = in_edges[0]
            if e in marked:
                for out in out_edges:
                    options.append((n.id, (e,), (out,)))
        elif kind == AND_SPLIT:
            e = in_edges[0]
            if e in marked:
                options.append((n.id, (e,), tuple(out_edges)))
        elif kind == AND_JOIN:
            if all(e in marked for e in in_edges):
                options.append((n.id, tuple(in_edges), tuple(out_edges)))
        elif kind == "end":
            e = in_edges[0]
            if e in marked and sum(counts.values()) == counts[e] == 1:
                options.append((n.id, (e,), ()))
    return options


def fire(marking, consumed, produced):
    counts = dict(marking)
    for e in consumed:
        if counts.get(e, 0) < 1:
            raise ReplayError(f"edge {e} has no token to consume")
        _add(counts, e, -1)
    for e in produced:
        _add(counts, e, 1)
    return _canon(counts)


def _label_of(graph, node_id):
    return graph.node(node_id).label


def find_firing_sequence(graph, sequence, state_budget=DEFAULT_STATE_BUDGET):
    """Firing records that execute exactly `sequence`, or None if unfittable.

    BFS over (position, marking) states using silent gateway firings plus
    synchronous task firings only.  Returns a list of
    (node_id, consumed, produced) records including the gateway firings.
    """
    sequence = tuple(sequence)
    start_state = (0, initial_marking(graph))
    parents = {start_state: None}
    queue = deque([start_state])
    goal = (len(sequence), ())
    while queue:
        if len(parents) > state_budget:
            return None
        state = queue.popleft()
        if state == goal:
            break
        i, marking = state
        for node_id, consumed, produced in firing_options(graph, marking):
            node = graph.node(node_id)
            if node.kind == TASK:
                if i >= len(sequence) or node.label != sequence[i]:
                    continue
                nxt = (i + 1, fire(marking, consumed, produced))
            else:
                nxt = (i, fire(marking, consumed, produced))
            if nxt not in parents:
                parents[nxt] = (state, (node_id, consumed, produced))
                queue.append(nxt)
    if goal not in parents:
        return None
    records = []
    cur = goal
    while parents[cur] is not None:
        prev, record = parents[cur]
        records.append(record)
        cur = prev
    records.reverse()
    return records


def replays(graph, sequence):
    return find_firing_sequence(graph, sequence) is not None


def is_completable(graph, state_budget=50_000):
    """Whether any firing sequence completes the token game.

    Structurally valid graphs can still deadlock behaviorally (an AND join
    starved by an earlier exclusive choice), which makes every alignment
    unsolvable.  Budget exhaustion counts as completable (benefit of the
    doubt on very wide graphs).
    """
    start = initial_marking(graph)
    seen = {start}
    stack = [start]
    while stack:
        if len(seen) > state_budget:
            return True
        marking = stack.pop()
        if not marking:
            return True
        for _, consumed, produced in firing_options(graph, marking):
            nxt = fire(marking, consumed, produced)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


# --- alignment --------------------------------------------------------------

def align_trace(graph, sequence, state_budget=DEFAULT_STATE_BUDGET):
    """Minimum-cost alignment via uniform-cost search over the product space.

    Sync moves and silent gateway firings cost 0; task model-skips and log
    skips cost 1.  Raises AlignmentBudgetError when the visited-state budget
    is exhausted (caller falls back to trace replacement).
    """
    sequence = tuple(sequence)
    start_state = (0, initial_marking(graph))
    dist = {start_state: 0}
    parents = {start_state: None}
    counter = 0
    heap = [(0, counter, start_state)]
    goal = None
    while heap:
        cost, _, state = heapq.heappop(heap)
        if cost > dist.get(state, float("inf")):
            continue
        i, marking = state
        if i == len(sequence) and not marking:
            goal = state
            break
        if len(dist) > state_budget:
            raise AlignmentBudgetError(
                f"alignment search exceeded {state_budget} states")

        def push(nxt, step_cost, move):
            nonlocal counter
            new_cost = cost + step_cost
            if new_cost < dist.get(nxt, float("inf")):
                dist[nxt] = new_cost
                parents[nxt] = (state, move)
                counter += 1
                heapq.heappush(heap, (new_cost, counter, nxt))

        for node_id, consumed, produced in firing_options(graph, marking):
            node = graph.node(node_id)
            fired = fire(marking, consumed, produced)
            if node.kind == TASK:
                if i < len(sequence) and node.label == sequence[i]:
                    push((i + 1, fired), 0, (SYNC, node.label))
                push((i, fired), 1, (MODEL_SKIP, node_id))
            else:
                push((i, fired), 0, (MODEL_SKIP, node_id))
        if i < len(sequence):
            push((i + 1, marking), 1, (LOG_SKIP, sequence[i]))
    if goal is None:
        raise ReplayError("graph has no path from start to end")
    moves = []
    cur = goal
    while parents[cur] is not None:
        prev, move = parents[cur]
        moves.append(move)
        cur = prev
    moves.reverse()
    return Alignment(tuple(moves), dist[goal])


def repair_trace(graph, alignment):
    """Drop log-skipped activities; fall back to the aligned model path.

    The sync-only projection is returned when it replays on the graph;
    otherwise the alignment's full model path (sync plus task model-skips)
    is returned, which replays by construction.
    """
    candidate = alignment.sync_projection()
    if candidate and replays(graph, candidate):
        return candidate
    model_path = tuple(
        _label_of(graph, p) if k == MODEL_SKIP else p
        for k, p in alignment.moves
        if k == SYNC or (k == MODEL_SKIP and graph.node(p).kind == TASK))
    return model_path


def replace_trace(sequence, conformant_pool):
    """Most similar pool member by label edit distance; ties keep pool order."""
    if not conformant_pool:
        raise ValueError("conformant pool is empty; use repair instead")
    encoded = encode_sequences([tuple(sequence)], [tuple(s) for s in conformant_pool])
    target = encoded[0][0]
    best, best_d = None, None
    for member, codes in zip(conformant_pool, encoded[1]):
        d = levenshtein(target, codes)
        if best_d is None or d < best_d:
            best, best_d = member, d
    return tuple(best)


def make_conformant(graph, sequences, strategy, state_budget=DEFAULT_STATE_BUDGET):
    """Align every sequence and repair or replace the non-conformant ones.

    Returns (sequences, diagnostics).  Trace count is preserved.  With
    strategy='replace' and no conformant trace in the log, repair is used
    for all traces (recorded in the diagnostics).
    """
    if strategy not in ("repair", "replace"):
        raise ValueError(f"unknown non-conformance strategy '{strategy}'")
    alignments = {}
    conformant = []
    for seq in sequences:
        seq = tuple(seq)
        if seq in alignments:
            continue
        try:
            alignments[seq] = align_trace(graph, seq, state_budget)
        except AlignmentBudgetError:
            alignments[seq] = None
    for seq in sequences:
        a = alignments[tuple(seq)]
        if a is not None and a.cost == 0:
            conformant.append(tuple(seq))
    diagnostics = {"conformant": 0, "repaired": 0, "replaced": 0,
                   "replace_fallbacks": 0}
    out = []
    pool = list(dict.fromkeys(conformant))
    for seq in sequences:
        seq = tuple(seq)
        a = alignments[seq]
        if a is not None and a.cost == 0:
            diagnostics["conformant"] += 1
            out.append(seq)
        elif strategy == "replace" and pool:
            diagnostics["replaced"] += 1
            out.append(replace_trace(seq, pool))
        elif a is not None:
            if strategy == "replace":
                diagnostics["replace_fallbacks"] += 1
            diagnostics["repaired"] += 1
            out.append(repair_trace(graph, a))
        else:
            # Budget blown and nothing to copy: drop to the empty repair.
            diagnostics["repaired"] += 1
            out.append(tuple())
    out = [s for s in out if s]
    diagnostics["dropped_empty"] = len(sequences) - len(out)
    return out, diagnostics


# --- timed replay -----------------------------------------------------------

def replay_with_times(graph, trace, state_budget=DEFAULT_STATE_BUDGET):
    """Extract enablement/processing/waiting per activity instance.

    Tokens carry completion timestamps: a task's enablement is its in-token's
    timestamp, AND joins take the max over joined branches, and a fired task
    stamps its out-token with the event's end.  Raw negative waiting (start
    before enablement) is clamped to zero and flagged.
    """
    sequence = trace.activities()
    records = find_firing_sequence(graph, sequence, state_budget)
    if records is None:
        raise ReplayError(
            f"trace '{trace.case_id}' does not replay on the graph")
    case_start = trace.events[0].start
    tokens = {initial_marking(graph)[0][0]: [case_start]}
    instances = []
    event_iter = iter(trace.events)
    for node_id, consumed, produced in records:
        node = graph.node(node_id)
        stamps = []
        for e in consumed:
            bucket = tokens[e]
            bucket.sort()
            stamps.append(bucket.pop(0))
            if not bucket:
                del tokens[e]
        if node.kind == TASK:
            event = next(event_iter)
            enablement = stamps[0]
            raw_wait = event.start - enablement
            instances.append(ActivityInstance(
                activity=event.activity,
                start=event.start,
                end=event.end,
                enablement=enablement,
                processing=event.end - event.start,
                waiting=max(0, raw_wait),
                clamped=raw_wait < 0,
            ))
            out_stamp = event.end
        else:
            out_stamp = max(stamps) if stamps else case_start
        for e in produced:
            tokens.setdefault(e, []).append(out_stamp)
    return ReplayResult(tuple(instances), fitted=True)


# --- branching probabilities -------------------------------------------------

def compute_branching_probabilities(graph, sequences, mode="discovered"):
    """Annotate XOR splits with traversal probabilities.

    equiprobable: every out-edge of a split gets 1/k.  discovered: replay
    every sequence and divide per-edge traversal counts by the split's total;
    splits never reached fall back to equiprobable.
    """
    if mode not in ("equiprobable", "discovered"):
        raise ValueError(f"unknown branching mode '{mode}'")
    probs = {}
    splits = graph.xor_splits()
    counts = {s.id: {t: 0 for t in sorted(graph.successors(s.id))}
              for s in splits}
    if mode == "discovered":
        for seq in sequences:
            records = find_firing_sequence(graph, tuple(seq))
            if records is None:
                raise ReplayError(
                    "discovered branching mode requires conformant sequences")
            for node_id, _, produced in records:
                if node_id in counts:
                    target = graph.edges[produced[0]][1]
                    counts[node_id][target] += 1
    for split in splits:
        targets = sorted(graph.successors(split.id))
        total = sum(counts[split.id].values())
        if mode == "equiprobable" or total == 0:
            probs[split.id] = {t: 1.0 / len(targets) for t in targets}
        else:
            probs[split.id] = {t: counts[split.id][t] / total for t in targets}
    return StochasticProcessModel(graph, probs)
