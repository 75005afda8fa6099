"""Independent reference implementations used to verify the package.

Everything here is deliberately naive (exhaustive enumeration, dense DP)
and shares no code with the implementations under test.
"""

import itertools

from prosim.conformance import TASK, fire, firing_options


def levenshtein_reference(a, b):
    """Full-matrix DP edit distance."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + cost)
    return d[n][m]


def brute_force_assignment(cost):
    """Minimum total cost over all n! pairings (n <= 8)."""
    n = len(cost)
    best = None
    for perm in itertools.permutations(range(n)):
        total = sum(cost[i][perm[i]] for i in range(n))
        if best is None or total < best:
            best = total
    return best


def count_pairs_reference(traces):
    """Directly-follows counts by explicit pair enumeration."""
    counts = {}
    for seq in traces:
        path = ["__START__"] + list(seq) + ["__END__"]
        for k in range(len(path) - 1):
            key = (path[k], path[k + 1])
            counts[key] = counts.get(key, 0) + 1
    return counts


def brute_force_alignment_cost(graph, sequence, max_cost=12):
    """Exhaustive minimum alignment cost by iterative deepening on cost.

    Sync and silent-node moves are free, task model-skips and log skips cost
    one.  Revisiting a (position, marking) state on the same path is pruned,
    which is safe because every cycle costs at least one.  Intended for tiny
    instances only (trace <= 6, graph <= 8 nodes).
    """
    from prosim.conformance import initial_marking

    sequence = tuple(sequence)

    def feasible(i, marking, budget, path):
        if i == len(sequence) and not marking:
            return True
        state = (i, marking)
        if state in path:
            return False
        path = path | {state}
        for node_id, consumed, produced in firing_options(graph, marking):
            fired = fire(marking, consumed, produced)
            node = graph.node(node_id)
            if node.kind == TASK:
                if i < len(sequence) and node.label == sequence[i] \
                        and feasible(i + 1, fired, budget, path):
                    return True
                if budget >= 1 and feasible(i, fired, budget - 1, path):
                    return True
            elif feasible(i, fired, budget, path):
                return True
        if i < len(sequence) and budget >= 1 \
                and feasible(i + 1, marking, budget - 1, path):
            return True
        return False

    for budget in range(max_cost + 1):
        if feasible(0, initial_marking(graph), budget, frozenset()):
            return budget
    return None
