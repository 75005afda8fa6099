"""Sequence generation from the stochastic model, CFLS, structure search.

Generation plays the token game: XOR splits sample an out-edge by their
annotated probabilities and, whenever several tasks are enabled at once
(parallel branches), the next one to fire is drawn uniformly.  CFLS scores a
generated bag against reference sequences as one minus the mean normalized
edit distance under an optimal pairing.
"""

import statistics
from dataclasses import dataclass

import numpy as np

from .assignment import min_cost_assignment
from .conformance import compute_branching_probabilities, firing_options, fire, \
    initial_marking, is_completable, make_conformant
from .discovery import DiscoveryParams, TASK, XOR_SPLIT, discover
from .errors import DiscoveryError, GenerationError, OptimizationError, ReplayError
from ._kernels import encode_sequences, normalized_distance_matrix
from .log import temporal_split

BASELINE_CONFIG = {"eta": 0.5, "epsilon": 0.5,
                   "branching": "equiprobable", "nonconformance": "repair"}


@dataclass(frozen=True)
class SequenceBag:
    sequences: tuple

    def __len__(self):
        return len(self.sequences)


def _simulate_once(model, rng, max_len, step_cap):
    """One token-game run; returns the label sequence or None on a dead run."""
    graph = model.graph
    marking = initial_marking(graph)
    seq = []
    steps = 0
    while True:
        steps += 1
        if steps > step_cap:
            return None
        options = firing_options(graph, marking)
        if not options:
            return None
        silent = [(n, c, p) for n, c, p in options
                  if graph.node(n).kind != TASK]
        if silent:
            silent.sort(key=lambda o: (o[0], o[1]))
            node_id, consumed, produced = silent[0]
            if graph.node(node_id).kind == XOR_SPLIT:
                targets = sorted(model.probs[node_id])
                weights = [model.probs[node_id][t] for t in targets]
                pick = targets[_weighted_choice(rng, weights)]
                produced = tuple(e for e in graph.out_edges(node_id)
                                 if graph.edges[e][1] == pick)
            marking = fire(marking, consumed, produced)
            if graph.node(node_id).kind == "end" and not marking:
                return seq
            continue
        tasks = sorted(options, key=lambda o: (o[0], o[1]))
        node_id, consumed, produced = tasks[int(rng.integers(len(tasks)))]
        seq.append(graph.node(node_id).label)
        if len(seq) > max_len:
            return None
        marking = fire(marking, consumed, produced)


def _weighted_choice(rng, weights):
    u = rng.random()
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def generate_sequences(model, n, max_len, seed):
    """Bag of n activity sequences sampled from the stochastic model.

    Runs exceeding max_len (or deadlocking) are discarded and regenerated;
    after 10n failed attempts a GenerationError is raised since the model is
    likely livelocked.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    step_cap = 10 * max_len + 100
    sequences = []
    attempts = 0
    while len(sequences) < n:
        if attempts >= 10 * n:
            raise GenerationError(
                f"could not generate {n} sequences within {10 * n} attempts; "
                f"model may livelock or exceed max_len={max_len}")
        attempts += 1
        seq = _simulate_once(model, rng, max_len, step_cap)
        if seq:
            sequences.append(tuple(seq))
    return SequenceBag(tuple(sequences))


def _pad_round_robin(items, size):
    out = list(items)
    i = 0
    while len(out) < size:
        out.append(items[i % len(items)])
        i += 1
    return out


def cfls(generated, reference):
    """Control-flow log similarity in [0, 1] under optimal trace pairing.

    Distances are Levenshtein over labels normalized by the longer sequence;
    unequal bag sizes are equalized by duplicating the smaller bag
    round-robin.  1.0 means the bags are identical as multisets.
    """
    gen = list(generated.sequences if isinstance(generated, SequenceBag)
               else generated)
    ref = [tuple(s) for s in reference]
    if not gen or not ref:
        raise ValueError("cfls needs two non-empty sequence collections")
    size = max(len(gen), len(ref))
    gen = _pad_round_robin(gen, size)
    ref = _pad_round_robin(ref, size)
    enc_gen, enc_ref = encode_sequences(gen, ref)
    dist = normalized_distance_matrix(enc_gen, enc_ref)
    rows, cols, total = min_cost_assignment(dist)
    return 1.0 - total / size


@dataclass(frozen=True)
class StructureConfig:
    eta: float
    epsilon: float
    branching: str
    nonconformance: str


def _sample_configs(trials, rng):
    configs = [StructureConfig(**BASELINE_CONFIG)]
    while len(configs) < trials:
        configs.append(StructureConfig(
            eta=float(rng.random()),
            epsilon=float(rng.random()),
            branching=("equiprobable", "discovered")[int(rng.integers(2))],
            nonconformance=("repair", "replace")[int(rng.integers(2))],
        ))
    return configs[:trials]


def optimize_structure(log, trials=15, runs_per_trial=5, seed=0, max_len=None):
    """Random search over (eta, epsilon, branching, nonconformance).

    The training fold is split 80/20 into train and validation; each sampled
    configuration discovers a model on train, generates runs_per_trial bags
    sized like the validation fold, and is scored by mean CFLS against the
    validation sequences.  A fixed baseline configuration is always included
    in the trial set.  Returns (best model, search report).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    train, validation = temporal_split(log, 0.8)
    if not validation.traces:
        raise ValueError("log too small to hold out a validation fold")
    val_seqs = validation.sequences()
    if max_len is None:
        max_len = max(2 * max(len(t.events) for t in train.traces), 10)
    rng = np.random.default_rng(seed)
    configs = _sample_configs(trials, rng)
    report = {"seed": seed, "trials": [], "runs_per_trial": runs_per_trial,
              "winner": None}
    best = None
    for idx, cfg in enumerate(configs):
        entry = {"trial": idx, "eta": cfg.eta, "epsilon": cfg.epsilon,
                 "branching": cfg.branching,
                 "nonconformance": cfg.nonconformance,
                 "cfls_runs": [], "cfls_mean": None, "cfls_stdev": None,
                 "error": None}
        try:
            graph = discover(train, DiscoveryParams(cfg.eta, cfg.epsilon))
            if not is_completable(graph):
                raise DiscoveryError(
                    "discovered model deadlocks before reaching its end node")
            sequences, diagnostics = make_conformant(
                graph, train.sequences(), cfg.nonconformance)
            if not sequences:
                raise DiscoveryError("no sequence survived conformance")
            model = compute_branching_probabilities(
                graph, sequences, cfg.branching)
            scores = []
            for run in range(runs_per_trial):
                bag = generate_sequences(
                    model, len(val_seqs), max_len,
                    seed=seed + 10_000 * (idx + 1) + run)
                scores.append(cfls(bag, val_seqs))
            entry["cfls_runs"] = scores
            entry["cfls_mean"] = statistics.fmean(scores)
            entry["cfls_stdev"] = (statistics.stdev(scores)
                                   if len(scores) > 1 else 0.0)
            entry["diagnostics"] = diagnostics
            if best is None or entry["cfls_mean"] > best[0]:
                best = (entry["cfls_mean"], idx, model)
        except (DiscoveryError, GenerationError, ReplayError, ValueError) as exc:
            entry["error"] = str(exc)
        report["trials"].append(entry)
    if best is None:
        raise OptimizationError("every structure trial failed",
                                trials=report["trials"])
    report["winner"] = best[1]
    return best[2], report
