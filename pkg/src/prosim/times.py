"""Activity processing/waiting-time prediction with pretrained embeddings.

Training data comes from replaying conformant traces on the discovered
graph.  Each activity instance becomes one example: the window covers the
preceding instances' realized (scaled) times plus a context row for the
instance itself (label embedding and enablement calendar, time slots
zeroed), and the target is that instance's (processing, waiting) pair.  At
simulation time the same window is rolled forward on the model's own
predictions, so training and rollout see identical feature layouts.

Embeddings are trained separately on co-occurrence pairs with a logistic
dot-product objective, which is what lets a new activity be added later
without touching the predictive network.
"""

import json
import math
import zlib
from dataclasses import dataclass

import numpy as np

from .conformance import replay_with_times, replays
from .errors import DuplicateActivityError, ReplayError, TrainingError, \
    UnknownActivityError
from .log import SECONDS_PER_DAY, Trace, time_of_day, weekday_of
from .nn import LayerSpec, NetworkSpec, TrainConfig, forward, init_network, train

DEFAULT_GRID = {"units": (50, 100), "activation": ("tanh", "selu"),
                "ngram": (5, 10, 15)}


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict  # label -> np.ndarray(dim)

    def __contains__(self, label):
        return label in self.vectors

    def vector(self, label):
        try:
            return self.vectors[label]
        except KeyError:
            raise UnknownActivityError(
                f"activity '{label}' has no embedding; extend the table "
                f"first") from None

    def labels(self):
        return sorted(self.vectors)

    def to_json(self):
        return {"dim": self.dim,
                "vectors": {l: [float(v) for v in vec]
                            for l, vec in sorted(self.vectors.items())}}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["dim"], {l: np.array(v, dtype=np.float64)
                                for l, v in doc["vectors"].items()})


def _cooccurrence_pairs(sequences, max_distance=2):
    pairs = {}
    for seq in sequences:
        for i, a in enumerate(seq):
            for j in range(i + 1, min(i + max_distance + 1, len(seq))):
                b = seq[j]
                if a == b:
                    continue
                key = tuple(sorted((a, b)))
                pairs[key] = pairs.get(key, 0) + 1
    return pairs


def _train_vectors(vectors, trainable, positives, negatives, rng,
                   iterations=300, lr=0.1):
    """Logistic contrastive fit on dot products; only `trainable` rows move."""
    labels = sorted(vectors)
    index = {l: i for i, l in enumerate(labels)}
    V = np.stack([vectors[l] for l in labels])
    mask = np.zeros(len(labels))
    for l in trainable:
        mask[index[l]] = 1.0
    samples = [(index[a], index[b], w, 1.0) for (a, b), w in positives] + \
              [(index[a], index[b], w, -1.0) for (a, b), w in negatives]
    if not samples:
        return {l: V[index[l]] for l in labels}
    ii = np.array([s[0] for s in samples])
    jj = np.array([s[1] for s in samples])
    ww = np.array([s[2] for s in samples], dtype=np.float64)
    ss = np.array([s[3] for s in samples])
    total = ww.sum()
    for _ in range(iterations):
        dots = np.einsum("ij,ij->i", V[ii], V[jj])
        sig = 1.0 / (1.0 + np.exp(-ss * dots))
        coef = (ww * ss * (sig - 1.0) / total)[:, None]
        grad = np.zeros_like(V)
        np.add.at(grad, ii, coef * V[jj])
        np.add.at(grad, jj, coef * V[ii])
        V -= lr * grad * mask[:, None]
    return {l: V[index[l]].copy() for l in labels}


def default_embedding_dim(alphabet_size):
    return max(2, math.ceil(math.sqrt(alphabet_size)) + 1)


def pretrain_embeddings(log, dim=None, seed=0):
    """Map activity labels to vectors so co-occurring activities sit closer.

    Positive pairs are activities within distance 2 of each other in a
    trace; negatives are sampled uniformly from never-co-occurring pairs at
    a 2:1 negative:positive ratio.
    """
    alphabet = sorted(log.activity_alphabet)
    if len(alphabet) < 2:
        raise ValueError("need at least two activities to train embeddings")
    if dim is None:
        dim = default_embedding_dim(len(alphabet))
    if dim < 2:
        raise ValueError("embedding dim must be at least 2")
    rng = np.random.default_rng(seed)
    vectors = {l: rng.normal(0.0, 0.5, size=dim) for l in alphabet}
    positives = _cooccurrence_pairs(log.sequences())
    all_pairs = {tuple(sorted((a, b)))
                 for i, a in enumerate(alphabet) for b in alphabet[i + 1:]}
    negative_pool = sorted(all_pairs - set(positives))
    n_neg = min(len(negative_pool), 2 * max(1, len(positives)))
    if negative_pool and n_neg:
        chosen = rng.choice(len(negative_pool), size=n_neg,
                            replace=len(negative_pool) < n_neg)
        negatives = [(negative_pool[int(i)], 1) for i in chosen]
    else:
        negatives = []
    trained = _train_vectors(vectors, set(alphabet),
                             sorted(positives.items()), negatives, rng)
    return EmbeddingTable(dim, trained)


def extend_embedding_table(table, new_label, example_traces):
    """Fit one new vector against the frozen table from example traces."""
    if new_label in table:
        raise DuplicateActivityError(
            f"activity '{new_label}' already has an embedding")
    sequences = [tuple(s) for s in example_traces]
    if not any(new_label in s for s in sequences):
        raise ValueError(
            f"no example trace contains the new activity '{new_label}'")
    rng = np.random.default_rng(zlib.crc32(new_label.encode("utf-8")))
    vectors = {l: v.copy() for l, v in table.vectors.items()}
    vectors[new_label] = rng.normal(0.0, 0.5, size=table.dim)
    cooc = _cooccurrence_pairs(sequences)
    positives = sorted((pair, w) for pair, w in cooc.items()
                       if new_label in pair and pair[0] in vectors
                       and pair[1] in vectors)
    partners = {a if b == new_label else b for (a, b), _ in positives}
    negative_pool = sorted(set(table.vectors) - partners)
    n_neg = min(len(negative_pool), 2 * max(1, len(positives)))
    negatives = [(tuple(sorted((new_label, negative_pool[int(i)]))), 1)
                 for i in rng.choice(len(negative_pool), size=n_neg,
                                     replace=False)] if n_neg else []
    trained = _train_vectors(vectors, {new_label}, positives, negatives, rng)
    return EmbeddingTable(table.dim, trained)


# --- dataset -----------------------------------------------------------------

@dataclass(frozen=True)
class TimeDataset:
    windows: np.ndarray  # (N, ngram, features)
    targets: np.ndarray  # (N, 2) scaled (processing, waiting)
    max_processing: int
    max_waiting: int
    ngram: int
    feature_dim: int


def _step_row(dim, p_scaled, w_scaled, ts, embedding):
    row = np.zeros(3 + 7 + dim)
    row[0] = p_scaled
    row[1] = w_scaled
    row[2] = time_of_day(ts) / SECONDS_PER_DAY
    row[3 + weekday_of(ts)] = 1.0
    row[10:] = embedding
    return row


def conform_timed_log(graph, log):
    """Keep or repair traces so their timestamps replay on the graph.

    Non-replaying traces keep only the events an optimal alignment
    synchronizes (when that projection replays); traces needing model moves
    are dropped since their timestamps cannot be invented.  Returns
    (traces, diagnostics).
    """
    from .conformance import align_trace
    from .errors import AlignmentBudgetError
    kept = []
    diagnostics = {"conformant": 0, "repaired": 0, "dropped": 0}
    for trace in log.traces:
        seq = trace.activities()
        if replays(graph, seq):
            diagnostics["conformant"] += 1
            kept.append(trace)
            continue
        try:
            alignment = align_trace(graph, seq)
        except AlignmentBudgetError:
            diagnostics["dropped"] += 1
            continue
        synced = alignment.sync_projection()
        if synced and replays(graph, synced):
            sync_multiset = list(synced)
            events = []
            for event in trace.events:
                if event.activity in sync_multiset:
                    sync_multiset.remove(event.activity)
                    events.append(event)
            if tuple(e.activity for e in events) == synced:
                diagnostics["repaired"] += 1
                kept.append(Trace.from_events(f"{trace.case_id}", events))
                continue
        diagnostics["dropped"] += 1
    return kept, diagnostics


def build_time_dataset(graph, log, ngram, embeddings):
    """One training example per activity instance via timed replay.

    Raises ReplayError naming the first trace that does not replay; callers
    should pass traces through conform_timed_log first.
    """
    if ngram < 1:
        raise ValueError("ngram must be at least 1")
    replayed = []
    for trace in (log.traces if hasattr(log, "traces") else log):
        try:
            result = replay_with_times(graph, trace)
        except ReplayError:
            raise ReplayError(
                f"trace '{trace.case_id}' does not replay; repair or "
                f"replace it first") from None
        replayed.append(result.instances)
    max_p = max((inst.processing for insts in replayed for inst in insts),
                default=0)
    max_w = max((inst.waiting for insts in replayed for inst in insts),
                default=0)
    p_div = max(1, max_p)
    w_div = max(1, max_w)
    dim = embeddings.dim
    feature_dim = 3 + 7 + dim
    windows = []
    targets = []
    for insts in replayed:
        realized = []
        for j, inst in enumerate(insts):
            context = _step_row(dim, 0.0, 0.0, inst.enablement,
                                embeddings.vector(inst.activity))
            past = realized[max(0, j - (ngram - 1)):j]
            pad = [np.zeros(feature_dim)] * (ngram - 1 - len(past))
            windows.append(np.stack(pad + past + [context]))
            targets.append((inst.processing / p_div, inst.waiting / w_div))
            realized.append(_step_row(
                dim, inst.processing / p_div, inst.waiting / w_div,
                inst.start, embeddings.vector(inst.activity)))
    return TimeDataset(np.array(windows), np.array(targets),
                       max_p, max_w, ngram, feature_dim)


# --- model -------------------------------------------------------------------

@dataclass(frozen=True)
class TimeModel:
    network: object
    embeddings: EmbeddingTable
    max_processing: int
    max_waiting: int
    ngram: int

    def replace_embeddings(self, table):
        return TimeModel(self.network, table, self.max_processing,
                         self.max_waiting, self.ngram)


def _time_network_spec(units, activation, feature_dim, dropout=0.1):
    return NetworkSpec(
        (LayerSpec("lstm", units, activation, dropout_rate=dropout),
         LayerSpec("lstm", units, activation, dropout_rate=dropout),
         LayerSpec("dense", 2, "linear")),
        input_dim=feature_dim, output_dim=2)


def train_time_model(datasets, embeddings, grid=None, seed=0, epochs=200,
                     batch_size=32, patience=10, learning_rate=0.002,
                     max_examples=None):
    """Grid search over units x activation x ngram; lowest validation MAE wins.

    `datasets` maps each ngram in the grid to its TimeDataset; validation is
    the temporally last 20% of examples.  Returns (TimeModel, report) where
    the report lists every evaluated configuration.
    """
    grid = dict(DEFAULT_GRID if grid is None else grid)
    configs = [(u, act, ng) for u in grid["units"]
               for act in grid["activation"] for ng in grid["ngram"]]
    report = {"seed": seed, "configs": [], "winner": None}
    best = None
    for idx, (units, activation, ng) in enumerate(configs):
        entry = {"config": idx, "units": units, "activation": activation,
                 "ngram": ng, "val_mae": None, "error": None}
        dataset = datasets.get(ng)
        if dataset is None:
            raise ValueError(f"no dataset provided for ngram {ng}")
        X, Y = dataset.windows, dataset.targets
        if max_examples is not None and len(X) > max_examples:
            X, Y = X[-max_examples:], Y[-max_examples:]
        split = max(1, int(round(0.8 * len(X))))
        if split == len(X):
            split = len(X) - 1
        if split < 1:
            raise TrainingError("time dataset too small to split")
        cfg = TrainConfig(epochs=epochs, batch_size=batch_size,
                          patience=min(patience, epochs), seed=seed + idx,
                          learning_rate=learning_rate)
        try:
            net = init_network(
                _time_network_spec(units, activation, dataset.feature_dim),
                seed + idx)
            trained = train(net, (X[:split], Y[:split]), cfg,
                            validation=(X[split:], Y[split:]))
            val_mae = min(trained.train_history["val"])
            entry["val_mae"] = val_mae
            if best is None or val_mae < best[0]:
                best = (val_mae, idx, trained, dataset)
        except TrainingError as exc:
            entry["error"] = str(exc)
        report["configs"].append(entry)
    if best is None:
        raise TrainingError(
            f"every grid configuration diverged: {report['configs']}")
    report["winner"] = best[1]
    _, _, network, dataset = best
    model = TimeModel(network, embeddings, dataset.max_processing,
                      dataset.max_waiting, dataset.ngram)
    return model, report


def predict_times(model, sequence, case_start):
    """Iterative rollout: per-step (processing, waiting) in whole seconds.

    The window mirrors training: previously predicted scaled times with the
    calendar of the evolving clock, then the current step's context row.
    Negative raw predictions are clamped to zero.  Inference is
    deterministic.
    """
    labels = list(sequence)
    for label in labels:
        model.embeddings.vector(label)  # raises UnknownActivityError
    k = model.ngram
    dim = model.embeddings.dim
    feature_dim = 3 + 7 + dim
    realized = []
    out = []
    enablement = int(case_start)
    for j, label in enumerate(labels):
        context = _step_row(dim, 0.0, 0.0, enablement,
                            model.embeddings.vector(label))
        past = realized[max(0, j - (k - 1)):j]
        pad = [np.zeros(feature_dim)] * (k - 1 - len(past))
        window = np.stack(pad + past + [context])
        pred = forward(model.network, window)
        p_scaled = max(0.0, float(pred[0]))
        w_scaled = max(0.0, float(pred[1]))
        processing = int(round(p_scaled * model.max_processing))
        waiting = int(round(w_scaled * model.max_waiting))
        start = enablement + waiting
        realized.append(_step_row(
            dim,
            processing / max(1, model.max_processing),
            waiting / max(1, model.max_waiting),
            start, model.embeddings.vector(label)))
        out.append((processing, waiting))
        enablement = start + processing
    return out


def extend_embedding(model, new_label, example_traces):
    """Add one activity without touching the predictive network.

    The new vector is fit with all existing vectors frozen, so predictions
    for sequences that do not contain the new label are bit-identical
    before and after.
    """
    table = extend_embedding_table(model.embeddings, new_label, example_traces)
    return model.replace_embeddings(table)


# --- persistence -------------------------------------------------------------

def save_time_model(model, json_path, weights_path, meta=None):
    from .nn import save_model
    save_model(model.network, weights_path, meta=meta)
    doc = {
        "weights_file": str(weights_path),
        "embeddings": model.embeddings.to_json(),
        "scaling": {"max_processing": model.max_processing,
                    "max_waiting": model.max_waiting},
        "ngram": model.ngram,
        "_meta": meta or {},
    }
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def load_time_model(json_path):
    from .nn import load_model
    with open(json_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    network, _ = load_model(doc["weights_file"])
    return TimeModel(network, EmbeddingTable.from_json(doc["embeddings"]),
                     doc["scaling"]["max_processing"],
                     doc["scaling"]["max_waiting"], doc["ngram"])
