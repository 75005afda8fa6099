"""Command-line entry points: discover, train, simulate, evaluate, serve.

Exit codes: 0 success, 2 input/validation/configuration problems, 3
optimization or training failures.
"""

import argparse
import json
import sys

from .arrivals import extract_arrival_series, fit_multimodal, train_arrival_net
from .arrivals import ArrivalModel
from .conformance import compute_branching_probabilities, is_completable, \
    make_conformant
from .discovery import DiscoveryParams, discover
from .errors import DiscoveryError, FitError, LogConfigError, LogParseError, \
    LogValidationError, OptimizationError, ProsimError, StageError, TrainingError
from .log import format_timestamp, parse_timestamp, read_log, temporal_split, \
    write_log
from .nn import TrainConfig
from .pipeline import PipelineConfig
from .assembly import evaluate_logs, simulate_log
from .stochastic import optimize_structure
from .store import ProjectStore
from .times import build_time_dataset, conform_timed_log, pretrain_embeddings, \
    train_time_model
from .log import EventLog

EXIT_INPUT = 2
EXIT_OPTIMIZATION = 3


def _load_toml(path):
    import tomli
    with open(path, "rb") as fh:
        return tomli.load(fh)


def _config_from_args(args):
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(_load_toml(args.config))
    for key in ("seed", "trials", "runs_per_trial", "arrival_variant"):
        value = getattr(args, key.replace("runs_per_trial", "runs"), None) \
            if key == "runs_per_trial" else getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for key in ("time_units", "time_activations", "time_ngrams"):
        if key in overrides:
            overrides[key] = tuple(overrides[key])
    return PipelineConfig(**overrides)


def cmd_discover(args):
    log = read_log(args.log)
    store = ProjectStore(args.out)
    config = _config_from_args(args)
    trainval, test = temporal_split(log, config.split_ratio)
    if not test.traces:
        raise LogValidationError("log too small for a temporal split")
    store.write_log("train.csv", trainval)
    store.write_log("reference.csv", test)
    if args.eta is not None and args.epsilon is not None:
        graph = discover(trainval, DiscoveryParams(args.eta, args.epsilon))
        if not is_completable(graph):
            raise DiscoveryError(
                "discovered model deadlocks; tune eta/epsilon or use auto mode")
        sequences, _ = make_conformant(graph, trainval.sequences(),
                                       args.nonconformance)
        model = compute_branching_probabilities(graph, sequences,
                                                args.branching)
        report = {"mode": "fixed", "eta": args.eta, "epsilon": args.epsilon}
    else:
        model, report = optimize_structure(
            trainval, trials=config.trials,
            runs_per_trial=config.runs_per_trial, seed=config.seed)
    store.write_model(model, config.config_hash())
    store.write_json("structure_report.json", report, config.config_hash())
    print(f"model written to {store.path('model.json')}")
    return 0


def cmd_train(args):
    store = ProjectStore(args.project)
    for required in ("model.json", "train.csv"):
        if not store.has(required):
            print(f"error: missing {required}; run discover first",
                  file=sys.stderr)
            return EXIT_INPUT
    config = _config_from_args(args)
    trainval = store.read_log("train.csv")
    model = store.read_model(overlay=False)

    series = extract_arrival_series(trainval)
    if config.arrival_variant == "recurrent":
        arrival_model = train_arrival_net(
            series,
            config=TrainConfig(epochs=config.arrival_epochs,
                               batch_size=config.batch_size,
                               patience=min(config.patience,
                                            config.arrival_epochs),
                               seed=config.seed + 101,
                               learning_rate=config.learning_rate),
            units=config.arrival_units)
    else:
        table = fit_multimodal(series, min_samples=config.min_cell_samples)
        arrival_model = ArrivalModel("multimodal", table=table)
    store.write_arrival_model(arrival_model, config.config_hash())

    traces, diagnostics = conform_timed_log(model.graph, trainval)
    conformant = EventLog.from_traces(traces)
    embeddings = pretrain_embeddings(conformant, dim=config.embedding_dim,
                                     seed=config.seed + 202)
    grid = {"units": config.time_units,
            "activation": config.time_activations,
            "ngram": config.time_ngrams}
    datasets = {ng: build_time_dataset(model.graph, conformant, ng, embeddings)
                for ng in config.time_ngrams}
    time_model, report = train_time_model(
        datasets, embeddings, grid=grid, seed=config.seed + 303,
        epochs=config.time_epochs, batch_size=config.batch_size,
        patience=config.patience, learning_rate=config.learning_rate,
        max_examples=config.time_max_examples)
    store.write_time_model(time_model, config.config_hash())
    store.write_json("time_report.json",
                     dict(report, conformance=diagnostics),
                     config.config_hash())
    print(f"arrival and time models written to {store.root}")
    return 0


def _default_anchor(store):
    reference = store.read_log("reference.csv")
    return min(t.start for t in reference.traces)


def cmd_simulate(args):
    store = ProjectStore(args.project)
    for required in ("model.json", "arrival_model.json", "time_model.json"):
        if not store.has(required):
            print(f"error: missing {required}; run discover/train first",
                  file=sys.stderr)
            return EXIT_INPUT
    model = store.read_model()
    arrival_model = store.read_arrival_model()
    time_model = store.read_time_model()
    n = args.n
    if n is None:
        n = len(store.read_log("reference.csv").traces)
    start = parse_timestamp(args.start) if args.start else _default_anchor(store)
    trainval = store.read_log("train.csv")
    max_len = max(2 * max(len(t.events) for t in trainval.traces), 10)
    log = simulate_log(model, arrival_model, time_model, n,
                       seed=args.seed, max_len=max_len, start=start)
    write_log(log, args.out)
    print(f"simulated {n} cases starting {format_timestamp(start)} "
          f"-> {args.out}")
    return 0


def cmd_evaluate(args):
    simulated = read_log(args.simulated)
    reference = read_log(args.reference)
    report = evaluate_logs(simulated, reference)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_serve(args):
    import uvicorn
    from .service import create_app
    app = create_app(args.project)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prosim",
        description="Learn and simulate business-process models from event logs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="discover the stochastic process model")
    p.add_argument("log", help="input event log CSV")
    p.add_argument("--out", required=True, help="project directory")
    p.add_argument("--eta", type=float, help="fix parallelism sensitivity")
    p.add_argument("--epsilon", type=float, help="fix edge filter strength")
    p.add_argument("--branching", default="discovered",
                   choices=("equiprobable", "discovered"))
    p.add_argument("--nonconformance", default="repair",
                   choices=("repair", "replace"))
    p.add_argument("--trials", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="TOML file with PipelineConfig overrides")
    p.set_defaults(fn=cmd_discover)

    p = sub.add_parser("train", help="train arrival and time generators")
    p.add_argument("project", help="project directory from discover")
    p.add_argument("--arrival", dest="arrival_variant",
                   choices=("multimodal", "recurrent"))
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="TOML file with PipelineConfig overrides")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("simulate", help="generate a simulated event log CSV")
    p.add_argument("project")
    p.add_argument("-n", type=int, help="cases (default: reference fold size)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", help="ISO-8601 anchor for the first case")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("evaluate", help="score a simulated log against a reference")
    p.add_argument("simulated")
    p.add_argument("reference")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("serve", help="run the local what-if HTTP service")
    p.add_argument("project")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8642)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (LogParseError, LogConfigError, LogValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OptimizationError, TrainingError, DiscoveryError, FitError,
            StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZATION
    except ProsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
