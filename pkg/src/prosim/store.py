"""On-disk project layout for discovered models, generators, and runs.

Layout under the project directory:

    train.csv, reference.csv      temporal folds of the input log
    model.json                    stochastic process model (base, read-only)
    overlay.json                  what-if edit history (latest edit wins)
    structure_report.json         structure-search report
    arrival_model.json[, arrival_net.bin]
    time_model.json, time_net.bin
    runs/<id>/simulated.csv, metrics.json

Every JSON artifact carries the config hash that produced it under _meta.
"""

import json
from pathlib import Path

from .arrivals import load_arrival_model, save_arrival_model
from .conformance import StochasticProcessModel
from .log import read_log, serialize_log
from .times import load_time_model, save_time_model


class ProjectStore:
    def __init__(self, directory):
        self.root = Path(directory)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name):
        return self.root / name

    def write_json(self, name, payload, config_hash=None):
        doc = dict(payload)
        if config_hash is not None:
            doc["_meta"] = {"config_hash": config_hash}
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def read_json(self, name):
        with open(self.path(name), "r", encoding="utf-8") as fh:
            return json.load(fh)

    def has(self, name):
        return self.path(name).exists()

    # --- logs ---------------------------------------------------------------

    def write_log(self, name, log):
        with open(self.path(name), "w", encoding="utf-8", newline="") as fh:
            fh.write(serialize_log(log))

    def read_log(self, name):
        return read_log(self.path(name))

    # --- models -------------------------------------------------------------

    def write_model(self, model, config_hash=None):
        self.write_json("model.json", model.to_json(), config_hash)

    def read_model(self, overlay=True):
        doc = self.read_json("model.json")
        if overlay and self.has("overlay.json"):
            edits = self.read_json("overlay.json").get("edits", [])
            if edits:
                doc = edits[-1]
        doc.pop("_meta", None)
        return StochasticProcessModel.from_json(doc)

    def write_arrival_model(self, model, config_hash=None):
        save_arrival_model(model, self.path("arrival_model.json"),
                           weights_path=self.path("arrival_net.bin"),
                           meta={"config_hash": config_hash})

    def read_arrival_model(self):
        return load_arrival_model(self.path("arrival_model.json"))

    def write_time_model(self, model, config_hash=None):
        save_time_model(model, self.path("time_model.json"),
                        self.path("time_net.bin"),
                        meta={"config_hash": config_hash})

    def read_time_model(self):
        return load_time_model(self.path("time_model.json"))

    # --- runs ---------------------------------------------------------------

    def run_dir(self, run_id):
        d = self.root / "runs" / str(run_id)
        d.mkdir(parents=True, exist_ok=True)
        return d

    def list_runs(self):
        runs_dir = self.root / "runs"
        if not runs_dir.exists():
            return []
        return sorted(p.name for p in runs_dir.iterdir() if p.is_dir())
