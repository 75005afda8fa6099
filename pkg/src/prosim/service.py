"""Local HTTP/JSON service exposing the model, simulation, and metrics.

Single-project, single-writer desk tool: model edits are validated against
the full structural invariants before they are accepted and are stored as an
overlay on the discovered model, so the original is always recoverable via
the reset endpoint.  Simulations run in a background worker; clients poll
the run status.
"""

import itertools
import threading
from concurrent.futures import ThreadPoolExecutor

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pathlib import Path

from .assembly import evaluate_logs, hour_of_week_histogram, simulate_log
from .conformance import StochasticProcessModel
from .errors import DiscoveryError, DuplicateActivityError, GenerationError, \
    UnknownActivityError
from .log import serialize_log
from .store import ProjectStore
from .times import extend_embedding


def _validate_model_doc(doc):
    try:
        return StochasticProcessModel.from_json(doc)
    except (DiscoveryError, ValueError, KeyError, TypeError) as exc:
        raise HTTPException(status_code=400,
                            detail=f"invalid model: {exc}") from exc


def create_app(project_dir):
    store = ProjectStore(project_dir)
    app = FastAPI(title="prosim what-if service")
    state = {
        "runs": {},
        "run_ids": itertools.count(1),
        "lock": threading.Lock(),
        "executor": ThreadPoolExecutor(max_workers=1),
        "time_model": None,
    }

    def current_model():
        return store.read_model(overlay=True)

    def time_model():
        if state["time_model"] is None:
            state["time_model"] = store.read_time_model()
        return state["time_model"]

    @app.get("/model")
    def get_model():
        return current_model().to_json()

    @app.put("/model")
    def put_model(doc: dict = Body(...)):
        model = _validate_model_doc(doc)
        with state["lock"]:
            overlay = (store.read_json("overlay.json")
                       if store.has("overlay.json") else {"edits": []})
            overlay["edits"].append(model.to_json())
            store.write_json("overlay.json", overlay)
        return model.to_json()

    @app.post("/model/reset")
    def reset_model():
        with state["lock"]:
            if store.has("overlay.json"):
                store.path("overlay.json").unlink()
        return current_model().to_json()

    @app.post("/model/activities")
    def add_activity(payload: dict = Body(...)):
        label = payload.get("label")
        examples = payload.get("example_traces", [])
        if not label:
            raise HTTPException(status_code=400, detail="missing 'label'")
        try:
            extended = extend_embedding(time_model(), label, examples)
        except DuplicateActivityError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        with state["lock"]:
            state["time_model"] = extended
            store.write_time_model(extended)
        return {"label": label, "dim": extended.embeddings.dim}

    def _execute_run(run_id, n, seed, arrival_variant):
        entry = state["runs"][run_id]
        try:
            model = current_model()
            arrival_model = store.read_arrival_model()
            if arrival_variant and arrival_model.variant != arrival_variant:
                raise GenerationError(
                    f"project has a '{arrival_model.variant}' arrival model, "
                    f"not '{arrival_variant}'")
            reference = store.read_log("reference.csv")
            trainval = store.read_log("train.csv")
            max_len = max(2 * max(len(t.events) for t in trainval.traces), 10)
            start = min(t.start for t in reference.traces)
            sim = simulate_log(model, arrival_model, time_model(), n,
                               seed=seed, max_len=max_len, start=start)
            metrics = evaluate_logs(sim, reference)
            metrics["histogram"] = [float(x) for x in hour_of_week_histogram(sim)]
            metrics["reference_histogram"] = [
                float(x) for x in hour_of_week_histogram(reference)]
            run_dir = store.run_dir(run_id)
            with open(run_dir / "simulated.csv", "w", encoding="utf-8",
                      newline="") as fh:
                fh.write(serialize_log(sim))
            import json
            with open(run_dir / "metrics.json", "w", encoding="utf-8") as fh:
                json.dump(metrics, fh, indent=2, sort_keys=True)
            entry.update(status="done", metrics=metrics)
        except UnknownActivityError as exc:
            entry.update(status="error", code=422, detail=str(exc))
        except Exception as exc:  # noqa: BLE001 - reported via polling
            entry.update(status="error", code=500, detail=str(exc))

    @app.post("/simulate")
    def post_simulate(payload: dict = Body(...)):
        n = payload.get("n")
        seed = payload.get("seed", 0)
        arrival_variant = payload.get("arrival_variant")
        if not isinstance(n, int) or n < 1:
            raise HTTPException(status_code=400,
                                detail="'n' must be a positive integer")
        # Unknown labels fail fast so the client sees 422 immediately.
        model = current_model()
        tm = time_model()
        missing = [l for l in model.graph.task_labels()
                   if l not in tm.embeddings]
        if missing:
            raise HTTPException(
                status_code=422,
                detail=f"activities without embeddings: {missing}; "
                       f"POST /model/activities first")
        with state["lock"]:
            run_id = str(next(state["run_ids"]))
            state["runs"][run_id] = {"status": "pending", "n": n, "seed": seed}
        state["executor"].submit(_execute_run, run_id, n, seed, arrival_variant)
        return {"run_id": run_id}

    def _run_or_404(run_id):
        entry = state["runs"].get(run_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no run '{run_id}'")
        return entry

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        entry = _run_or_404(run_id)
        return {"run_id": run_id, "status": entry["status"],
                "detail": entry.get("detail")}

    @app.get("/runs/{run_id}/metrics")
    def get_metrics(run_id: str):
        entry = _run_or_404(run_id)
        if entry["status"] == "pending":
            return JSONResponse(status_code=409,
                                content={"detail": "run still executing"})
        if entry["status"] == "error":
            return JSONResponse(status_code=entry.get("code", 500),
                                content={"detail": entry["detail"]})
        return entry["metrics"]

    @app.get("/runs/{run_id}/log")
    def get_log(run_id: str):
        entry = _run_or_404(run_id)
        if entry["status"] != "done":
            raise HTTPException(status_code=409,
                                detail=f"run is {entry['status']}")
        path = store.run_dir(run_id) / "simulated.csv"
        return PlainTextResponse(path.read_text(encoding="utf-8"),
                                 media_type="text/csv")

    ui_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")
    return app
