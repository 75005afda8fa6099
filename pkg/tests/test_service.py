import copy
import io
import time

import pytest
from fastapi.testclient import TestClient

from prosim.cli import main
from prosim.log import parse_log, write_log
from prosim.service import create_app
from prosim.store import ProjectStore

from conftest import make_ground_truth_log


@pytest.fixture(scope="module")
def project(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc_project")
    log, _ = make_ground_truth_log(80, seed=4)
    log_path = root / "input.csv"
    write_log(log, log_path)
    config = root / "config.toml"
    config.write_text(
        "trials = 4\nruns_per_trial = 2\ntime_units = [6]\n"
        "time_activations = ['tanh']\ntime_ngrams = [4]\n"
        "time_epochs = 8\narrival_epochs = 4\npatience = 4\n"
        "min_cell_samples = 5\n")
    project_dir = root / "proj"
    assert main(["discover", str(log_path), "--out", str(project_dir),
                 "--config", str(config)]) == 0
    assert main(["train", str(project_dir), "--arrival", "multimodal",
                 "--config", str(config)]) == 0
    return project_dir


@pytest.fixture
def client(project):
    app = create_app(project)
    with TestClient(app) as c:
        yield c
    overlay = ProjectStore(project).path("overlay.json")
    if overlay.exists():
        overlay.unlink()


def _wait_done(client, run_id, timeout=60):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get(f"/runs/{run_id}").json()
        if status["status"] != "pending":
            return status
        time.sleep(0.05)
    raise AssertionError("run did not finish in time")


def _first_split(doc):
    split_ids = {n["id"] for n in doc["nodes"] if n["kind"] == "xor_split"}
    assert split_ids, "fixture model has no XOR split"
    return sorted(split_ids)[0]


def test_get_model_shape(client):
    doc = client.get("/model").json()
    assert {"nodes", "edges", "probabilities"} <= set(doc)


def test_put_invalid_probabilities_is_400_naming_split(client):
    doc = client.get("/model").json()
    split = _first_split(doc)
    bad = copy.deepcopy(doc)
    targets = sorted(bad["probabilities"][split])
    bad["probabilities"][split] = {targets[0]: 0.6, targets[1]: 0.5}
    response = client.put("/model", json=bad)
    assert response.status_code == 400
    assert split in response.json()["detail"]
    # Nothing was persisted.
    assert client.get("/model").json() == doc


def test_put_valid_edit_round_trips(client):
    doc = client.get("/model").json()
    split = _first_split(doc)
    edited = copy.deepcopy(doc)
    targets = sorted(edited["probabilities"][split])
    edited["probabilities"][split] = {targets[0]: 0.8, targets[1]: 0.2}
    response = client.put("/model", json=edited)
    assert response.status_code == 200
    assert client.get("/model").json() == edited
    # Reset restores the discovered model.
    client.post("/model/reset")
    assert client.get("/model").json() == doc


def test_simulation_run_lifecycle(client):
    response = client.post("/simulate", json={"n": 12, "seed": 3})
    assert response.status_code == 200
    run_id = response.json()["run_id"]
    status = _wait_done(client, run_id)
    assert status["status"] == "done"
    metrics = client.get(f"/runs/{run_id}/metrics").json()
    assert {"mae_s", "emd", "cfls", "histogram",
            "reference_histogram"} <= set(metrics)
    assert len(metrics["histogram"]) == 168
    log_text = client.get(f"/runs/{run_id}/log").text
    log = parse_log(io.BytesIO(log_text.encode("utf-8")))
    assert len(log.traces) == 12


def test_simulate_validates_body(client):
    assert client.post("/simulate", json={"n": 0}).status_code == 400
    assert client.post("/simulate", json={}).status_code == 400
    assert client.get("/runs/does-not-exist").status_code == 404


def test_service_and_cli_produce_identical_logs(client, project, tmp_path):
    run_id = client.post("/simulate", json={"n": 9, "seed": 17}).json()["run_id"]
    _wait_done(client, run_id)
    service_csv = client.get(f"/runs/{run_id}/log").text
    out = tmp_path / "cli.csv"
    assert main(["simulate", str(project), "-n", "9", "--seed", "17",
                 "--out", str(out)]) == 0
    assert out.read_text() == service_csv


def test_add_activity_then_simulate_contains_it(client):
    doc = client.get("/model").json()
    # Splice NEW after task A: retarget A's outgoing edge through the task.
    a_id = next(n["id"] for n in doc["nodes"]
                if n["kind"] == "task" and n["label"] == "A")
    edited = copy.deepcopy(doc)
    edited["nodes"].append({"id": "task:NEW", "kind": "task", "label": "NEW"})
    out_edge = next(e for e in edited["edges"] if e["source"] == a_id)
    old_target = out_edge["target"]
    out_edge["target"] = "task:NEW"
    edited["edges"].append({"source": "task:NEW", "target": old_target})

    # Without an embedding the simulation is refused.
    assert client.put("/model", json=edited).status_code == 200
    refused = client.post("/simulate", json={"n": 3, "seed": 0})
    assert refused.status_code == 422

    added = client.post("/model/activities", json={
        "label": "NEW",
        "example_traces": [["A", "NEW", "B"], ["A", "NEW", "C"]]})
    assert added.status_code == 200
    duplicate = client.post("/model/activities", json={
        "label": "NEW", "example_traces": [["A", "NEW"]]})
    assert duplicate.status_code == 409

    run_id = client.post("/simulate", json={"n": 5, "seed": 2}).json()["run_id"]
    status = _wait_done(client, run_id)
    assert status["status"] == "done"
    log_text = client.get(f"/runs/{run_id}/log").text
    log = parse_log(io.BytesIO(log_text.encode("utf-8")))
    assert all("NEW" in t.activities() for t in log.traces)
