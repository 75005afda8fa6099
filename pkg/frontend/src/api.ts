import type { ModelDoc, RunMetrics, RunStatus } from "./types.js";

/** Error carrying the service's HTTP status and detail message. */
export class ApiError extends Error {
  status: number;
  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function raise(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

/**
 * Typed client for the what-if service.  The UI never computes metrics or
 * probabilities itself; every number on screen comes from these calls.
 */
export class ApiClient {
  constructor(private base: string = "") {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  getModel(): Promise<ModelDoc> {
    return this.json<ModelDoc>("/model");
  }

  putModel(doc: ModelDoc): Promise<ModelDoc> {
    return this.json<ModelDoc>("/model", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
  }

  resetModel(): Promise<ModelDoc> {
    return this.json<ModelDoc>("/model/reset", { method: "POST" });
  }

  addActivity(label: string, exampleTraces: string[][]): Promise<void> {
    return this.json("/model/activities", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ label, example_traces: exampleTraces }),
    });
  }

  simulate(n: number, seed: number): Promise<{ run_id: string }> {
    return this.json<{ run_id: string }>("/simulate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ n, seed }),
    });
  }

  runStatus(runId: string): Promise<RunStatus> {
    return this.json<RunStatus>(`/runs/${runId}`);
  }

  runMetrics(runId: string): Promise<RunMetrics> {
    return this.json<RunMetrics>(`/runs/${runId}/metrics`);
  }

  async runLog(runId: string): Promise<string> {
    const response = await fetch(`${this.base}/runs/${runId}/log`);
    if (!response.ok) await raise(response);
    return response.text();
  }

  /** Poll a run until it leaves the pending state, then fetch its metrics. */
  async awaitRun(runId: string, intervalMs = 250, timeoutMs = 120_000):
      Promise<RunMetrics> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
      const status = await this.runStatus(runId);
      if (status.status === "done") return this.runMetrics(runId);
      if (status.status === "error") {
        throw new ApiError(500, status.detail ?? "simulation failed");
      }
      await new Promise((r) => setTimeout(r, intervalMs));
    }
    throw new ApiError(408, `run ${runId} still pending after ${timeoutMs}ms`);
  }
}
