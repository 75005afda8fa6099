import type { ApiClient } from "./api.js";
import type { ModelDoc, Scenario } from "./types.js";

/**
 * Scenario bookkeeping for the compare panel.  The "baseline" scenario is
 * the discovered model; every accepted edit starts (or extends) the
 * "edited" scenario.  Runs attach to whichever scenario's model was active
 * when they were started.
 */
export class ScenarioStore {
  scenarios: Scenario[] = [];

  constructor(private api: ApiClient) {}

  scenario(name: string, model: ModelDoc): Scenario {
    let found = this.scenarios.find((s) => s.name === name);
    if (!found) {
      found = { name, model, runs: [] };
      this.scenarios.push(found);
    } else {
      found.model = model;
    }
    return found;
  }

  /** Simulate against the service's current model and record the metrics. */
  async simulateInto(name: string, model: ModelDoc, n: number,
                     seed: number): Promise<Scenario> {
    const target = this.scenario(name, model);
    const { run_id: runId } = await this.api.simulate(n, seed);
    const metrics = await this.api.awaitRun(runId);
    target.runs.push({ runId, metrics });
    return target;
  }
}
