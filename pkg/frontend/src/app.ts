import { ApiClient, ApiError } from "./api.js";
import { renderHistograms, renderMetricBars } from "./charts.js";
import { renderGraph } from "./graphview.js";
import { makeExampleTraces, spliceActivity, taskLabels,
         withBranchProbabilities } from "./model.js";
import { ScenarioStore } from "./scenario.js";
import type { ModelDoc } from "./types.js";

export interface AppElements {
  graph: HTMLElement;
  error: HTMLElement;
  bars: HTMLElement;
  histograms: HTMLElement;
  addForm: HTMLFormElement;
  simulateButton: HTMLButtonElement;
  resetButton: HTMLButtonElement;
  simulateCount: HTMLInputElement;
  simulateSeed: HTMLInputElement;
}

/**
 * Wires the what-if loop: view the graph, edit probabilities inline, add
 * activities, trigger simulations, and compare scenario metrics.  Model
 * edits are never applied optimistically - the view re-renders only from
 * what the service accepted.
 */
export class WhatIfApp {
  private model: ModelDoc | null = null;
  private edited = false;
  readonly store: ScenarioStore;

  constructor(private api: ApiClient, private ui: AppElements) {
    this.store = new ScenarioStore(api);
    ui.simulateButton.addEventListener("click", () => {
      void this.simulate();
    });
    ui.resetButton.addEventListener("click", () => {
      void this.reset();
    });
    ui.addForm.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitAddActivity();
    });
  }

  get currentModel(): ModelDoc | null {
    return this.model;
  }

  get scenarioName(): string {
    return this.edited ? "edited" : "baseline";
  }

  showError(message: string): void {
    this.ui.error.textContent = message;
    this.ui.error.classList.toggle("visible", message !== "");
  }

  async load(): Promise<void> {
    this.model = await this.api.getModel();
    this.showError("");
    this.render();
  }

  private render(): void {
    if (!this.model) return;
    renderGraph(this.ui.graph, this.model, {
      onProbabilityEdit: (splitId, probs) => {
        void this.editProbabilities(splitId, probs);
      },
    });
    renderMetricBars(this.ui.bars, this.store.scenarios);
    renderHistograms(this.ui.histograms, this.store.scenarios);
  }

  /** PUT the edited distribution; on 400 the message lands inline. */
  async editProbabilities(splitId: string,
                          probs: Record<string, number>): Promise<void> {
    if (!this.model) return;
    const candidate = withBranchProbabilities(this.model, splitId, probs);
    try {
      this.model = await this.api.putModel(candidate);
      this.edited = true;
      this.showError("");
    } catch (err) {
      this.showError(err instanceof ApiError
        ? `edit rejected: ${err.message}`
        : String(err));
    }
    this.render();
  }

  /** Add-activity flow: embed the label, then splice the task into the
   * model.  The insertion point is an existing edge. */
  async addActivity(label: string, edge: { source: string; target: string },
                    exampleCount: number): Promise<void> {
    if (!this.model) return;
    const examples = makeExampleTraces(this.model, label, edge, exampleCount);
    try {
      await this.api.addActivity(label, examples);
      const spliced = spliceActivity(this.model, label, edge);
      this.model = await this.api.putModel(spliced);
      this.edited = true;
      this.showError("");
    } catch (err) {
      this.showError(err instanceof ApiError
        ? `add activity failed: ${err.message}`
        : String(err));
    }
    this.render();
  }

  private async submitAddActivity(): Promise<void> {
    const data = new FormData(this.ui.addForm);
    const label = String(data.get("label") ?? "").trim();
    const edgeSpec = String(data.get("edge") ?? "");
    const [source, target] = edgeSpec.split("->").map((s) => s.trim());
    const count = Number(data.get("examples") ?? 5);
    if (!label || !source || !target) {
      this.showError("need a label and an edge like task:A -> task:B");
      return;
    }
    await this.addActivity(label, { source, target }, count);
  }

  async simulate(): Promise<void> {
    if (!this.model) return;
    const n = Number(this.ui.simulateCount.value || "100");
    const seed = Number(this.ui.simulateSeed.value || "0");
    this.ui.simulateButton.disabled = true;
    try {
      await this.store.simulateInto(this.scenarioName, this.model, n, seed);
      this.showError("");
    } catch (err) {
      this.showError(err instanceof ApiError
        ? `simulation failed: ${err.message}`
        : String(err));
    } finally {
      this.ui.simulateButton.disabled = false;
    }
    this.render();
  }

  async reset(): Promise<void> {
    this.model = await this.api.resetModel();
    this.edited = false;
    this.showError("");
    this.render();
  }
}

export function bootstrap(root: Document = document): WhatIfApp {
  const get = <T extends HTMLElement>(id: string) => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el as T;
  };
  const app = new WhatIfApp(new ApiClient(""), {
    graph: get("graph"),
    error: get("edit-error"),
    bars: get("metric-bars"),
    histograms: get("histograms"),
    addForm: get<HTMLFormElement>("add-activity-form"),
    simulateButton: get<HTMLButtonElement>("simulate-button"),
    resetButton: get<HTMLButtonElement>("reset-button"),
    simulateCount: get<HTMLInputElement>("simulate-count"),
    simulateSeed: get<HTMLInputElement>("simulate-seed"),
  });
  void app.load();
  return app;
}
