export type NodeKind =
  | "task"
  | "xor_split"
  | "xor_join"
  | "and_split"
  | "and_join"
  | "start"
  | "end";

export interface ModelNode {
  id: string;
  kind: NodeKind;
  label: string | null;
}

export interface ModelEdge {
  source: string;
  target: string;
}

/** The editable model document served by GET /model. */
export interface ModelDoc {
  nodes: ModelNode[];
  edges: ModelEdge[];
  probabilities: Record<string, Record<string, number>>;
}

export interface RunMetrics {
  mae_s: number;
  emd: number;
  cfls: number;
  histogram: number[];
  reference_histogram: number[];
}

export interface RunStatus {
  run_id: string;
  status: "pending" | "done" | "error";
  detail: string | null;
}

/** One what-if scenario: a model snapshot plus the runs scored against it. */
export interface Scenario {
  name: string;
  model: ModelDoc;
  runs: { runId: string; metrics: RunMetrics }[];
}
