import { readFileSync } from "node:fs";
import { join } from "node:path";

import type { ModelDoc } from "../src/types.js";

export function serverBase(): string {
  const info = JSON.parse(readFileSync(
    join(__dirname, "..", ".test-artifacts", "server.json"), "utf-8"));
  return info.base as string;
}

/** The XOR split whose out-edges hit the given task ids. */
export function findSplitOver(doc: ModelDoc, labels: string[]): string {
  const wanted = new Set(labels.map((l) => `task:${l}`));
  for (const [splitId, dist] of Object.entries(doc.probabilities)) {
    const targets = new Set(Object.keys(dist));
    if (wanted.size === targets.size &&
        [...wanted].every((t) => targets.has(t))) {
      return splitId;
    }
  }
  throw new Error(`no split over ${labels.join(",")} in ${
    JSON.stringify(doc.probabilities)}`);
}

/** Parse a simulated log CSV into activity sequences per case. */
export function sequencesFromCsv(csv: string): Map<string, string[]> {
  const lines = csv.trim().split("\n");
  const header = lines[0].split(",");
  const caseIdx = header.indexOf("case_id");
  const actIdx = header.indexOf("activity");
  const cases = new Map<string, string[]>();
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    const caseId = cells[caseIdx];
    if (!cases.has(caseId)) cases.set(caseId, []);
    cases.get(caseId)?.push(cells[actIdx]);
  }
  return cases;
}

/** Minimal linear model document for layout/render unit tests. */
export function linearModel(labels: string[]): ModelDoc {
  const nodes = [
    { id: "start", kind: "start" as const, label: null },
    { id: "end", kind: "end" as const, label: null },
    ...labels.map((l) => ({ id: `task:${l}`, kind: "task" as const, label: l })),
  ];
  const chain = ["start", ...labels.map((l) => `task:${l}`), "end"];
  const edges = chain.slice(0, -1).map((source, i) => ({
    source,
    target: chain[i + 1],
  }));
  return { nodes, edges, probabilities: {} };
}
