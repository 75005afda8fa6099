import type { ModelDoc, ModelNode } from "./types.js";

/** Deep copy so edits never mutate the base snapshot. */
export function cloneModel(doc: ModelDoc): ModelDoc {
  return JSON.parse(JSON.stringify(doc)) as ModelDoc;
}

export function taskLabels(doc: ModelDoc): string[] {
  return doc.nodes
    .filter((n) => n.kind === "task" && n.label)
    .map((n) => n.label as string)
    .sort();
}

export function xorSplitIds(doc: ModelDoc): string[] {
  return doc.nodes.filter((n) => n.kind === "xor_split").map((n) => n.id).sort();
}

/**
 * Return a copy with one split's branch probabilities replaced.  Values are
 * sent as-is: validation (sum to one, right targets) is the service's job.
 */
export function withBranchProbabilities(
  doc: ModelDoc,
  splitId: string,
  probs: Record<string, number>,
): ModelDoc {
  const next = cloneModel(doc);
  next.probabilities[splitId] = { ...probs };
  return next;
}

/**
 * Splice a new task onto an existing edge: source -> NEW -> old target.
 * Keeps every node's degree intact, so the edit passes structural
 * validation whenever the base model did.
 */
export function spliceActivity(
  doc: ModelDoc,
  label: string,
  edge: { source: string; target: string },
): ModelDoc {
  const next = cloneModel(doc);
  const id = `task:${label}`;
  if (next.nodes.some((n) => n.id === id)) {
    throw new Error(`model already contains a task '${label}'`);
  }
  const hit = next.edges.find(
    (e) => e.source === edge.source && e.target === edge.target,
  );
  if (!hit) {
    throw new Error(`no edge ${edge.source} -> ${edge.target} to splice into`);
  }
  const task: ModelNode = { id, kind: "task", label };
  next.nodes.push(task);
  const oldTarget = hit.target;
  hit.target = id;
  next.edges.push({ source: id, target: oldTarget });
  // A split's outgoing probability now points at the new task instead.
  const dist = next.probabilities[edge.source];
  if (dist && edge.target in dist) {
    dist[id] = dist[edge.target];
    delete dist[edge.target];
  }
  return next;
}

/** Task label directly upstream of an edge, walking back through gateways. */
function upstreamLabel(doc: ModelDoc, nodeId: string): string | null {
  const byId = new Map(doc.nodes.map((n) => [n.id, n]));
  const incoming = new Map<string, string[]>();
  for (const e of doc.edges) {
    const list = incoming.get(e.target) ?? [];
    list.push(e.source);
    incoming.set(e.target, list);
  }
  let current = nodeId;
  for (let hops = 0; hops < doc.nodes.length; hops++) {
    const node = byId.get(current);
    if (!node) return null;
    if (node.kind === "task") return node.label;
    if (node.kind === "start") return null;
    const sources = incoming.get(current) ?? [];
    if (!sources.length) return null;
    current = sources[0];
  }
  return null;
}

/**
 * Example traces for embedding a new activity at an insertion point: short
 * sequences placing the label next to its upstream neighbour and each
 * existing activity, which is what the embedding fit needs.
 */
export function makeExampleTraces(
  doc: ModelDoc,
  label: string,
  edge: { source: string; target: string },
  count: number,
): string[][] {
  const anchor = upstreamLabel(doc, edge.source);
  const labels = taskLabels(doc);
  const traces: string[][] = [];
  for (let i = 0; i < count; i++) {
    const partner = labels[i % labels.length];
    const trace = anchor ? [anchor, label, partner] : [label, partner];
    traces.push(trace);
  }
  return traces;
}
