import type { ModelDoc } from "./types.js";

export interface NodeBox {
  id: string;
  x: number;
  y: number;
  width: number;
  height: number;
  layer: number;
}

export const NODE_WIDTH = 110;
export const NODE_HEIGHT = 36;
export const GATEWAY_SIZE = 30;
const GAP_X = 70;
const GAP_Y = 24;

/**
 * Layered left-to-right layout: layer = longest path from start computed on
 * the acyclic part of the graph (back edges ignored), nodes inside a layer
 * ordered by the mean position of their predecessors to cut crossings.
 */
export function layoutModel(doc: ModelDoc): Map<string, NodeBox> {
  const ids = doc.nodes.map((n) => n.id);
  const index = new Map(ids.map((id, i) => [id, i]));
  const out = new Map<string, string[]>(ids.map((id) => [id, []]));
  for (const e of doc.edges) out.get(e.source)?.push(e.target);

  // Longest path from start over forward edges (DFS order breaks cycles).
  const layer = new Map<string, number>();
  const onStack = new Set<string>();
  const visit = (id: string, depth: number) => {
    if (onStack.has(id)) return; // back edge: keep the earlier layer
    if ((layer.get(id) ?? -1) >= depth) return;
    layer.set(id, depth);
    onStack.add(id);
    for (const next of out.get(id) ?? []) visit(next, depth + 1);
    onStack.delete(id);
  };
  const start = doc.nodes.find((n) => n.kind === "start");
  visit(start ? start.id : ids[0], 0);
  for (const id of ids) if (!layer.has(id)) layer.set(id, 0);
  const end = doc.nodes.find((n) => n.kind === "end");
  if (end) {
    const deepest = Math.max(...ids.map((id) => layer.get(id) ?? 0));
    layer.set(end.id, deepest);
  }

  // Order within layers by mean predecessor order, then stable by id.
  const preds = new Map<string, string[]>(ids.map((id) => [id, []]));
  for (const e of doc.edges) preds.get(e.target)?.push(e.source);
  const layers = new Map<number, string[]>();
  for (const id of ids) {
    const l = layer.get(id) ?? 0;
    if (!layers.has(l)) layers.set(l, []);
    layers.get(l)?.push(id);
  }
  const order = new Map<string, number>();
  const sortedLayers = [...layers.keys()].sort((a, b) => a - b);
  for (const l of sortedLayers) {
    const members = layers.get(l) ?? [];
    members.sort((a, b) => {
      const rank = (id: string) => {
        const ps = (preds.get(id) ?? []).map((p) => order.get(p) ?? 0);
        return ps.length
          ? ps.reduce((s, v) => s + v, 0) / ps.length
          : index.get(id) ?? 0;
      };
      const d = rank(a) - rank(b);
      return d !== 0 ? d : a.localeCompare(b);
    });
    members.forEach((id, i) => order.set(id, i));
  }

  const boxes = new Map<string, NodeBox>();
  for (const node of doc.nodes) {
    const l = layer.get(node.id) ?? 0;
    const row = order.get(node.id) ?? 0;
    const isTask = node.kind === "task";
    const w = isTask ? NODE_WIDTH : GATEWAY_SIZE;
    const h = isTask ? NODE_HEIGHT : GATEWAY_SIZE;
    boxes.set(node.id, {
      id: node.id,
      x: 20 + l * (NODE_WIDTH + GAP_X) + (NODE_WIDTH - w) / 2,
      y: 20 + row * (NODE_HEIGHT + GAP_Y) + (NODE_HEIGHT - h) / 2,
      width: w,
      height: h,
      layer: l,
    });
  }
  return boxes;
}

export function diagramSize(boxes: Map<string, NodeBox>): { width: number; height: number } {
  let width = 0;
  let height = 0;
  for (const box of boxes.values()) {
    width = Math.max(width, box.x + box.width + 40);
    height = Math.max(height, box.y + box.height + 40);
  }
  return { width, height };
}
