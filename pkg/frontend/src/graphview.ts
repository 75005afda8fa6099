import { diagramSize, layoutModel } from "./layout.js";
import type { ModelDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const KIND_GLYPH: Record<string, string> = {
  xor_split: "×",
  xor_join: "×",
  and_split: "+",
  and_join: "+",
  start: "▶",
  end: "■",
};

export interface GraphViewHandlers {
  /** Called with the split id and its edited distribution when a badge is
   * committed; the caller issues the PUT and re-renders on success. */
  onProbabilityEdit(splitId: string, probs: Record<string, number>): void;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

/**
 * Render the model as a left-to-right SVG diagram.  XOR split edges carry
 * probability badges backed by <input> fields inside foreignObject; editing
 * one rebalances nothing locally - the full distribution is handed to the
 * edit handler and the service decides whether it is valid.
 */
export function renderGraph(
  container: HTMLElement,
  doc: ModelDoc,
  handlers: GraphViewHandlers,
): void {
  container.textContent = "";
  const boxes = layoutModel(doc);
  const { width, height } = diagramSize(boxes);
  const svg = svgEl("svg", {
    width: String(width),
    height: String(height),
    viewBox: `0 0 ${width} ${height}`,
    class: "graph",
  });

  for (const edge of doc.edges) {
    const a = boxes.get(edge.source);
    const b = boxes.get(edge.target);
    if (!a || !b) continue;
    const x1 = a.x + a.width;
    const y1 = a.y + a.height / 2;
    const x2 = b.x;
    const y2 = b.y + b.height / 2;
    const backEdge = x2 <= x1;
    const path = backEdge
      ? `M ${x1} ${y1} C ${x1 + 50} ${y1 - 60}, ${x2 - 50} ${y2 - 60}, ${x2} ${y2}`
      : `M ${x1} ${y1} C ${(x1 + x2) / 2} ${y1}, ${(x1 + x2) / 2} ${y2}, ${x2} ${y2}`;
    svg.appendChild(svgEl("path", { d: path, class: "edge" }));
  }

  for (const node of doc.nodes) {
    const box = boxes.get(node.id);
    if (!box) continue;
    const group = svgEl("g", { "data-node": node.id });
    if (node.kind === "task") {
      group.appendChild(svgEl("rect", {
        x: String(box.x), y: String(box.y),
        width: String(box.width), height: String(box.height),
        rx: "6", class: "task",
      }));
      const text = svgEl("text", {
        x: String(box.x + box.width / 2),
        y: String(box.y + box.height / 2 + 4),
        "text-anchor": "middle", class: "task-label",
      });
      text.textContent = node.label ?? node.id;
      group.appendChild(text);
    } else {
      const cx = box.x + box.width / 2;
      const cy = box.y + box.height / 2;
      const r = box.width / 2;
      const shape = node.kind === "start" || node.kind === "end"
        ? svgEl("circle", { cx: String(cx), cy: String(cy), r: String(r),
                            class: `gateway ${node.kind}` })
        : svgEl("rect", {
            x: String(cx - r), y: String(cy - r),
            width: String(2 * r), height: String(2 * r),
            transform: `rotate(45 ${cx} ${cy})`,
            class: `gateway ${node.kind}`,
          });
      group.appendChild(shape);
      const glyph = svgEl("text", {
        x: String(cx), y: String(cy + 4),
        "text-anchor": "middle", class: "gateway-glyph",
      });
      glyph.textContent = KIND_GLYPH[node.kind] ?? "?";
      group.appendChild(glyph);
    }
    svg.appendChild(group);
  }

  // Probability badges on XOR split out-edges.
  for (const [splitId, dist] of Object.entries(doc.probabilities)) {
    const a = boxes.get(splitId);
    if (!a) continue;
    for (const [target, p] of Object.entries(dist)) {
      const b = boxes.get(target);
      if (!b) continue;
      const x = (a.x + a.width + b.x) / 2 - 24;
      const y = (a.y + b.y + b.height) / 2 - 20;
      const fo = svgEl("foreignObject", {
        x: String(x), y: String(y), width: "52", height: "22",
      });
      const input = document.createElement("input");
      input.className = "prob-badge";
      input.value = p.toFixed(2);
      input.dataset.split = splitId;
      input.dataset.target = target;
      input.addEventListener("change", () => {
        const edited = { ...doc.probabilities[splitId] };
        edited[target] = Number(input.value);
        handlers.onProbabilityEdit(splitId, edited);
      });
      fo.appendChild(input);
      svg.appendChild(fo);
    }
  }

  container.appendChild(svg);
}
