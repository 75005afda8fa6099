import type { Scenario } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PALETTE = ["#3572b0", "#d9822b", "#3d9970", "#b05ab0", "#888888"];

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function meanOf(values: number[]): number {
  return values.length ? values.reduce((s, v) => s + v, 0) / values.length : 0;
}

/**
 * Side-by-side bars of mean MAE/EMD/CFLS per scenario.  All numbers come
 * from service metric responses; nothing is computed here beyond means of
 * already-reported run values.
 */
export function renderMetricBars(container: HTMLElement,
                                 scenarios: Scenario[]): void {
  container.textContent = "";
  const scored = scenarios.filter((s) => s.runs.length > 0);
  if (!scored.length) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No runs yet - simulate a scenario to compare.";
    container.appendChild(empty);
    return;
  }
  const metrics: (keyof Pick<Scenario["runs"][0]["metrics"],
                             "mae_s" | "emd" | "cfls">)[] =
    ["mae_s", "emd", "cfls"];
  for (const metric of metrics) {
    const block = document.createElement("div");
    block.className = "metric-block";
    const title = document.createElement("h3");
    title.textContent = metric;
    block.appendChild(title);
    const values = scored.map((s) =>
      meanOf(s.runs.map((r) => r.metrics[metric])));
    const max = Math.max(...values, 1e-12);
    const svg = el("svg", {
      width: "260", height: String(scored.length * 26 + 4),
      class: "bars",
    });
    values.forEach((value, i) => {
      const y = 4 + i * 26;
      svg.appendChild(el("rect", {
        x: "0", y: String(y), height: "18",
        width: String(Math.max(1, (value / max) * 180)),
        fill: PALETTE[i % PALETTE.length],
        "data-metric": metric,
        "data-scenario": scored[i].name,
        "data-value": String(value),
      }));
      const text = el("text", {
        x: "186", y: String(y + 13), class: "bar-label",
      });
      text.textContent = `${scored[i].name}: ${value.toPrecision(4)}`;
      svg.appendChild(text);
    });
    block.appendChild(svg);
    container.appendChild(block);
  }
}

/** Overlaid hour-of-week histograms (168 bins) per scenario's last run. */
export function renderHistograms(container: HTMLElement,
                                 scenarios: Scenario[]): void {
  container.textContent = "";
  const scored = scenarios.filter((s) => s.runs.length > 0);
  if (!scored.length) return;
  const width = 680;
  const height = 140;
  const svg = el("svg", {
    width: String(width), height: String(height), class: "histogram",
  });
  const reference = scored[0].runs[0].metrics.reference_histogram;
  const series = [
    { name: "reference", bins: reference, color: "#222222" },
    ...scored.map((s, i) => ({
      name: s.name,
      bins: s.runs[s.runs.length - 1].metrics.histogram,
      color: PALETTE[i % PALETTE.length],
    })),
  ];
  const peak = Math.max(...series.flatMap((s) => s.bins), 1e-12);
  for (const { name, bins, color } of series) {
    const points = bins.map((v, b) =>
      `${(b / 167) * (width - 10) + 5},${height - 5 - (v / peak) * (height - 20)}`);
    const line = el("polyline", {
      points: points.join(" "),
      fill: "none",
      stroke: color,
      "stroke-width": "1.5",
      "data-series": name,
    });
    svg.appendChild(line);
  }
  container.appendChild(svg);
}
