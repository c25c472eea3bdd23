/** Minimal SVG line chart of successful extractions over time.
 * Non-OK entries break the line into gaps. Amounts are parsed as
 * numbers only to scale the drawing; the displayed figures always come
 * from the API strings. */

import type { HistoryEntry } from "./types.js";

const WIDTH = 560;
const HEIGHT = 160;
const PAD = 24;

const SVG_NS = "http://www.w3.org/2000/svg";

export function historyChart(entries: HistoryEntry[]): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "history-chart");
  svg.setAttribute("role", "img");

  const amounts = entries
    .filter((e) => e.code === "OK" && e.value)
    .map((e) => Number(e.value!.amount));
  if (amounts.length === 0) {
    return svg;
  }
  const lo = Math.min(...amounts);
  const hi = Math.max(...amounts);
  const span = hi - lo || 1;

  const x = (i: number) =>
    entries.length === 1 ? WIDTH / 2 : PAD + (i * (WIDTH - 2 * PAD)) / (entries.length - 1);
  const y = (v: number) => HEIGHT - PAD - ((v - lo) * (HEIGHT - 2 * PAD)) / span;

  // Consecutive OK runs become polyline segments; anything else is a gap.
  let run: string[] = [];
  const flush = () => {
    if (run.length > 0) {
      const poly = document.createElementNS(SVG_NS, "polyline");
      poly.setAttribute("points", run.join(" "));
      poly.setAttribute("class", "chart-line");
      poly.setAttribute("fill", "none");
      svg.appendChild(poly);
      run = [];
    }
  };
  entries.forEach((entry, i) => {
    if (entry.code === "OK" && entry.value) {
      const px = x(i);
      const py = y(Number(entry.value.amount));
      run.push(`${px},${py}`);
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(px));
      dot.setAttribute("cy", String(py));
      dot.setAttribute("r", "3");
      dot.setAttribute("class", "chart-dot");
      svg.appendChild(dot);
    } else {
      flush();
    }
  });
  flush();
  return svg;
}
