/** Body-length histogram with the excluded-record count alongside. */

import { LengthsResponse } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface LengthsView {
  readonly root: HTMLElement;
  render(doc: LengthsResponse): void;
  renderedTotal(): number;
  renderedExcluded(): number;
}

export function createLengthHistogram(width = 420, height = 140): LengthsView {
  const root = document.createElement("div");
  root.className = "wt-lengths";

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));

  const note = document.createElement("p");
  note.className = "excluded-note";
  root.appendChild(svg);
  root.appendChild(note);

  let excluded = 0;

  return {
    root,
    render(doc) {
      while (svg.firstChild) svg.removeChild(svg.firstChild);
      excluded = doc.excluded;
      note.textContent = `${doc.excluded} records without length`;
      note.setAttribute("data-excluded", String(doc.excluded));
      if (doc.buckets.length === 0) return;
      const starts = doc.buckets.map((b) => b.start_ft);
      const lo = Math.min(...starts);
      const hi = Math.max(...starts) + doc.bucket_ft;
      const top = Math.max(1, ...doc.buckets.map((b) => b.count));
      const px = (ft: number) => ((ft - lo) / (hi - lo)) * width;
      for (const b of doc.buckets) {
        const h = (b.count / top) * (height - 16);
        const rect = document.createElementNS(SVG_NS, "rect");
        rect.setAttribute("x", px(b.start_ft).toFixed(1));
        rect.setAttribute("y", (height - h).toFixed(1));
        rect.setAttribute("width", Math.max(1, px(b.start_ft + doc.bucket_ft) - px(b.start_ft) - 1).toFixed(1));
        rect.setAttribute("height", h.toFixed(1));
        rect.setAttribute("fill", "#9ecae1");
        rect.setAttribute("class", "bar");
        rect.setAttribute("data-start-ft", String(b.start_ft));
        rect.setAttribute("data-count", String(b.count));
        svg.appendChild(rect);
      }
    },
    renderedTotal() {
      let total = 0;
      for (const bar of svg.querySelectorAll("rect.bar")) {
        total += Number(bar.getAttribute("data-count") ?? "0");
      }
      return total;
    },
    renderedExcluded() {
      return excluded;
    },
  };
}
