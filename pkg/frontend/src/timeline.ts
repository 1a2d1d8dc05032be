/** Year histogram with a brush that sets the date filter.
 *
 * Pointer drags and the programmatic brush() go through the same code
 * path; a brush of [y0, y1] filters from Jan 1 of y0 through Dec 31 of
 * y1 inclusive, matching the service's inclusive date interval.
 */

import { TimelineResponse } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface TimelineView {
  readonly svg: SVGSVGElement;
  render(doc: TimelineResponse, brushed: [number, number] | null): void;
  /** Scripted brush in data units (years, inclusive). */
  brush(startYear: number, endYear: number): void;
  clearBrush(): void;
  renderedTotal(): number;
}

export type BrushHandler = (range: [string, string] | null) => void;

export function createTimeline(onBrush: BrushHandler, width = 960, height = 120): TimelineView {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "wt-timeline");

  const barLayer = document.createElementNS(SVG_NS, "g");
  const brushRect = document.createElementNS(SVG_NS, "rect");
  brushRect.setAttribute("class", "brush");
  brushRect.setAttribute("fill", "#3182bd");
  brushRect.setAttribute("fill-opacity", "0.25");
  brushRect.setAttribute("display", "none");
  svg.appendChild(barLayer);
  svg.appendChild(brushRect);

  let doc: TimelineResponse | null = null;
  let yearSpan: [number, number] | null = null; // rendered axis range
  let dragStart: number | null = null;

  function yearAt(px: number): number {
    if (!yearSpan) return 0;
    const [lo, hi] = yearSpan;
    const t = Math.max(0, Math.min(1, px / width));
    return Math.round(lo + t * (hi - lo));
  }

  function xOf(year: number): number {
    if (!yearSpan) return 0;
    const [lo, hi] = yearSpan;
    return ((year - lo) / Math.max(1, hi - lo)) * width;
  }

  function applyBrush(y0: number, y1: number): void {
    const [a, b] = y0 <= y1 ? [y0, y1] : [y1, y0];
    brushRect.setAttribute("x", xOf(a).toFixed(1));
    brushRect.setAttribute("width", Math.max(2, xOf(b + 1) - xOf(a)).toFixed(1));
    brushRect.setAttribute("y", "0");
    brushRect.setAttribute("height", String(height));
    brushRect.removeAttribute("display");
    onBrush([`${a}-01-01`, `${b}-12-31`]);
  }

  svg.addEventListener("pointerdown", (ev) => {
    dragStart = (ev as PointerEvent).offsetX ?? 0;
  });
  svg.addEventListener("pointerup", (ev) => {
    if (dragStart === null || !yearSpan) return;
    const end = (ev as PointerEvent).offsetX ?? 0;
    applyBrush(yearAt(dragStart), yearAt(end));
    dragStart = null;
  });

  return {
    svg,
    render(next, brushed) {
      doc = next;
      while (barLayer.firstChild) barLayer.removeChild(barLayer.firstChild);
      if (doc.buckets.length === 0) {
        yearSpan = null;
        brushRect.setAttribute("display", "none");
        return;
      }
      const years = doc.buckets.map((b) => b.year);
      yearSpan = [Math.min(...years), Math.max(...years) + doc.interval];
      const top = Math.max(1, ...doc.buckets.map((b) => b.count));
      const barWidth = Math.max(1, width / ((yearSpan[1] - yearSpan[0]) / doc.interval) - 1);
      for (const b of doc.buckets) {
        const h = (b.count / top) * (height - 14);
        const rect = document.createElementNS(SVG_NS, "rect");
        rect.setAttribute("x", xOf(b.year).toFixed(1));
        rect.setAttribute("y", (height - h).toFixed(1));
        rect.setAttribute("width", barWidth.toFixed(1));
        rect.setAttribute("height", h.toFixed(1));
        rect.setAttribute("fill", "#6baed6");
        rect.setAttribute("class", "bar");
        rect.setAttribute("data-year", String(b.year));
        rect.setAttribute("data-count", String(b.count));
        barLayer.appendChild(rect);
      }
      if (brushed) {
        brushRect.setAttribute("x", xOf(brushed[0]).toFixed(1));
        brushRect.setAttribute(
          "width",
          Math.max(2, xOf(brushed[1] + 1) - xOf(brushed[0])).toFixed(1),
        );
        brushRect.setAttribute("y", "0");
        brushRect.setAttribute("height", String(height));
        brushRect.removeAttribute("display");
      } else {
        brushRect.setAttribute("display", "none");
      }
    },
    brush(startYear, endYear) {
      applyBrush(startYear, endYear);
    },
    clearBrush() {
      brushRect.setAttribute("display", "none");
      onBrush(null);
    },
    renderedTotal() {
      let total = 0;
      for (const bar of barLayer.querySelectorAll("rect.bar")) {
        total += Number(bar.getAttribute("data-count") ?? "0");
      }
      return total;
    },
  };
}
