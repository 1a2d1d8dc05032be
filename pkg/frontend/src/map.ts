/** SVG map: cell fills under gray route lines under catch circles.
 *
 * Layer order is fixed so routes never cover catches and fills never
 * cover either. CPUE cells without defined CPUE get the no-data hatch,
 * never a zero-value ramp color.
 */

import {
  BinsResponse,
  CatchesResponse,
  CpueResponse,
  EffortResponse,
  RoutesResponse,
} from "./api.js";
import { ROUTE_COLOR, classColor, rampColor } from "./colors.js";
import { Projection, Viewport, makeProjection } from "./projection.js";

const SVG_NS = "http://www.w3.org/2000/svg";
export const NO_DATA_PATTERN_ID = "wt-no-data";

export interface MapData {
  catches: CatchesResponse | null;
  bins: BinsResponse | null;
  routes: RoutesResponse | null;
  effort: EffortResponse | null;
  cpue: CpueResponse | null;
}

export interface MapView {
  readonly svg: SVGSVGElement;
  render(data: MapData, viewport: Viewport): void;
  /** Sum of the count attributes of everything drawn on the catch layers. */
  renderedCatchTotal(): number;
  renderedRouteCount(): number;
}

function el<K extends keyof SVGElementTagNameMap>(
  name: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function createMapView(width = 960, height = 480): MapView {
  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "wt-map",
  });

  // diagonal hatch for cells with no defined value
  const defs = el("defs");
  const pattern = el("pattern", {
    id: NO_DATA_PATTERN_ID,
    width: "6",
    height: "6",
    patternUnits: "userSpaceOnUse",
  });
  pattern.appendChild(el("rect", { width: "6", height: "6", fill: "#f0f0f0" }));
  pattern.appendChild(
    el("path", { d: "M0,6 L6,0", stroke: "#999999", "stroke-width": "1" }),
  );
  defs.appendChild(pattern);
  svg.appendChild(defs);

  const cellLayer = el("g", { class: "layer-cells" });
  const routeLayer = el("g", { class: "layer-routes" });
  const pointLayer = el("g", { class: "layer-points" });
  const legendLayer = el("g", { class: "layer-legend" });
  svg.appendChild(cellLayer);
  svg.appendChild(routeLayer); // gray lines beneath catch circles
  svg.appendChild(pointLayer);
  svg.appendChild(legendLayer);

  function drawBins(proj: Projection, bins: BinsResponse): void {
    const top = Math.max(1, ...bins.cells.map((c) => c.count));
    for (const c of bins.cells) {
      const r = proj.cellRect(c.lat_min, c.lon_min, bins.bin_deg);
      const rect = el("rect", {
        x: r.x.toFixed(2),
        y: r.y.toFixed(2),
        width: r.width.toFixed(2),
        height: r.height.toFixed(2),
        fill: rampColor(c.count / top),
        "fill-opacity": "0.6",
        class: "cell-bin",
        "data-count": String(c.count),
      });
      rect.appendChild(titleFor(`${c.count} catches`, c.lat_min, c.lon_min, bins.bin_deg));
      cellLayer.appendChild(rect);
    }
  }

  function drawEffort(proj: Projection, effort: EffortResponse): void {
    const top = Math.max(1e-9, ...effort.cells.map((c) => c.effort_km));
    for (const c of effort.cells) {
      const r = proj.cellRect(c.lat_min, c.lon_min, effort.bin_deg);
      const rect = el("rect", {
        x: r.x.toFixed(2),
        y: r.y.toFixed(2),
        width: r.width.toFixed(2),
        height: r.height.toFixed(2),
        fill: rampColor(c.effort_km / top),
        "fill-opacity": "0.5",
        class: "cell-effort",
        "data-effort-km": c.effort_km.toFixed(3),
      });
      rect.appendChild(
        titleFor(`${c.effort_km.toFixed(0)} km searched`, c.lat_min, c.lon_min, effort.bin_deg),
      );
      cellLayer.appendChild(rect);
    }
  }

  function drawCpue(proj: Projection, cpue: CpueResponse): void {
    const defined = cpue.cells.filter((c) => c.cpue !== null);
    const top = Math.max(1e-9, ...defined.map((c) => c.cpue as number));
    for (const c of cpue.cells) {
      const r = proj.cellRect(c.lat_min, c.lon_min, cpue.bin_deg);
      const attrs: Record<string, string> = {
        x: r.x.toFixed(2),
        y: r.y.toFixed(2),
        width: r.width.toFixed(2),
        height: r.height.toFixed(2),
      };
      let label: string;
      if (c.cpue === null) {
        attrs.fill = `url(#${NO_DATA_PATTERN_ID})`;
        attrs.class = "cell-cpue no-data";
        label = `no data (effort ${c.effort_km.toFixed(0)} km < ${cpue.min_effort_km} km)`;
      } else {
        attrs.fill = rampColor(c.cpue / top);
        attrs["fill-opacity"] = "0.65";
        attrs.class = "cell-cpue";
        attrs["data-cpue"] = c.cpue.toFixed(4);
        label = `${c.cpue.toFixed(2)} catches per 1000 km`;
      }
      const rect = el("rect", attrs);
      rect.appendChild(titleFor(label, c.lat_min, c.lon_min, cpue.bin_deg));
      cellLayer.appendChild(rect);
    }
  }

  function drawRoutes(proj: Projection, routes: RoutesResponse): void {
    for (const f of routes.features) {
      const parts =
        f.geometry.type === "LineString" ? [f.geometry.coordinates] : f.geometry.coordinates;
      const d = parts
        .map((part) =>
          part
            .map(([lon, lat], k) => `${k === 0 ? "M" : "L"}${proj.x(lon).toFixed(2)},${proj.y(lat).toFixed(2)}`)
            .join(""),
        )
        .join("");
      const path = el("path", {
        d,
        fill: "none",
        stroke: ROUTE_COLOR,
        "stroke-width": "0.8",
        class: "route",
        "data-expedition": f.properties.expedition_id,
      });
      routeLayer.appendChild(path);
    }
  }

  function drawCatches(proj: Projection, catches: CatchesResponse): void {
    for (const p of catches.points) {
      if (!proj.visible(p.lat, p.lon)) continue;
      const radius = p.count === 1 ? 2 : Math.min(12, 2 + Math.sqrt(p.count));
      const circle = el("circle", {
        cx: proj.x(p.lon).toFixed(2),
        cy: proj.y(p.lat).toFixed(2),
        r: radius.toFixed(2),
        fill: classColor(p.dominant_class),
        "fill-opacity": "0.8",
        class: "catch",
        "data-count": String(p.count),
        "data-class": p.dominant_class,
      });
      const title = el("title");
      title.textContent = `${p.count} catch${p.count === 1 ? "" : "es"}, ${p.dominant_class}`;
      circle.appendChild(title);
      pointLayer.appendChild(circle);
    }
  }

  function drawLegend(data: MapData): void {
    const entries: [string, string][] = [];
    if (data.cpue) entries.push(["no data", `url(#${NO_DATA_PATTERN_ID})`]);
    if (data.catches) {
      const seen = new Set(data.catches.points.map((p) => p.dominant_class));
      for (const cls of [...seen].sort()) entries.push([cls, classColor(cls)]);
    }
    entries.forEach(([label, fill], k) => {
      const y = 14 + k * 16;
      legendLayer.appendChild(
        el("rect", { x: "8", y: String(y - 9), width: "12", height: "12", fill, class: "legend-swatch" }),
      );
      const text = el("text", { x: "24", y: String(y + 1), "font-size": "11", class: "legend-label" });
      text.textContent = label;
      legendLayer.appendChild(text);
    });
  }

  function titleFor(label: string, latMin: number, lonMin: number, binDeg: number) {
    const title = el("title");
    title.textContent = `[${latMin}, ${latMin + binDeg}) x [${lonMin}, ${lonMin + binDeg}): ${label}`;
    return title;
  }

  return {
    svg,
    render(data, viewport) {
      const proj = makeProjection(viewport, width, height);
      clear(cellLayer);
      clear(routeLayer);
      clear(pointLayer);
      clear(legendLayer);
      if (data.effort) drawEffort(proj, data.effort);
      if (data.cpue) drawCpue(proj, data.cpue);
      if (data.bins) drawBins(proj, data.bins);
      if (data.routes) drawRoutes(proj, data.routes);
      if (data.catches) drawCatches(proj, data.catches);
      drawLegend(data);
    },
    renderedCatchTotal() {
      let total = 0;
      for (const node of pointLayer.querySelectorAll("circle.catch")) {
        total += Number(node.getAttribute("data-count") ?? "0");
      }
      return total;
    },
    renderedRouteCount() {
      return routeLayer.querySelectorAll("path.route").length;
    },
  };
}
