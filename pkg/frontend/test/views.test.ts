/** Direct view units: the pieces the dashboard tests exercise only
 * indirectly (brush callbacks, hatch pattern defs, excluded note).
 */

import { describe, expect, it } from "vitest";

import { CpueResponse, LengthsResponse, TimelineResponse } from "../src/api.js";
import { createLengthHistogram } from "../src/lengths.js";
import { NO_DATA_PATTERN_ID, createMapView } from "../src/map.js";
import { WORLD } from "../src/projection.js";
import { createTimeline } from "../src/timeline.js";

const emptyMap = { catches: null, bins: null, routes: null, effort: null, cpue: null };

describe("timeline", () => {
  const doc: TimelineResponse = {
    interval: 1,
    total: 6,
    buckets: [
      { year: 1950, count: 1 },
      { year: 1951, count: 2 },
      { year: 1952, count: 0 },
      { year: 1953, count: 3 },
    ],
  };

  it("reports inclusive date endpoints for a scripted brush", () => {
    const calls: Array<[string, string] | null> = [];
    const view = createTimeline((range) => calls.push(range));
    view.render(doc, null);
    view.brush(1951, 1953);
    view.clearBrush();
    expect(calls).toEqual([["1951-01-01", "1953-12-31"], null]);
  });

  it("normalizes a backwards drag and sums what it drew", () => {
    const calls: Array<[string, string] | null> = [];
    const view = createTimeline((range) => calls.push(range));
    view.render(doc, null);
    view.brush(1953, 1950);
    expect(calls).toEqual([["1950-01-01", "1953-12-31"]]);
    expect(view.renderedTotal()).toBe(6);
  });

  it("shows the brush rectangle when rendered with an active range", () => {
    const view = createTimeline(() => {});
    view.render(doc, [1951, 1952]);
    const rect = view.svg.querySelector("rect.brush") as SVGRectElement;
    expect(rect.getAttribute("display")).toBeNull();
    view.render(doc, null);
    expect(rect.getAttribute("display")).toBe("none");
  });
});

describe("length histogram", () => {
  it("renders buckets and the excluded count side by side", () => {
    const doc: LengthsResponse = {
      bucket_ft: 5,
      total: 7,
      excluded: 2,
      buckets: [
        { start_ft: 45, count: 3 },
        { start_ft: 50, count: 0 },
        { start_ft: 55, count: 4 },
      ],
    };
    const view = createLengthHistogram();
    view.render(doc);
    expect(view.renderedTotal()).toBe(7);
    expect(view.renderedExcluded()).toBe(2);
    const note = view.root.querySelector(".excluded-note") as HTMLElement;
    expect(note.textContent).toContain("2");
  });
});

describe("map", () => {
  it("defines the hatch pattern once in its defs", () => {
    const map = createMapView();
    const pattern = map.svg.querySelectorAll(`pattern#${NO_DATA_PATTERN_ID}`);
    expect(pattern).toHaveLength(1);
  });

  it("keeps a defined-cpue cell off the hatch and a null cell on it", () => {
    const map = createMapView();
    const cpue: CpueResponse = {
      bin_deg: 5,
      min_effort_km: 200,
      cells: [
        {
          i: 6,
          j: 29,
          lat_min: -60,
          lon_min: -35,
          catches: 4,
          effort_km: 900,
          cpue: 4.44,
          defined: true,
          catch_without_effort: false,
        },
        {
          i: 7,
          j: 28,
          lat_min: -55,
          lon_min: -40,
          catches: 6,
          effort_km: 0,
          cpue: null,
          defined: false,
          catch_without_effort: true,
        },
      ],
    };
    map.render({ ...emptyMap, cpue }, WORLD);
    const rects = [...map.svg.querySelectorAll("rect.cell-cpue")];
    expect(rects).toHaveLength(2);
    const [ok, missing] = rects;
    expect(ok.classList.contains("no-data")).toBe(false);
    expect(ok.getAttribute("data-cpue")).toBe("4.4400");
    expect(missing.classList.contains("no-data")).toBe(true);
    expect(missing.getAttribute("fill")).toBe(`url(#${NO_DATA_PATTERN_ID})`);
  });

  it("clears everything it drew on the next render", () => {
    const map = createMapView();
    map.render(
      {
        ...emptyMap,
        catches: {
          level: 2,
          encoding: "species",
          total: 3,
          points: [{ lat: -57.5, lon: -32.5, count: 3, dominant_class: "balaenopteridae" }],
          next_cursor: null,
        },
      },
      WORLD,
    );
    expect(map.renderedCatchTotal()).toBe(3);
    map.render(emptyMap, WORLD);
    expect(map.renderedCatchTotal()).toBe(0);
    expect(map.renderedRouteCount()).toBe(0);
  });
});
