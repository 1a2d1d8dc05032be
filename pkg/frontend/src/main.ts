/** Dashboard controller. Wires the view-state store to the API client
 * and the SVG views, with one rule throughout: every rendered number
 * comes from a service response, never from client-side re-filtering.
 *
 * Rapid state changes coalesce: each refresh aborts the previous one
 * and only the newest generation may touch the views.
 */

import {
  ApiClient,
  ApiError,
  BinsResponse,
  CatchesResponse,
  CpueResponse,
  EffortResponse,
  FetchLike,
  MetaResponse,
  RoutesResponse,
  createApiClient,
} from "./api.js";
import { createLengthHistogram, LengthsView } from "./lengths.js";
import { createMapView, MapView } from "./map.js";
import { createPanel, Panel } from "./panel.js";
import { createStore, Store, ViewState } from "./state.js";
import { createTimeline, TimelineView } from "./timeline.js";

export interface DashboardOptions {
  base: string;
  fetchImpl?: FetchLike;
}

export interface Dashboard {
  readonly root: HTMLElement;
  readonly store: Store;
  readonly api: ApiClient;
  readonly map: MapView;
  readonly timeline: TimelineView;
  readonly lengths: LengthsView;
  readonly panel: Panel;
  /** Resolves when the views reflect the newest state (no fetch in flight). */
  settle(): Promise<void>;
  /** Fetch the current filter's CSV; also triggers a download when the
   * environment supports object URLs. Returns the CSV text. */
  exportCsv(): Promise<string>;
  lastMeta(): MetaResponse | null;
  destroy(): void;
}

function isAbort(err: unknown): boolean {
  return err instanceof Error && err.name === "AbortError";
}

function brushedYears(state: ViewState): [number, number] | null {
  const { dateFrom, dateTo } = state.filter;
  if (dateFrom === null || dateTo === null) return null;
  return [Number(dateFrom.slice(0, 4)), Number(dateTo.slice(0, 4))];
}

export function createDashboard(root: HTMLElement, opts: DashboardOptions): Dashboard {
  const api = createApiClient(opts.base, opts.fetchImpl);
  const store = createStore();

  const map = createMapView();
  const lengths = createLengthHistogram();
  const timeline = createTimeline((range) => {
    store.update((draft) => {
      draft.filter.dateFrom = range ? range[0] : null;
      draft.filter.dateTo = range ? range[1] : null;
    });
  });

  const panel = createPanel({
    onToggleCode(kind, code, on) {
      store.update((draft) => {
        const set = draft.filter[kind];
        if (on) set.add(code);
        else set.delete(code);
      });
    },
    onLengthRange(minFt, maxFt) {
      store.update((draft) => {
        draft.filter.lengthMinFt = minFt;
        draft.filter.lengthMaxFt = maxFt;
      });
    },
    onLevel(level) {
      store.update((draft) => {
        draft.level = level;
      });
    },
    onEncoding(encoding) {
      store.update((draft) => {
        draft.encoding = encoding;
      });
    },
    onLayer(layer, on) {
      store.update((draft) => {
        draft.layers[layer] = on;
      });
    },
    onExport() {
      exportCsv().catch((err) => {
        panel.showError(err instanceof Error ? err.message : String(err));
      });
    },
    onClearDates() {
      store.update((draft) => {
        draft.filter.dateFrom = null;
        draft.filter.dateTo = null;
      });
    },
  });

  root.classList.add("wt-dashboard");
  const mapBox = document.createElement("div");
  mapBox.className = "map-box";
  mapBox.appendChild(map.svg);
  mapBox.appendChild(timeline.svg);
  mapBox.appendChild(lengths.root);
  root.appendChild(panel.root);
  root.appendChild(mapBox);

  let generation = 0;
  let inflight: AbortController | null = null;
  let tail: Promise<void> = Promise.resolve();
  let meta: MetaResponse | null = null;
  let codesRendered = false;

  async function refresh(state: ViewState): Promise<void> {
    generation += 1;
    const gen = generation;
    if (inflight) inflight.abort();
    const ac = new AbortController();
    inflight = ac;
    const f = state.filter;
    try {
      const none = <T>(): Promise<T | null> => Promise.resolve(null);
      const [metaDoc, timelineDoc, lengthsDoc, catchesDoc, binsDoc, routesDoc, effortDoc, cpueDoc] =
        await Promise.all([
          api.meta(f, ac.signal),
          api.timeline(f, state.timelineInterval, ac.signal),
          api.lengths(f, state.lengthBucketFt, ac.signal),
          state.layers.points ? api.catches(f, state.level, state.encoding, ac.signal) : none<CatchesResponse>(),
          state.layers.heatmap ? api.bins(f, state.binDeg, ac.signal) : none<BinsResponse>(),
          state.layers.routes ? api.routes(f, ac.signal) : none<RoutesResponse>(),
          state.layers.effort ? api.effort(f, state.binDeg, ac.signal) : none<EffortResponse>(),
          state.layers.cpue ? api.cpue(f, state.binDeg, state.minEffortKm, ac.signal) : none<CpueResponse>(),
        ]);
      // A newer refresh owns the views; drop this response set.
      if (gen !== generation) return;
      meta = metaDoc;
      if (!codesRendered) {
        panel.renderCodes(metaDoc);
        codesRendered = true;
      }
      panel.reflect(state);
      panel.setCounts(metaDoc.filtered, metaDoc.count);
      timeline.render(timelineDoc, brushedYears(state));
      lengths.render(lengthsDoc);
      map.render(
        { catches: catchesDoc, bins: binsDoc, routes: routesDoc, effort: effortDoc, cpue: cpueDoc },
        state.viewport,
      );
      panel.clearError();
    } catch (err) {
      if (gen !== generation || isAbort(err)) return;
      // Non-blocking: the previous render stays up, only the banner changes.
      if (err instanceof ApiError) panel.showError(err.message);
      else panel.showError(err instanceof Error ? err.message : String(err));
    }
  }

  function schedule(state: ViewState): void {
    tail = refresh(state);
  }

  async function settle(): Promise<void> {
    let waited;
    do {
      waited = tail;
      await waited;
    } while (waited !== tail);
  }

  async function exportCsv(): Promise<string> {
    const text = await api.exportCsv(store.get().filter);
    if (
      typeof Blob !== "undefined" &&
      typeof URL !== "undefined" &&
      typeof URL.createObjectURL === "function"
    ) {
      const href = URL.createObjectURL(new Blob([text], { type: "text/csv" }));
      const a = document.createElement("a");
      a.href = href;
      a.download = "catches.csv";
      a.click();
      URL.revokeObjectURL(href);
    }
    return text;
  }

  const unsubscribe = store.subscribe(schedule);
  schedule(store.get());

  return {
    root,
    store,
    api,
    map,
    timeline,
    lengths,
    panel,
    settle,
    exportCsv,
    lastMeta: () => meta,
    destroy() {
      unsubscribe();
      generation += 1;
      if (inflight) inflight.abort();
    },
  };
}

/** Browser entry point; index.html calls this after the module loads.
 * The service address comes from the `api` query parameter so the same
 * static bundle can point at any host.
 */
export function bootstrap(): Dashboard | null {
  const rootEl = document.getElementById("app");
  if (!rootEl) return null;
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8077";
  return createDashboard(rootEl, { base });
}
