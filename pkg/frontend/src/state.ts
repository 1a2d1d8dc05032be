/** Single source of truth for what every view renders. */

import { FilterState, cloneFilter, emptyFilter } from "./filters.js";
import { Encoding } from "./colors.js";
import { Viewport, WORLD } from "./projection.js";

export interface LayerVisibility {
  points: boolean;
  heatmap: boolean;
  routes: boolean;
  effort: boolean;
  cpue: boolean;
}

export interface ViewState {
  filter: FilterState;
  /** /catches aggregation level 0-3; user-set, never derived from zoom. */
  level: number;
  encoding: Encoding;
  layers: LayerVisibility;
  binDeg: number;
  minEffortKm: number;
  timelineInterval: number;
  lengthBucketFt: number;
  viewport: Viewport;
}

export function initialViewState(): ViewState {
  return {
    filter: emptyFilter(),
    level: 2,
    encoding: "species",
    layers: { points: true, heatmap: true, routes: true, effort: false, cpue: false },
    binDeg: 5,
    minEffortKm: 200,
    timelineInterval: 1,
    lengthBucketFt: 5,
    viewport: { ...WORLD },
  };
}

export function cloneViewState(v: ViewState): ViewState {
  return {
    ...v,
    filter: cloneFilter(v.filter),
    layers: { ...v.layers },
    viewport: { ...v.viewport },
  };
}

export type Listener = (state: ViewState) => void;

export interface Store {
  get(): ViewState;
  /** Mutate a copy; listeners fire once per update call. */
  update(mutate: (draft: ViewState) => void): void;
  subscribe(fn: Listener): () => void;
}

export function createStore(initial: ViewState = initialViewState()): Store {
  let state = cloneViewState(initial);
  const listeners = new Set<Listener>();
  return {
    get: () => state,
    update(mutate) {
      const draft = cloneViewState(state);
      mutate(draft);
      state = draft;
      for (const fn of listeners) fn(state);
    },
    subscribe(fn) {
      listeners.add(fn);
      return () => listeners.delete(fn);
    },
  };
}
