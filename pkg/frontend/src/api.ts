/** Typed client for the query service. Every method takes the current
 * FilterState plus the endpoint's own parameters and an AbortSignal so
 * the store can cancel superseded fetches.
 */

import { FilterState, filterParams } from "./filters.js";

export interface MetaResponse {
  count: number;
  filtered: number;
  expedition_count: number;
  year_range: [number, number] | null;
  bins: number[];
  levels: Record<string, string | number>;
  max_raw_points: number;
  codes: {
    species: string[];
    sexes: string[];
    types: string[];
    nations: string[];
  };
}

export interface ClusterPoint {
  lat: number;
  lon: number;
  count: number;
  dominant_class: string;
}

export interface CatchesResponse {
  level: number;
  encoding: string;
  total: number;
  points: ClusterPoint[];
  next_cursor: number | null;
}

export interface BinCell {
  i: number;
  j: number;
  lat_min: number;
  lon_min: number;
  count: number;
  by_species: Record<string, number>;
  by_sex: Record<string, number>;
  mean_length_ft: number | null;
}

export interface BinsResponse {
  bin_deg: number;
  total: number;
  cells: BinCell[];
}

export interface RouteFeature {
  type: "Feature";
  geometry:
    | { type: "LineString"; coordinates: [number, number][] }
    | { type: "MultiLineString"; coordinates: [number, number][][] };
  properties: {
    expedition_id: string;
    depart_date: string;
    arrive_date: string;
    length_km: number;
  };
}

export interface RoutesResponse {
  type: "FeatureCollection";
  features: RouteFeature[];
  total: number;
  next_cursor: number | null;
}

export interface EffortCell {
  i: number;
  j: number;
  lat_min: number;
  lon_min: number;
  effort_km: number;
}

export interface EffortResponse {
  bin_deg: number;
  total_km: number;
  cells: EffortCell[];
}

export interface CpueCell {
  i: number;
  j: number;
  lat_min: number;
  lon_min: number;
  catches: number;
  effort_km: number;
  cpue: number | null;
  defined: boolean;
  catch_without_effort: boolean;
}

export interface CpueResponse {
  bin_deg: number;
  min_effort_km: number;
  cells: CpueCell[];
}

export interface TimelineResponse {
  interval: number;
  total: number;
  buckets: { year: number; count: number }[];
}

export interface LengthsResponse {
  bucket_ft: number;
  total: number;
  excluded: number;
  buckets: { start_ft: number; count: number }[];
}

/** Structured service error ({param, reason} with a 4xx status). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly param: string,
    readonly reason: string,
  ) {
    super(`${param}: ${reason}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiClient {
  readonly base: string;
  meta(f: FilterState, signal?: AbortSignal): Promise<MetaResponse>;
  catches(
    f: FilterState,
    level: number,
    encoding: string,
    signal?: AbortSignal,
  ): Promise<CatchesResponse>;
  bins(f: FilterState, binDeg: number, signal?: AbortSignal): Promise<BinsResponse>;
  routes(f: FilterState, signal?: AbortSignal): Promise<RoutesResponse>;
  effort(f: FilterState, binDeg: number, signal?: AbortSignal): Promise<EffortResponse>;
  cpue(
    f: FilterState,
    binDeg: number,
    minEffortKm: number,
    signal?: AbortSignal,
  ): Promise<CpueResponse>;
  timeline(f: FilterState, interval: number, signal?: AbortSignal): Promise<TimelineResponse>;
  lengths(f: FilterState, bucketFt: number, signal?: AbortSignal): Promise<LengthsResponse>;
  exportCsv(f: FilterState, signal?: AbortSignal): Promise<string>;
}

export function createApiClient(base: string, fetchImpl?: FetchLike): ApiClient {
  const doFetch: FetchLike = fetchImpl ?? ((url, init) => fetch(url, init));
  const root = base.replace(/\/+$/, "");

  function url(path: string, f: FilterState, own: Record<string, string> = {}): string {
    const params = filterParams(f);
    for (const [k, v] of Object.entries(own)) params.set(k, v);
    const q = params.toString();
    return q ? `${root}${path}?${q}` : `${root}${path}`;
  }

  async function getJson<T>(u: string, signal?: AbortSignal): Promise<T> {
    const resp = await doFetch(u, { signal });
    if (!resp.ok) throw await toApiError(resp);
    return (await resp.json()) as T;
  }

  async function toApiError(resp: Response): Promise<ApiError> {
    try {
      const doc = (await resp.json()) as { param?: string; reason?: string };
      return new ApiError(resp.status, doc.param ?? "request", doc.reason ?? resp.statusText);
    } catch {
      return new ApiError(resp.status, "request", resp.statusText);
    }
  }

  // Raw points page; aggregated levels return everything at once.
  async function catchesAll(
    f: FilterState,
    level: number,
    encoding: string,
    signal?: AbortSignal,
  ): Promise<CatchesResponse> {
    const own = { level: String(level), encoding };
    let page = await getJson<CatchesResponse>(url("/catches", f, own), signal);
    const points = [...page.points];
    while (page.next_cursor !== null) {
      page = await getJson<CatchesResponse>(
        url("/catches", f, { ...own, cursor: String(page.next_cursor) }),
        signal,
      );
      points.push(...page.points);
    }
    return { ...page, points, next_cursor: null };
  }

  return {
    base: root,
    meta: (f, signal) => getJson(url("/meta", f), signal),
    catches: catchesAll,
    bins: (f, binDeg, signal) => getJson(url("/bins", f, { bin: String(binDeg) }), signal),
    routes: async (f, signal) => {
      let page = await getJson<RoutesResponse>(url("/routes", f), signal);
      const features = [...page.features];
      while (page.next_cursor !== null) {
        page = await getJson<RoutesResponse>(
          url("/routes", f, { cursor: String(page.next_cursor) }),
          signal,
        );
        features.push(...page.features);
      }
      return { ...page, features, next_cursor: null };
    },
    effort: (f, binDeg, signal) => getJson(url("/effort", f, { bin: String(binDeg) }), signal),
    cpue: (f, binDeg, minEffortKm, signal) =>
      getJson(url("/cpue", f, { bin: String(binDeg), min_effort: String(minEffortKm) }), signal),
    timeline: (f, interval, signal) =>
      getJson(url("/timeline", f, { interval: String(interval) }), signal),
    lengths: (f, bucketFt, signal) =>
      getJson(url("/lengths", f, { bucket: String(bucketFt) }), signal),
    exportCsv: async (f, signal) => {
      const resp = await doFetch(url("/export", f), { signal });
      if (!resp.ok) throw await toApiError(resp);
      return resp.text();
    },
  };
}
