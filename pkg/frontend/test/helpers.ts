/** In-memory stand-in for the query service.
 *
 * It applies the same filter grammar to a fixed record set and derives
 * every endpoint from that one accept-set, so cross-endpoint totals are
 * consistent by construction. Tests compare what the dashboard renders
 * against what this stub serves for the same query string.
 */

import { FetchLike } from "../src/api.js";
import { CLASS_TABLES, Encoding } from "../src/colors.js";

export interface StubRecord {
  id: number;
  expedition: string;
  date: string; // yyyy-mm-dd
  lat: number;
  lon: number;
  species: string;
  sex: string;
  lengthFt: number | null;
  nation: string;
  type: string;
}

type Row = [number, string, string, number, number, string, string, number | null, string, string];

const ROWS: Row[] = [
  // pelagic sweep, long legs, 1950-1953
  [1, "E1", "1950-01-05", -58.0, -32.0, "blue", "female", 85, "norway", "pelagic"],
  [2, "E1", "1950-02-10", -57.0, -25.0, "blue", "male", 82, "norway", "pelagic"],
  [3, "E1", "1951-01-15", -57.0, -18.0, "fin", "female", 70, "norway", "pelagic"],
  [4, "E1", "1951-02-20", -56.0, -10.0, "blue", "female", 88, "norway", "pelagic"],
  [5, "E1", "1952-01-12", -56.0, -2.0, "fin", "male", 68, "norway", "pelagic"],
  [6, "E1", "1952-03-01", -55.0, 6.0, "blue", "female", null, "norway", "pelagic"],
  [7, "E1", "1953-01-20", -55.0, 8.0, "fin", "female", 71, "norway", "pelagic"],
  // eastward pelagic season-by-season run, 1960-1969
  [8, "E2", "1960-01-10", -45.0, 140.0, "sei", "female", 50, "japan", "pelagic"],
  [9, "E2", "1961-02-11", -45.0, 146.0, "sei", "male", 48, "japan", "pelagic"],
  [10, "E2", "1962-03-12", -44.0, 152.0, "fin", "female", 66, "japan", "pelagic"],
  [11, "E2", "1963-04-13", -44.0, 158.0, "sei", "female", null, "japan", "pelagic"],
  [12, "E2", "1964-05-14", -43.0, 164.0, "minke", "male", 28, "japan", "pelagic"],
  [13, "E2", "1965-06-15", -43.0, 170.0, "sei", "female", 52, "japan", "pelagic"],
  [14, "E2", "1966-07-16", -42.0, 176.0, "minke", "female", 30, "japan", "pelagic"],
  [15, "E2", "1969-08-17", -42.0, 178.0, "sei", "male", 49, "japan", "pelagic"],
  // shore station: every catch at the same mooring, so zero track length
  [16, "E3", "1948-11-02", -54.28, -36.5, "blue", "female", 90, "united_kingdom", "land"],
  [17, "E3", "1948-12-05", -54.28, -36.5, "blue", "male", 87, "united_kingdom", "land"],
  [18, "E3", "1949-01-08", -54.28, -36.5, "fin", "female", 72, "united_kingdom", "land"],
  [19, "E3", "1949-11-20", -54.28, -36.5, "blue", "female", null, "united_kingdom", "land"],
  [20, "E3", "1950-12-25", -54.28, -36.5, "humpback", "male", 44, "united_kingdom", "land"],
  [21, "E3", "1952-01-30", -54.28, -36.5, "blue", "female", 91, "united_kingdom", "land"],
  // lone records: catches in cells no track ever crosses
  [22, "E4", "1975-02-14", -40.0, 60.0, "sperm", "male", 55, "ussr", "pelagic"],
  [23, "E5", "1975-07-01", 48.0, -130.0, "gray", "female", 40, "canada", "pelagic"],
  [24, "E5", "1976-07-10", 50.0, -135.0, "gray", "male", 42, "canada", "pelagic"],
];

export function demoRecords(): StubRecord[] {
  return ROWS.map(([id, expedition, date, lat, lon, species, sex, lengthFt, nation, type]) => ({
    id,
    expedition,
    date,
    lat,
    lon,
    species,
    sex,
    lengthFt,
    nation,
    type,
  }));
}

const VALID_BINS = [1, 2, 5, 10];
const LEVEL_DEG: Record<number, number> = { 1: 1, 2: 5, 3: 10 };
const FILTER_KEYS = new Set([
  "species",
  "sex",
  "from",
  "to",
  "bbox",
  "nation",
  "type",
  "lmin",
  "lmax",
  "expedition",
]);

const EARTH_RADIUS_KM = 6371.0088;

export function haversineKm(lat1: number, lon1: number, lat2: number, lon2: number): number {
  const rad = Math.PI / 180;
  const dLat = (lat2 - lat1) * rad;
  const dLon = (lon2 - lon1) * rad;
  const a =
    Math.sin(dLat / 2) ** 2 +
    Math.cos(lat1 * rad) * Math.cos(lat2 * rad) * Math.sin(dLon / 2) ** 2;
  return 2 * EARTH_RADIUS_KM * Math.asin(Math.min(1, Math.sqrt(a)));
}

function listParam(params: URLSearchParams, key: string): Set<string> | null {
  const raw = params.getAll(key);
  if (raw.length === 0) return null;
  const out = new Set<string>();
  for (const chunk of raw) for (const v of chunk.split(",")) if (v) out.add(v);
  return out.size ? out : null;
}

/** Same accept-set semantics as the service's filter grammar. */
export function matchRecords(records: StubRecord[], params: URLSearchParams): StubRecord[] {
  const species = listParam(params, "species");
  const sex = listParam(params, "sex");
  const nations = listParam(params, "nation");
  const types = listParam(params, "type");
  const expeditions = listParam(params, "expedition");
  const from = params.get("from");
  const to = params.get("to");
  const bboxRaw = params.get("bbox");
  const bbox = bboxRaw ? bboxRaw.split(",").map(Number) : null;
  const lmin = params.get("lmin") !== null ? Number(params.get("lmin")) : null;
  const lmax = params.get("lmax") !== null ? Number(params.get("lmax")) : null;

  return records.filter((r) => {
    if (species && !species.has(r.species)) return false;
    if (sex && !sex.has(r.sex)) return false;
    if (nations && !nations.has(r.nation)) return false;
    if (types && !types.has(r.type)) return false;
    if (expeditions && !expeditions.has(r.expedition)) return false;
    if (from && r.date < from) return false;
    if (to && r.date > to) return false;
    if (bbox) {
      const [latMin, latMax, lonMin, lonMax] = bbox;
      if (r.lat < latMin || r.lat > latMax) return false;
      if (lonMin <= lonMax) {
        if (r.lon < lonMin || r.lon > lonMax) return false;
      } else if (r.lon < lonMin && r.lon > lonMax) {
        return false; // arc wraps the antimeridian
      }
    }
    if (lmin !== null || lmax !== null) {
      if (r.lengthFt === null) return false;
      if (lmin !== null && r.lengthFt < lmin) return false;
      if (lmax !== null && r.lengthFt > lmax) return false;
    }
    return true;
  });
}

function binIndex(lat: number, lon: number, binDeg: number): [number, number] {
  const nlat = Math.ceil(180 / binDeg);
  const nlon = Math.ceil(360 / binDeg);
  const i = Math.min(Math.floor((lat + 90) / binDeg), nlat - 1);
  const j = Math.min(Math.floor((lon + 180) / binDeg), nlon - 1);
  return [i, j];
}

function encodingClass(r: StubRecord, encoding: Encoding): string {
  const value =
    encoding === "species" ? r.species : encoding === "nation" ? r.nation : encoding === "sex" ? r.sex : r.type;
  return CLASS_TABLES[encoding][value] ?? "unknown";
}

function dominantClass(records: StubRecord[], encoding: Encoding): string {
  const counts = new Map<string, number>();
  for (const r of records) {
    const cls = encodingClass(r, encoding);
    counts.set(cls, (counts.get(cls) ?? 0) + 1);
  }
  let best = "unknown";
  let bestCount = -1;
  for (const [cls, n] of [...counts.entries()].sort()) {
    if (n > bestCount) {
      best = cls;
      bestCount = n;
    }
  }
  return best;
}

function groupByCell(matched: StubRecord[], binDeg: number): Map<string, StubRecord[]> {
  const cells = new Map<string, StubRecord[]>();
  for (const r of matched) {
    const [i, j] = binIndex(r.lat, r.lon, binDeg);
    const key = `${i}:${j}`;
    const bucket = cells.get(key);
    if (bucket) bucket.push(r);
    else cells.set(key, [r]);
  }
  return cells;
}

function byExpedition(matched: StubRecord[]): Map<string, StubRecord[]> {
  const groups = new Map<string, StubRecord[]>();
  for (const r of matched) {
    const g = groups.get(r.expedition);
    if (g) g.push(r);
    else groups.set(r.expedition, [r]);
  }
  for (const g of groups.values()) {
    g.sort((a, b) => (a.date < b.date ? -1 : a.date > b.date ? 1 : a.id - b.id));
  }
  return groups;
}

/** Track-kilometres per cell: each leg splits evenly between the cells
 * of its two endpoints. Crude next to the real rasterizer, but the
 * tests only need internal consistency, not its numbers. */
function effortByCell(matched: StubRecord[], binDeg: number): Map<string, number> {
  const effort = new Map<string, number>();
  for (const stops of byExpedition(matched).values()) {
    for (let k = 0; k + 1 < stops.length; k++) {
      const a = stops[k];
      const b = stops[k + 1];
      const km = haversineKm(a.lat, a.lon, b.lat, b.lon);
      if (km === 0) continue;
      for (const r of [a, b]) {
        const [i, j] = binIndex(r.lat, r.lon, binDeg);
        const key = `${i}:${j}`;
        effort.set(key, (effort.get(key) ?? 0) + km / 2);
      }
    }
  }
  return effort;
}

function cellCorner(key: string, binDeg: number): { i: number; j: number; latMin: number; lonMin: number } {
  const [i, j] = key.split(":").map(Number);
  return { i, j, latMin: -90 + i * binDeg, lonMin: -180 + j * binDeg };
}

function routeFeatures(matched: StubRecord[]): object[] {
  const features: object[] = [];
  for (const [expedition, stops] of byExpedition(matched)) {
    const coords: [number, number][] = [];
    for (const r of stops) {
      const prev = coords[coords.length - 1];
      if (!prev || prev[0] !== r.lon || prev[1] !== r.lat) coords.push([r.lon, r.lat]);
    }
    if (coords.length < 2) continue;
    let km = 0;
    for (let k = 0; k + 1 < coords.length; k++) {
      km += haversineKm(coords[k][1], coords[k][0], coords[k + 1][1], coords[k + 1][0]);
    }
    features.push({
      type: "Feature",
      geometry: { type: "LineString", coordinates: coords },
      properties: {
        expedition_id: expedition,
        depart_date: stops[0].date,
        arrive_date: stops[stops.length - 1].date,
        length_km: km,
      },
    });
  }
  return features;
}

const CSV_HEADER = [
  "record_id",
  "expedition_id",
  "date",
  "lat",
  "lon",
  "species",
  "sex",
  "length_ft",
  "nation",
  "expedition_type",
  "source_line",
];

function exportCsv(matched: StubRecord[]): string {
  const rows = [CSV_HEADER.join(",")];
  const ordered = [...matched].sort((a, b) =>
    a.expedition < b.expedition
      ? -1
      : a.expedition > b.expedition
        ? 1
        : a.date < b.date
          ? -1
          : a.date > b.date
            ? 1
            : a.id - b.id,
  );
  for (const r of ordered) {
    rows.push(
      [
        r.id,
        r.expedition,
        r.date,
        r.lat,
        r.lon,
        r.species,
        r.sex,
        r.lengthFt ?? "",
        r.nation,
        r.type,
        r.id,
      ].join(","),
    );
  }
  return rows.join("\r\n") + "\r\n";
}

/** Just the Response surface the API client touches; avoids depending
 * on whatever fetch classes the test environment globals carry. */
function makeResponse(body: string, status: number, headers: Record<string, string>): Response {
  const lower: Record<string, string> = {};
  for (const [k, v] of Object.entries(headers)) lower[k.toLowerCase()] = v;
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: status >= 200 && status < 300 ? "OK" : `HTTP ${status}`,
    headers: { get: (name: string) => lower[name.toLowerCase()] ?? null },
    json: async () => JSON.parse(body),
    text: async () => body,
  } as unknown as Response;
}

function json(doc: unknown, status = 200): Response {
  return makeResponse(JSON.stringify(doc), status, { "content-type": "application/json" });
}

function badParam(param: string, reason: string, status = 400): Response {
  return json({ param, reason }, status);
}

function abortError(): Error {
  const err = new Error("The operation was aborted");
  err.name = "AbortError";
  return err;
}

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve, reject) => {
    if (signal?.aborted) {
      reject(abortError());
      return;
    }
    const onAbort = () => {
      clearTimeout(timer);
      reject(abortError());
    };
    const timer = setTimeout(() => {
      signal?.removeEventListener("abort", onAbort);
      resolve();
    }, ms);
    signal?.addEventListener("abort", onAbort, { once: true });
  });
}

export interface StubOptions {
  /** Raw-level page size, to exercise the client's cursor loop. */
  pageSize?: number;
  maxRawPoints?: number;
  /** Per-request latency; aborted signals reject with AbortError. */
  delayMs?: (path: string) => number;
  /** Every request's path?query is appended here. */
  log?: string[];
}

export function createStubFetch(records: StubRecord[], opts: StubOptions = {}): FetchLike {
  const pageSize = opts.pageSize ?? 1000;
  const maxRawPoints = opts.maxRawPoints ?? 10000;

  function checkKeys(params: URLSearchParams, own: Set<string>): Response | null {
    for (const key of params.keys()) {
      if (!FILTER_KEYS.has(key) && !own.has(key)) {
        return badParam(key, "unknown parameter");
      }
    }
    return null;
  }

  function binParam(params: URLSearchParams): number | null {
    const bin = params.get("bin") !== null ? Number(params.get("bin")) : 5;
    return VALID_BINS.includes(bin) ? bin : null;
  }

  const binError = () => badParam("bin", `must be one of ${VALID_BINS.join(", ")}`);

  function handle(u: URL): Response {
    const params = u.searchParams;
    const matched = matchRecords(records, params);

    switch (u.pathname) {
      case "/meta": {
        const bad = checkKeys(params, new Set());
        if (bad) return bad;
        const years = records.map((r) => Number(r.date.slice(0, 4)));
        return json({
          count: records.length,
          filtered: matched.length,
          ingest_report: {
            total_rows: records.length,
            accepted: records.length,
            rejected: 0,
            rejection_rate: 0,
            rejection_breakdown: {},
            warnings: [],
          },
          schema_version: "1",
          codes: {
            species: [...new Set(records.map((r) => r.species))].sort(),
            sexes: [...new Set(records.map((r) => r.sex))].sort(),
            types: [...new Set(records.map((r) => r.type))].sort(),
            nations: [...new Set(records.map((r) => r.nation))].sort(),
          },
          expedition_count: new Set(records.map((r) => r.expedition)).size,
          year_range: [Math.min(...years), Math.max(...years)],
          bins: VALID_BINS,
          levels: { "0": "raw", "1": 1.0, "2": 5.0, "3": 10.0 },
          max_raw_points: maxRawPoints,
        });
      }

      case "/catches": {
        const bad = checkKeys(params, new Set(["level", "encoding", "cursor", "limit"]));
        if (bad) return bad;
        const level = params.get("level") !== null ? Number(params.get("level")) : 0;
        if (!Number.isInteger(level) || level < 0 || level > 3) {
          return badParam("level", "must be an integer in 0..3");
        }
        const encoding = (params.get("encoding") ?? "species") as Encoding;
        if (!(encoding in CLASS_TABLES)) return badParam("encoding", "unknown encoding");
        if (level === 0) {
          if (matched.length > maxRawPoints) {
            return badParam("level", `${matched.length} raw points exceed the limit`, 413);
          }
          const cursor = Number(params.get("cursor") ?? "0");
          const page = matched.slice(cursor, cursor + pageSize);
          const next = cursor + pageSize < matched.length ? cursor + pageSize : null;
          return json({
            level,
            encoding,
            total: matched.length,
            points: page.map((r) => ({
              lat: r.lat,
              lon: r.lon,
              count: 1,
              dominant_class: encodingClass(r, encoding),
            })),
            next_cursor: next,
          });
        }
        const deg = LEVEL_DEG[level];
        const points = [...groupByCell(matched, deg).entries()].map(([key, rs]) => {
          const { latMin, lonMin } = cellCorner(key, deg);
          return {
            lat: latMin + deg / 2,
            lon: lonMin + deg / 2,
            count: rs.length,
            dominant_class: dominantClass(rs, encoding),
          };
        });
        return json({
          level,
          encoding,
          total: points.reduce((s, p) => s + p.count, 0),
          points,
          next_cursor: null,
        });
      }

      case "/bins": {
        const bad = checkKeys(params, new Set(["bin", "format"]));
        if (bad) return bad;
        const bin = binParam(params);
        if (bin === null) return binError();
        const cells = [...groupByCell(matched, bin).entries()].map(([key, rs]) => {
          const { i, j, latMin, lonMin } = cellCorner(key, bin);
          const bySpecies: Record<string, number> = {};
          const bySex: Record<string, number> = {};
          let lengthSum = 0;
          let lengthN = 0;
          for (const r of rs) {
            bySpecies[r.species] = (bySpecies[r.species] ?? 0) + 1;
            bySex[r.sex] = (bySex[r.sex] ?? 0) + 1;
            if (r.lengthFt !== null) {
              lengthSum += r.lengthFt;
              lengthN += 1;
            }
          }
          return {
            i,
            j,
            lat_min: latMin,
            lon_min: lonMin,
            count: rs.length,
            by_species: bySpecies,
            by_sex: bySex,
            mean_length_ft: lengthN ? lengthSum / lengthN : null,
          };
        });
        return json({ bin_deg: bin, total: matched.length, cells });
      }

      case "/routes": {
        const bad = checkKeys(params, new Set(["cursor", "limit", "nodes"]));
        if (bad) return bad;
        const features = routeFeatures(matched);
        return json({
          type: "FeatureCollection",
          features,
          total: features.length,
          next_cursor: null,
        });
      }

      case "/effort": {
        const bad = checkKeys(params, new Set(["bin", "format"]));
        if (bad) return bad;
        const bin = binParam(params);
        if (bin === null) return binError();
        const effort = effortByCell(matched, bin);
        let total = 0;
        const cells = [...effort.entries()].map(([key, km]) => {
          const { i, j, latMin, lonMin } = cellCorner(key, bin);
          total += km;
          return { i, j, lat_min: latMin, lon_min: lonMin, effort_km: km };
        });
        return json({ bin_deg: bin, total_km: total, cells });
      }

      case "/cpue": {
        const bad = checkKeys(params, new Set(["bin", "min_effort", "format"]));
        if (bad) return bad;
        const bin = binParam(params);
        if (bin === null) return binError();
        const minEffort = Number(params.get("min_effort") ?? "0");
        if (!(minEffort >= 0)) return badParam("min_effort", "must be >= 0");
        const catches = groupByCell(matched, bin);
        const effort = effortByCell(matched, bin);
        const keys = new Set([...catches.keys(), ...effort.keys()]);
        const cells = [...keys].map((key) => {
          const { i, j, latMin, lonMin } = cellCorner(key, bin);
          const n = catches.get(key)?.length ?? 0;
          const km = effort.get(key) ?? 0;
          const defined = km >= minEffort && km > 0;
          return {
            i,
            j,
            lat_min: latMin,
            lon_min: lonMin,
            catches: n,
            effort_km: km,
            cpue: defined ? (n / km) * 1000 : null,
            defined,
            catch_without_effort: n > 0 && km === 0,
          };
        });
        return json({ bin_deg: bin, min_effort_km: minEffort, cells });
      }

      case "/timeline": {
        const bad = checkKeys(params, new Set(["interval"]));
        if (bad) return bad;
        const interval = Number(params.get("interval") ?? "1");
        if (!Number.isInteger(interval) || interval < 1) {
          return badParam("interval", "must be a positive integer");
        }
        if (matched.length === 0) return json({ interval, total: 0, buckets: [] });
        const starts = matched.map((r) => Math.floor(Number(r.date.slice(0, 4)) / interval) * interval);
        const lo = Math.min(...starts);
        const hi = Math.max(...starts);
        const buckets = [];
        for (let y = lo; y <= hi; y += interval) {
          buckets.push({ year: y, count: starts.filter((s) => s === y).length });
        }
        return json({ interval, total: matched.length, buckets });
      }

      case "/lengths": {
        const bad = checkKeys(params, new Set(["bucket"]));
        if (bad) return bad;
        const bucket = Number(params.get("bucket") ?? "5");
        if (!(bucket > 0)) return badParam("bucket", "must be positive");
        const present = matched.filter((r) => r.lengthFt !== null).map((r) => r.lengthFt as number);
        const excluded = matched.length - present.length;
        if (present.length === 0) {
          return json({ bucket_ft: bucket, total: 0, excluded, buckets: [] });
        }
        const ks = present.map((v) => Math.floor(v / bucket));
        const k0 = Math.min(...ks);
        const k1 = Math.max(...ks);
        const buckets = [];
        for (let k = k0; k <= k1; k++) {
          buckets.push({ start_ft: k * bucket, count: ks.filter((x) => x === k).length });
        }
        return json({ bucket_ft: bucket, total: present.length, excluded, buckets });
      }

      case "/export": {
        const bad = checkKeys(params, new Set());
        if (bad) return bad;
        return makeResponse(exportCsv(matched), 200, {
          "content-type": "text/csv; charset=utf-8",
          "content-disposition": 'attachment; filename="catches.csv"',
        });
      }

      default:
        return badParam("path", `no such endpoint: ${u.pathname}`, 404);
    }
  }

  return async (url, init) => {
    const u = new URL(url);
    opts.log?.push(u.pathname + u.search);
    const signal = init?.signal ?? undefined;
    const wait = opts.delayMs?.(u.pathname) ?? 0;
    if (wait > 0) await sleep(wait, signal);
    if (signal?.aborted) throw abortError();
    return handle(u);
  };
}

/** Query the stub directly and parse the JSON body; the independent
 * source of expected values in assertions. */
export async function stubJson<T>(
  fetchImpl: FetchLike,
  base: string,
  pathAndQuery: string,
): Promise<T> {
  const resp = await fetchImpl(`${base}${pathAndQuery}`);
  if (!resp.ok) throw new Error(`stub returned ${resp.status} for ${pathAndQuery}`);
  return (await resp.json()) as T;
}
