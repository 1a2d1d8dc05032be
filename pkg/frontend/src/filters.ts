/** Client-side mirror of the service's filter grammar.
 *
 * A FilterState holds at most one value per grammar key; list-valued
 * keys are kept as sets and serialized sorted so that two states with
 * the same content always produce the same query string (the service
 * caches on it, and the tests compare on it).
 */

export interface FilterState {
  species: Set<string>;
  sex: Set<string>;
  types: Set<string>;
  nations: Set<string>;
  expeditions: Set<string>;
  dateFrom: string | null; // ISO yyyy-mm-dd
  dateTo: string | null;
  bbox: [number, number, number, number] | null; // latMin, latMax, lonMin, lonMax
  lengthMinFt: number | null;
  lengthMaxFt: number | null;
}

export function emptyFilter(): FilterState {
  return {
    species: new Set(),
    sex: new Set(),
    types: new Set(),
    nations: new Set(),
    expeditions: new Set(),
    dateFrom: null,
    dateTo: null,
    bbox: null,
    lengthMinFt: null,
    lengthMaxFt: null,
  };
}

export function cloneFilter(f: FilterState): FilterState {
  return {
    species: new Set(f.species),
    sex: new Set(f.sex),
    types: new Set(f.types),
    nations: new Set(f.nations),
    expeditions: new Set(f.expeditions),
    dateFrom: f.dateFrom,
    dateTo: f.dateTo,
    bbox: f.bbox ? [...f.bbox] : null,
    lengthMinFt: f.lengthMinFt,
    lengthMaxFt: f.lengthMaxFt,
  };
}

function joined(values: Set<string>): string {
  return [...values].sort().join(",");
}

/** Grammar parameters only; endpoint-specific keys are appended by the
 * API client. */
export function filterParams(f: FilterState): URLSearchParams {
  const p = new URLSearchParams();
  if (f.species.size) p.set("species", joined(f.species));
  if (f.sex.size) p.set("sex", joined(f.sex));
  if (f.types.size) p.set("type", joined(f.types));
  if (f.nations.size) p.set("nation", joined(f.nations));
  if (f.expeditions.size) p.set("expedition", joined(f.expeditions));
  if (f.dateFrom) p.set("from", f.dateFrom);
  if (f.dateTo) p.set("to", f.dateTo);
  if (f.bbox) p.set("bbox", f.bbox.join(","));
  if (f.lengthMinFt !== null) p.set("lmin", String(f.lengthMinFt));
  if (f.lengthMaxFt !== null) p.set("lmax", String(f.lengthMaxFt));
  return p;
}

export function filterKey(f: FilterState): string {
  return filterParams(f).toString();
}

export function sameFilter(a: FilterState, b: FilterState): boolean {
  return filterKey(a) === filterKey(b);
}
