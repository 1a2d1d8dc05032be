/** Color-class tables and palettes.
 *
 * CLASS_TABLES is a verbatim copy of the service's class-assignment
 * asset (src/whaletracks/data/color_classes.json in the engine repo);
 * a test compares the two files so they cannot drift apart.
 */

export type Encoding = "species" | "nation" | "sex" | "type";

export const ENCODINGS: Encoding[] = ["species", "nation", "sex", "type"];

export const CLASS_TABLES: Record<Encoding, Record<string, string>> = {
  species: {
    blue: "balaenopteridae",
    fin: "balaenopteridae",
    sei: "balaenopteridae",
    minke: "balaenopteridae",
    bryde: "balaenopteridae",
    humpback: "balaenopteridae",
    sperm: "physeteridae",
    right: "balaenidae",
    bowhead: "balaenidae",
    gray: "eschrichtiidae",
    other: "other",
    unknown: "unknown",
  },
  nation: {
    norway: "europe",
    united_kingdom: "europe",
    netherlands: "europe",
    germany: "europe",
    denmark: "europe",
    iceland: "europe",
    ussr: "europe",
    japan: "asia",
    south_korea: "asia",
    china: "asia",
    usa: "americas",
    canada: "americas",
    panama: "americas",
    argentina: "americas",
    chile: "americas",
    brazil: "americas",
    peru: "americas",
    south_africa: "africa",
    australia: "oceania",
    new_zealand: "oceania",
    unknown: "unknown",
  },
  sex: {
    female: "female",
    male: "male",
    unknown: "unknown",
  },
  type: {
    land: "land",
    pelagic: "pelagic",
    unknown: "unknown",
  },
};

/** One fixed color per class label, shared by circles and legends. */
const CLASS_COLORS: Record<string, string> = {
  // species families
  balaenopteridae: "#2166ac",
  physeteridae: "#b2182b",
  balaenidae: "#762a83",
  eschrichtiidae: "#1b7837",
  // continents
  europe: "#2166ac",
  asia: "#b2182b",
  americas: "#1b7837",
  africa: "#e08214",
  oceania: "#762a83",
  // sex
  female: "#c51b7d",
  male: "#4d9221",
  // expedition type
  land: "#8c510a",
  pelagic: "#01665e",
  // shared fallbacks
  other: "#636363",
  unknown: "#bdbdbd",
};

export function classColor(label: string): string {
  return CLASS_COLORS[label] ?? CLASS_COLORS.unknown;
}

export function classesFor(encoding: Encoding): string[] {
  return [...new Set(Object.values(CLASS_TABLES[encoding]))];
}

/** Sequential ramp for count/effort/cpue fills; t in [0, 1]. */
export function rampColor(t: number): string {
  const x = Math.max(0, Math.min(1, t));
  // light yellow to dark red, perceptually ordered enough for cells
  const stops: [number, [number, number, number]][] = [
    [0.0, [255, 255, 204]],
    [0.35, [254, 217, 118]],
    [0.65, [253, 141, 60]],
    [1.0, [177, 0, 38]],
  ];
  let lo = stops[0];
  let hi = stops[stops.length - 1];
  for (let k = 0; k + 1 < stops.length; k++) {
    if (x >= stops[k][0] && x <= stops[k + 1][0]) {
      lo = stops[k];
      hi = stops[k + 1];
      break;
    }
  }
  const span = hi[0] - lo[0] || 1;
  const u = (x - lo[0]) / span;
  const rgb = lo[1].map((c, k) => Math.round(c + (hi[1][k] - c) * u));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

export const ROUTE_COLOR = "#9e9e9e";
