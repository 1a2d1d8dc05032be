"""Deterministic synthetic catch corpora for tests and demos.

Two generators: a generic parameterized sampler (SynthSpec) and the
bundled progression demo, which plants per-species catch curves, length
modes, and an effort-up/catches-down trend with exact known counts.
Every generator writes a .meta.json sidecar recording what was planted.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import json
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .ingest import atomic_write

HEADER = ["expedition_id", "date", "lat", "lon", "species", "sex", "length_ft", "nation", "expedition_type"]

NATIONS = ("norway", "united_kingdom", "japan", "ussr", "netherlands", "south_africa", "usa", "australia")

_SEX_CODES = ("f", "m", "u")


@dataclasses.dataclass
class SpeciesMix:
    species: str
    weight: float
    peak_year: int
    spread_years: float
    length_mode_ft: float
    length_sd_ft: float = 4.0


def _default_mix() -> list:
    return [
        SpeciesMix("blue", 0.3, 1952, 12.0, 80.0),
        SpeciesMix("fin", 0.3, 1962, 12.0, 70.0),
        SpeciesMix("sei", 0.25, 1971, 10.0, 50.0),
        SpeciesMix("minke", 0.15, 1980, 8.0, 30.0),
    ]


@dataclasses.dataclass
class SynthSpec:
    """Parameters of the generic corpus sampler; deterministic per seed."""

    seed: int = 0
    expeditions: int = 100
    catches_per_expedition: tuple = (20, 60)
    year_range: tuple = (1900, 1985)
    species_mix: list = dataclasses.field(default_factory=_default_mix)
    nations: tuple = NATIONS
    missing_date_rate: float = 0.0
    missing_coord_rate: float = 0.0
    revisit_rate: float = 0.1

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "SynthSpec":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        mix = [SpeciesMix(**m) for m in raw.pop("species_mix", [])] or _default_mix()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown synth spec fields: {sorted(unknown)}")
        spec = cls(species_mix=mix, **{k: v for k, v in raw.items()})
        spec.catches_per_expedition = tuple(spec.catches_per_expedition)
        spec.year_range = tuple(spec.year_range)
        spec.nations = tuple(spec.nations)
        return spec


def _fmt_coord(x: float) -> str:
    return f"{x:.4f}"


def _canon_lon(lon: float) -> float:
    lon = (lon + 180.0) % 360.0 - 180.0
    return -180.0 if lon >= 180.0 else lon


def _length_field(rng, mode: float, sd: float, blank_rate: float = 0.03) -> str:
    if rng.random() < blank_rate:
        return ""
    val = min(118.0, max(6.0, rng.normal(mode, sd)))
    return f"{val:.1f}"


def _sex_field(rng) -> str:
    r = rng.random()
    return _SEX_CODES[0] if r < 0.48 else _SEX_CODES[1] if r < 0.96 else _SEX_CODES[2]


class _Walk:
    """Random-walk stop positions within a latitude band."""

    def __init__(self, rng, base_lat: float, base_lon: float, band: float = 12.0):
        self.rng = rng
        self.lat = base_lat
        self.lon = _canon_lon(base_lon)
        self.lat_lo = base_lat - band
        self.lat_hi = base_lat + band

    def advance(self, step_lo: float, step_hi: float) -> None:
        step = self.rng.uniform(step_lo, step_hi)
        theta = self.rng.uniform(0.0, 2.0 * math.pi)
        dlat = step * math.sin(theta) * 0.6
        if not (self.lat_lo <= self.lat + dlat <= self.lat_hi):
            dlat = -dlat
        self.lat = min(85.0, max(-85.0, self.lat + dlat))
        self.lon = _canon_lon(self.lon + step * math.cos(theta))


# -- generic sampler ----------------------------------------------------------


def generate_rows(spec: SynthSpec):
    """Sample a corpus from SynthSpec; returns (header, rows, meta).

    meta["movements"] counts planted position changes; it is ground
    truth for route counts only when both defect rates are zero, because
    rejected rows change the reconstructed stop sequences.
    """
    rng = np.random.default_rng(spec.seed)
    mix = spec.species_mix
    weights = np.array([m.weight for m in mix], dtype=np.float64)
    year_lo, year_hi = spec.year_range
    rows = []
    movements = 0
    missing_date = 0
    missing_coord = 0

    for e in range(spec.expeditions):
        year = int(rng.integers(year_lo, year_hi + 1))
        era = weights * np.array(
            [math.exp(-0.5 * ((year - m.peak_year) / m.spread_years) ** 2) for m in mix]
        )
        if era.sum() <= 0:
            era = weights
        sp = mix[int(rng.choice(len(mix), p=era / era.sum()))]
        exp_id = f"{sp.species[:2].upper()}-{year}-{e:04d}"
        nation = spec.nations[int(rng.integers(len(spec.nations)))]
        etype = "pelagic" if rng.random() < 0.8 else "land"
        n = int(rng.integers(spec.catches_per_expedition[0], spec.catches_per_expedition[1] + 1))

        walk = _Walk(rng, rng.uniform(-65.0, -35.0), rng.uniform(-180.0, 180.0))
        day = 5 + int(rng.integers(0, 40))
        date = dt.date(year, 1, 1) + dt.timedelta(days=day)
        remaining = n
        first_stop = True
        while remaining > 0:
            if not first_stop:
                if rng.random() < spec.revisit_rate:
                    # Same position again: collapses into the previous stop
                    # unless catches at another place intervened.
                    pass
                else:
                    walk.advance(0.5, 3.0)
                    movements += 1
                date = date + dt.timedelta(days=int(rng.integers(0, 3)))
            first_stop = False
            take = min(int(rng.integers(1, 5)), remaining)
            remaining -= take
            for _ in range(take):
                date_s = date.isoformat()
                lat_s = _fmt_coord(walk.lat)
                lon_s = _fmt_coord(walk.lon)
                if spec.missing_date_rate and rng.random() < spec.missing_date_rate:
                    date_s = ""
                    missing_date += 1
                elif spec.missing_coord_rate and rng.random() < spec.missing_coord_rate:
                    lat_s = ""
                    lon_s = ""
                    missing_coord += 1
                rows.append(
                    [
                        exp_id,
                        date_s,
                        lat_s,
                        lon_s,
                        sp.species,
                        _sex_field(rng),
                        _length_field(rng, sp.length_mode_ft, sp.length_sd_ft),
                        nation,
                        etype,
                    ]
                )

    meta = {
        "seed": spec.seed,
        "records": len(rows),
        "expeditions": spec.expeditions,
        "movements": movements,
        "movements_exact": spec.missing_date_rate == 0.0 and spec.missing_coord_rate == 0.0,
        "defects": {"missing_date": missing_date, "missing_coords": missing_coord},
    }
    return HEADER, rows, meta


# -- bundled progression demo --------------------------------------------------

DEMO_YEARS = (1900, 1985)

# (peak_year, half_width_years, per-year scale, home latitude)
_TRIANGLE_PLANS = {
    "blue": (1952, 25, 40, -58.0),
    "fin": (1962, 25, 40, -52.0),
    "sei": (1971, 25, 40, -45.0),
}

# Catch plateau placed hard against the corpus end so the 1980s stay the
# peak decade despite having only six years of data.
_MINKE_COUNTS = {
    1972: 50, 1973: 100, 1974: 150, 1975: 200, 1976: 250, 1977: 300, 1978: 350, 1979: 400,
    1980: 1100, 1981: 1050, 1982: 1000, 1983: 950, 1984: 900, 1985: 850,
}
_MINKE_LAT = -62.0

_BACKGROUND = {"sperm": (150, 45.0, -10.0), "humpback": (100, 45.0, -30.0)}

_LENGTH_MODES = {"blue": 80.0, "fin": 70.0, "sei": 50.0, "minke": 30.0, "sperm": 45.0, "humpback": 45.0}

# Last year of each species' peak decade; later years use decline-phase
# behavior (fewer catches per stop, much longer legs).
_PEAK_DECADE_END = {"blue": 1959, "fin": 1969, "sei": 1979, "minke": 1989, "sperm": 9999, "humpback": 9999}

_PEAK_CPS = (4, 5, 6)
_DECLINE_CPS = (1, 2)
_PEAK_STEP = (0.4, 0.9)
_DECLINE_STEP = (3.5, 7.0)


def _demo_count(species: str, year: int) -> int:
    if species in _TRIANGLE_PLANS:
        peak, width, scale, _ = _TRIANGLE_PLANS[species]
        return scale * max(0, width - abs(year - peak))
    if species == "minke":
        return _MINKE_COUNTS.get(year, 0)
    per_year, _, _ = _BACKGROUND[species]
    return per_year


def _demo_home_lat(species: str) -> float:
    if species in _TRIANGLE_PLANS:
        return _TRIANGLE_PLANS[species][3]
    if species == "minke":
        return _MINKE_LAT
    return _BACKGROUND[species][2]


def generate_progression_demo(seed: int = 42):
    """The bundled demo corpus: ~100k records, 1900-1985.

    Planted structure, recorded in the sidecar meta:
      - per-species catch curves peaking in order blue, fin, sei, minke
        (1952, 1962, 1971, 1980), distinct at 1, 5, and 10 year buckets;
      - length modes 80/70/50/30 ft;
      - after each species' peak decade, expeditions catch less per stop
        but travel much farther, so effort rises while catches fall.
    """
    rng = np.random.default_rng(seed)
    species_order = ["blue", "fin", "sei", "minke", "sperm", "humpback"]
    rows = []
    movements = 0
    n_expeditions = 0
    species_records = {s: 0 for s in species_order}

    for year in range(DEMO_YEARS[0], DEMO_YEARS[1] + 1):
        for species in species_order:
            n = _demo_count(species, year)
            if n == 0:
                continue
            peak_phase = year <= _PEAK_DECADE_END[species]
            per_exp = 250 if peak_phase else 100
            n_exp = max(1, round(n / per_exp))
            base, extra = divmod(n, n_exp)
            cps_cycle = _PEAK_CPS if peak_phase else _DECLINE_CPS
            step_lo, step_hi = _PEAK_STEP if peak_phase else _DECLINE_STEP
            mode = _LENGTH_MODES[species]

            for e in range(n_exp):
                quota = base + (1 if e < extra else 0)
                if quota == 0:
                    continue
                n_expeditions += 1
                exp_id = f"{species[:2].upper()}-{year}-{e:02d}"
                nation = NATIONS[int(rng.integers(len(NATIONS)))]
                etype = "pelagic" if rng.random() < 0.85 else "land"
                base_lon = 177.0 + rng.uniform(0.0, 6.0) if rng.random() < 0.15 else rng.uniform(-180.0, 180.0)
                walk = _Walk(rng, _demo_home_lat(species) + rng.uniform(-4.0, 4.0), base_lon)
                date = dt.date(year, 1, 1) + dt.timedelta(days=5 + int(rng.integers(0, 40)))

                remaining = quota
                stop = 0
                while remaining > 0:
                    if stop > 0:
                        walk.advance(step_lo, step_hi)
                        movements += 1
                        date = date + dt.timedelta(days=int(rng.integers(1, 4)))
                    take = min(cps_cycle[stop % len(cps_cycle)], remaining)
                    remaining -= take
                    stop += 1
                    for _ in range(take):
                        rows.append(
                            [
                                exp_id,
                                date.isoformat(),
                                _fmt_coord(walk.lat),
                                _fmt_coord(walk.lon),
                                species,
                                _sex_field(rng),
                                _length_field(rng, mode, 4.0),
                                nation,
                                etype,
                            ]
                        )
                        species_records[species] += 1

    meta = {
        "seed": seed,
        "records": len(rows),
        "expeditions": n_expeditions,
        "movements": movements,
        "movements_exact": True,
        "defects": {"missing_date": 0, "missing_coords": 0},
        "species_records": species_records,
        "planted": {
            "peak_years": {"blue": 1952, "fin": 1962, "sei": 1971, "minke": 1980},
            "length_modes_ft": {k: _LENGTH_MODES[k] for k in ("blue", "fin", "sei", "minke")},
            "blue_peak_decade": 1950,
            "blue_decline_decade": 1960,
        },
    }
    return HEADER, rows, meta


def generate_defect_corpus(seed: int, n_rows: int = 1000, n_defects: int = 14):
    """Clean corpus with exactly n_defects rows made rejectable.

    Defects alternate between blanked dates and blanked coordinates, so
    ingest must reject exactly n_defects rows.
    """
    if n_defects > n_rows:
        raise ValueError("more defects than rows")
    spec = SynthSpec(
        seed=seed,
        expeditions=max(1, n_rows // 30),
        catches_per_expedition=(30, 40),
        revisit_rate=0.05,
    )
    header, rows, _ = generate_rows(spec)
    while len(rows) < n_rows:
        spec = dataclasses.replace(spec, expeditions=spec.expeditions + 10)
        header, rows, _ = generate_rows(spec)
    rows = rows[:n_rows]

    rng = np.random.default_rng(seed + 1)
    chosen = rng.choice(n_rows, size=n_defects, replace=False)
    n_dates = 0
    n_coords = 0
    for k, r in enumerate(sorted(int(c) for c in chosen)):
        if k % 2 == 0:
            rows[r][1] = ""
            n_dates += 1
        else:
            rows[r][2] = ""
            rows[r][3] = ""
            n_coords += 1
    meta = {
        "seed": seed,
        "records": n_rows,
        "movements": None,
        "movements_exact": False,
        "defects": {"missing_date": n_dates, "missing_coords": n_coords},
    }
    return header, rows, meta


def write_corpus(path: Union[str, Path], header, rows, meta: Optional[dict] = None) -> None:
    """CSV plus a .meta.json sidecar, both written atomically."""

    def _write(f):
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)

    atomic_write(path, _write)
    if meta is not None:
        sidecar = str(path) + ".meta.json"
        atomic_write(sidecar, lambda f: f.write(json.dumps(meta, indent=2, sort_keys=True) + "\n"))
