"""Shared test data builders: random filters and adversarial route corpora."""

from __future__ import annotations

import datetime as dt

import numpy as np

from whaletracks.model import (
    ExpeditionType,
    FilterSpec,
    Sex,
    Species,
)

_SPECIES = list(Species)
_SEXES = list(Sex)
_TYPES = list(ExpeditionType)


def random_date(rng, lo=1900, hi=1985) -> dt.date:
    return dt.date(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 13)), int(rng.integers(1, 29)))


def _sample(rng, pool, k) -> frozenset:
    # rng.choice would coerce enum members to numpy strings
    idx = rng.choice(len(pool), size=k, replace=False)
    return frozenset(pool[int(i)] for i in idx)


def random_filter_spec(rng, catalog=None, representable: bool = False) -> FilterSpec:
    """A random FilterSpec with each predicate present ~40% of the time.

    With representable=True the result survives render_filter /
    parse_filter round-trips: predicate sets stay non-empty and values
    come from the grammar's vocabulary.
    """
    kw = {}
    if rng.random() < 0.4:
        kw["species_set"] = _sample(rng, _SPECIES, int(rng.integers(1, 4)))
    if rng.random() < 0.3:
        kw["sex_set"] = _sample(rng, _SEXES, int(rng.integers(1, 3)))
    if rng.random() < 0.4:
        a, b = sorted((random_date(rng), random_date(rng)))
        style = rng.random()
        if style < 0.4:
            kw["date_range"] = (a, b)
        elif style < 0.7:
            kw["date_range"] = (a, None)
        else:
            kw["date_range"] = (None, b)
    if rng.random() < 0.4:
        lat_a, lat_b = sorted(rng.uniform(-90.0, 90.0, size=2))
        lon_a, lon_b = rng.uniform(-180.0, 180.0, size=2)
        if rng.random() < 0.3:
            # Wrapped across the antimeridian.
            lon_min, lon_max = max(lon_a, lon_b), min(lon_a, lon_b)
        else:
            lon_min, lon_max = min(lon_a, lon_b), max(lon_a, lon_b)
        kw["bbox"] = (float(lat_a), float(lat_b), round(float(lon_min), 4), round(float(lon_max), 4))
    if rng.random() < 0.3:
        pool = sorted(set(catalog.nations)) if catalog is not None and catalog.nations else ["norway", "japan", "ussr"]
        k = int(rng.integers(1, min(3, len(pool)) + 1))
        kw["nations"] = frozenset(str(n) for n in rng.choice(pool, size=k, replace=False))
    if rng.random() < 0.3:
        kw["expedition_types"] = _sample(rng, _TYPES, int(rng.integers(1, 3)))
    if rng.random() < 0.3:
        a, b = sorted(rng.uniform(5.0, 110.0, size=2))
        style = rng.random()
        if style < 0.5:
            kw["length_range_ft"] = (round(float(a), 1), round(float(b), 1))
        elif style < 0.75:
            kw["length_range_ft"] = (round(float(a), 1), None)
        else:
            kw["length_range_ft"] = (None, round(float(b), 1))
    if rng.random() < 0.2 and catalog is not None and catalog.expedition_ids:
        k = int(rng.integers(1, min(4, len(catalog.expedition_ids)) + 1))
        kw["expedition_ids"] = frozenset(
            str(e) for e in rng.choice(catalog.expedition_ids, size=k, replace=False)
        )
    if representable and not kw:
        kw["species_set"] = frozenset({Species.BLUE, Species.FIN})
    return FilterSpec(**kw)


def route_test_rows(rng, n_expeditions: int):
    """Raw CSV rows exercising every collapse edge case.

    Per expedition: random-walk stops, coincident repeats (same position,
    later records), same-day ties, and genuine revisits to an earlier
    position (which must open a new stop, not merge backwards).
    """
    rows = []
    for e in range(n_expeditions):
        exp_id = f"E{e:04d}"
        year = int(rng.integers(1905, 1980))
        date = dt.date(year, 1, 1) + dt.timedelta(days=int(rng.integers(0, 300)))
        lat = float(rng.uniform(-70.0, -30.0))
        lon = float(rng.uniform(-180.0, 180.0))
        visited = [(lat, lon)]
        n_stops = int(rng.integers(1, 9))
        for s in range(n_stops):
            action = rng.random()
            if s > 0:
                if action < 0.25 and len(visited) > 1:
                    # Revisit an earlier position: distinct stop again.
                    lat, lon = visited[int(rng.integers(0, len(visited) - 1))]
                elif action < 0.45:
                    # Stay put; these rows extend the current stop.
                    pass
                else:
                    lat = min(85.0, max(-85.0, lat + float(rng.uniform(-3.0, 3.0))))
                    lon = lon + float(rng.uniform(-3.0, 3.0))
                    if lon >= 180.0:
                        lon -= 360.0
                    elif lon < -180.0:
                        lon += 360.0
                    visited.append((lat, lon))
                if rng.random() < 0.7:
                    # Same-day ties across different places are legal.
                    date = date + dt.timedelta(days=int(rng.integers(0, 3)))
            for _ in range(int(rng.integers(1, 4))):
                rows.append(
                    [
                        exp_id,
                        date.isoformat(),
                        f"{lat:.4f}",
                        f"{lon:.4f}",
                        "blue",
                        "f",
                        "80.0",
                        "norway",
                        "pelagic",
                    ]
                )
    return rows
