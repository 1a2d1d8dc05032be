"""Spatial binning, point aggregation levels, timeline and length histograms."""

from __future__ import annotations

import dataclasses
import functools
import json
from importlib import resources
from typing import Optional

import numpy as np

from ._kernels import grid_shape
from .model import (
    Catalog,
    FilterSpec,
    SEX_ORDER,
    SPECIES_ORDER,
    TYPE_ORDER,
    accept_mask,
    canonical_order,
)

BIN_CHOICES = (1.0, 2.0, 5.0, 10.0)

# Aggregation level -> bin width; level 0 is raw points.
LEVEL_BIN_DEG = {0: None, 1: 1.0, 2: 5.0, 3: 10.0}

ENCODINGS = ("species", "nation", "sex", "type")


def bin_index(lat: float, lon: float, bin_deg: float) -> tuple:
    """Cell (i, j) of a coordinate; the lat = 90 edge clamps to the top row."""
    nlat, nlon = grid_shape(bin_deg)
    i = min(int((lat + 90.0) / bin_deg), nlat - 1)
    j = min(int((lon + 180.0) / bin_deg), nlon - 1)
    return i, j


def bin_indices(lat: np.ndarray, lon: np.ndarray, bin_deg: float):
    nlat, nlon = grid_shape(bin_deg)
    ii = np.minimum(((lat + 90.0) / bin_deg).astype(np.int64), nlat - 1)
    jj = np.minimum(((lon + 180.0) / bin_deg).astype(np.int64), nlon - 1)
    return ii, jj


@dataclasses.dataclass(frozen=True)
class CellAggregate:
    count: int
    by_species: dict
    by_sex: dict
    mean_length_ft: Optional[float]


class SpatialBinGrid:
    """Sparse equal-angle grid of catch aggregates.

    Cells are kept in (i, j) sorted order so serialization is
    deterministic.
    """

    def __init__(self, bin_deg, ii, jj, counts, species_counts, sex_counts, length_sum, length_n):
        self.bin_deg = float(bin_deg)
        self.ii = ii
        self.jj = jj
        self.counts = counts
        self.species_counts = species_counts
        self.sex_counts = sex_counts
        self.length_sum = length_sum
        self.length_n = length_n

    def __len__(self) -> int:
        return int(self.ii.size)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def cell_aggregate(self, k: int) -> CellAggregate:
        by_species = {
            SPECIES_ORDER[c].value: int(n)
            for c, n in enumerate(self.species_counts[k])
            if n > 0
        }
        by_sex = {SEX_ORDER[c].value: int(n) for c, n in enumerate(self.sex_counts[k]) if n > 0}
        mean = float(self.length_sum[k] / self.length_n[k]) if self.length_n[k] > 0 else None
        return CellAggregate(int(self.counts[k]), by_species, by_sex, mean)

    def cells(self):
        for k in range(len(self)):
            yield (int(self.ii[k]), int(self.jj[k])), self.cell_aggregate(k)

    def cell(self, i: int, j: int) -> Optional[CellAggregate]:
        _, nlon = grid_shape(self.bin_deg)
        flat = self.ii * nlon + self.jj
        k = np.searchsorted(flat, i * nlon + j)
        if k < flat.size and flat[k] == i * nlon + j:
            return self.cell_aggregate(int(k))
        return None

    def count_grid(self) -> np.ndarray:
        grid = np.zeros(grid_shape(self.bin_deg), dtype=np.int64)
        grid[self.ii, self.jj] = self.counts
        return grid

    def to_dict(self) -> dict:
        cells = []
        for k in range(len(self)):
            agg = self.cell_aggregate(k)
            i, j = int(self.ii[k]), int(self.jj[k])
            cells.append(
                {
                    "i": i,
                    "j": j,
                    "lat_min": i * self.bin_deg - 90.0,
                    "lon_min": j * self.bin_deg - 180.0,
                    "count": agg.count,
                    "by_species": agg.by_species,
                    "by_sex": agg.by_sex,
                    "mean_length_ft": None if agg.mean_length_ft is None else round(agg.mean_length_ft, 2),
                }
            )
        return {"bin_deg": self.bin_deg, "total": self.total, "cells": cells}

    def to_geojson(self) -> dict:
        features = []
        for entry in self.to_dict()["cells"]:
            features.append(
                {
                    "type": "Feature",
                    "geometry": cell_polygon(entry["lat_min"], entry["lon_min"], self.bin_deg),
                    "properties": {k: v for k, v in entry.items() if k not in ("lat_min", "lon_min")},
                }
            )
        return {"type": "FeatureCollection", "features": features}


def cell_polygon(lat_min: float, lon_min: float, bin_deg: float) -> dict:
    lat_max = lat_min + bin_deg
    lon_max = lon_min + bin_deg
    return {
        "type": "Polygon",
        "coordinates": [[
            [lon_min, lat_min],
            [lon_max, lat_min],
            [lon_max, lat_max],
            [lon_min, lat_max],
            [lon_min, lat_min],
        ]],
    }


def bin_catches(catalog: Catalog, spec: Optional[FilterSpec], bin_deg: float) -> SpatialBinGrid:
    """Aggregate the accept-set into a sparse grid of per-cell counts."""
    if spec is None:
        spec = FilterSpec()
    idx = np.nonzero(accept_mask(catalog, spec))[0]
    _, nlon = grid_shape(bin_deg)
    ii, jj = bin_indices(catalog.lat[idx], catalog.lon[idx], bin_deg)
    keys, inverse, counts = np.unique(ii * nlon + jj, return_inverse=True, return_counts=True)
    n_cells = keys.size

    species_counts = np.zeros((n_cells, len(SPECIES_ORDER)), dtype=np.int64)
    np.add.at(species_counts, (inverse, catalog.species_code[idx].astype(np.int64)), 1)
    sex_counts = np.zeros((n_cells, len(SEX_ORDER)), dtype=np.int64)
    np.add.at(sex_counts, (inverse, catalog.sex_code[idx].astype(np.int64)), 1)

    lengths = catalog.length_ft[idx]
    present = ~np.isnan(lengths)
    length_sum = np.zeros(n_cells, dtype=np.float64)
    length_n = np.zeros(n_cells, dtype=np.int64)
    np.add.at(length_sum, inverse[present], lengths[present])
    np.add.at(length_n, inverse[present], 1)

    return SpatialBinGrid(
        bin_deg, keys // nlon, keys % nlon, counts.astype(np.int64),
        species_counts, sex_counts, length_sum, length_n,
    )


@functools.lru_cache(maxsize=1)
def color_classes() -> dict:
    """Class-assignment tables for the color encodings, loaded once."""
    path = resources.files("whaletracks").joinpath("data/color_classes.json")
    with path.open("r", encoding="utf-8") as f:
        return json.load(f)


def _record_classes(catalog: Catalog, idx: np.ndarray, encoding: str) -> np.ndarray:
    """Class label of each record under a color encoding."""
    table = color_classes()[encoding]
    if encoding == "species":
        values = [s.value for s in SPECIES_ORDER]
        codes = catalog.species_code[idx].astype(np.int64)
    elif encoding == "sex":
        values = [s.value for s in SEX_ORDER]
        codes = catalog.sex_code[idx].astype(np.int64)
    elif encoding == "type":
        values = [t.value for t in TYPE_ORDER]
        codes = catalog.type_code[idx].astype(np.int64)
    elif encoding == "nation":
        values = list(catalog.nations)
        codes = catalog.nation_code[idx].astype(np.int64)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    lut = np.asarray([table.get(v, "unknown") for v in values], dtype=object)
    return lut[codes]


@dataclasses.dataclass(frozen=True)
class ClusterPoint:
    lat: float
    lon: float
    count: int
    dominant_class: str


def aggregate_points(
    catalog: Catalog,
    spec: Optional[FilterSpec],
    level: int,
    encoding: str = "species",
) -> list:
    """Points for display: raw at level 0, one cluster per cell above.

    Clusters sit at the arithmetic centroid of their member records
    (cells never span the antimeridian, so the mean is safe) and carry
    the modal class of the chosen color encoding; ties break to the
    lexicographically smallest class.
    """
    if level not in LEVEL_BIN_DEG:
        raise ValueError(f"level must be one of {sorted(LEVEL_BIN_DEG)}")
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}")
    if spec is None:
        spec = FilterSpec()
    idx = np.nonzero(accept_mask(catalog, spec))[0]
    classes = _record_classes(catalog, idx, encoding)

    if level == 0:
        order = canonical_order(catalog, idx)
        pos = np.empty(len(catalog), dtype=np.int64)
        pos[idx] = np.arange(idx.size)
        return [
            ClusterPoint(float(catalog.lat[r]), float(catalog.lon[r]), 1, str(classes[pos[r]]))
            for r in order
        ]

    bin_deg = LEVEL_BIN_DEG[level]
    _, nlon = grid_shape(bin_deg)
    ii, jj = bin_indices(catalog.lat[idx], catalog.lon[idx], bin_deg)
    keys, inverse, counts = np.unique(ii * nlon + jj, return_inverse=True, return_counts=True)

    lat_sum = np.zeros(keys.size)
    lon_sum = np.zeros(keys.size)
    np.add.at(lat_sum, inverse, catalog.lat[idx])
    np.add.at(lon_sum, inverse, catalog.lon[idx])

    class_names, class_ids = np.unique(classes.astype(str), return_inverse=True)
    class_counts = np.zeros((keys.size, class_names.size), dtype=np.int64)
    np.add.at(class_counts, (inverse, class_ids), 1)
    # np.unique sorts class names, so argmax resolves ties to the
    # lexicographically smallest class.
    dominant = class_names[np.argmax(class_counts, axis=1)]

    return [
        ClusterPoint(
            float(lat_sum[k] / counts[k]),
            float(lon_sum[k] / counts[k]),
            int(counts[k]),
            str(dominant[k]),
        )
        for k in range(keys.size)
    ]


def timeline_histogram(catalog: Catalog, spec: Optional[FilterSpec], interval_years: int) -> list:
    """(bucket_start_year, count) pairs, zero-filled across the data span."""
    if interval_years < 1:
        raise ValueError("interval_years must be >= 1")
    if spec is None:
        spec = FilterSpec()
    years = catalog.year[accept_mask(catalog, spec)]
    if years.size == 0:
        return []
    buckets = (years // interval_years) * interval_years
    b0 = int(buckets.min())
    b1 = int(buckets.max())
    counts = np.bincount((buckets - b0) // interval_years, minlength=(b1 - b0) // interval_years + 1)
    return [(b0 + k * interval_years, int(c)) for k, c in enumerate(counts)]


def length_histogram(catalog: Catalog, spec: Optional[FilterSpec], bucket_ft: float):
    """Zero-filled (bucket_start_ft, count) pairs plus the no-length count."""
    if bucket_ft <= 0:
        raise ValueError("bucket_ft must be positive")
    if spec is None:
        spec = FilterSpec()
    lengths = catalog.length_ft[accept_mask(catalog, spec)]
    present = lengths[~np.isnan(lengths)]
    excluded = int(lengths.size - present.size)
    if present.size == 0:
        return [], excluded
    k = np.floor(present / bucket_ft).astype(np.int64)
    k0 = int(k.min())
    counts = np.bincount(k - k0)
    hist = [(float((k0 + n) * bucket_ft), int(c)) for n, c in enumerate(counts)]
    return hist, excluded
