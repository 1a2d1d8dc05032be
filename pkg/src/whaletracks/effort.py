"""Search-effort rasters and effort-normalized catch (CPUE) surfaces.

Effort is accumulated route length (km) per grid cell. CPUE divides
catch counts by that effort; cells under a minimum effort threshold are
undefined, which is deliberately distinct from zero.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
from typing import Optional

import numpy as np

from . import _kernels
from .grids import SpatialBinGrid, cell_polygon
from .model import FilterSpec, accept_mask
from .routes import CatchGraph, RouteEdge

DEFAULT_MIN_EFFORT_KM = 100.0


@dataclasses.dataclass(frozen=True)
class DiffusionParams:
    """Retention-mixing diffusion: alpha in (0, 1), iterations >= 0."""

    alpha: float
    iterations: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


class EffortRaster:
    """Dense-backed sparse raster of effort kilometers per cell."""

    def __init__(self, bin_deg: float, grid: np.ndarray):
        self.bin_deg = float(bin_deg)
        self.grid = grid

    @property
    def total_km(self) -> float:
        return float(self.grid.sum())

    def cells(self):
        """((i, j), effort_km) for occupied cells, in (i, j) order."""
        ii, jj = np.nonzero(self.grid)
        for i, j in zip(ii, jj):
            yield (int(i), int(j)), float(self.grid[i, j])

    def to_dict(self) -> dict:
        cells = [
            {
                "i": i,
                "j": j,
                "lat_min": i * self.bin_deg - 90.0,
                "lon_min": j * self.bin_deg - 180.0,
                "effort_km": round(km, 6),
            }
            for (i, j), km in self.cells()
        ]
        return {"bin_deg": self.bin_deg, "total_km": round(self.total_km, 6), "cells": cells}

    def to_geojson(self) -> dict:
        features = [
            {
                "type": "Feature",
                "geometry": cell_polygon(c["lat_min"], c["lon_min"], self.bin_deg),
                "properties": {"i": c["i"], "j": c["j"], "effort_km": c["effort_km"]},
            }
            for c in self.to_dict()["cells"]
        ]
        return {"type": "FeatureCollection", "features": features}


def rasterize_edge(edge: RouteEdge, bin_deg: float) -> list:
    """Per-cell length contributions of one edge, as [((i, j), km), ...].

    Contributions sum to edge.length_km up to float accumulation; the
    arc is the shorter great circle between the stops.
    """
    return _kernels.edge_cell_contributions(
        edge.from_stop.lat, edge.from_stop.lon,
        edge.to_stop.lat, edge.to_stop.lon,
        edge.length_km, bin_deg,
    )


def _passing_expeditions(graph: CatchGraph, spec: FilterSpec) -> np.ndarray:
    """Codes of expeditions with at least one record matching the filter."""
    mask = accept_mask(graph.catalog, spec)
    return np.unique(graph.catalog.expedition_code[mask]).astype(np.int64)


def select_edges(
    graph: CatchGraph,
    spec: Optional[FilterSpec] = None,
    date_range: Optional[tuple] = None,
) -> np.ndarray:
    """Boolean mask of edges whose expedition passes the filter and whose
    [depart, arrive] interval intersects date_range."""
    sel = np.ones(graph.n_edges, dtype=bool)
    if spec is not None and not spec.is_empty():
        sel &= np.isin(graph.edge_exp_code, _passing_expeditions(graph, spec))
    if date_range is not None:
        lo, hi = date_range
        if lo is not None:
            sel &= graph.edge_arrive >= lo.toordinal()
        if hi is not None:
            sel &= graph.edge_depart <= hi.toordinal()
    return sel


def effort_raster(
    graph: CatchGraph,
    spec: Optional[FilterSpec] = None,
    bin_deg: float = 5.0,
    date_range: Optional[tuple] = None,
) -> EffortRaster:
    """Sum rasterized length contributions of the selected edges.

    Callers normally pass the filter's own date_range; it is a separate
    argument because edges are selected by interval intersection, not by
    their member catch dates.
    """
    sel = select_edges(graph, spec, date_range)
    grid = _kernels.rasterize_edges(
        graph.node_lat[graph.edge_src[sel]],
        graph.node_lon[graph.edge_src[sel]],
        graph.node_lat[graph.edge_dst[sel]],
        graph.node_lon[graph.edge_dst[sel]],
        graph.edge_length_km[sel],
        bin_deg,
    )
    return EffortRaster(bin_deg, grid)


class CpueGrid:
    """Catches per 1000 km of effort on the union of occupied cells."""

    def __init__(self, bin_deg, ii, jj, catches, effort_km, min_effort_km):
        self.bin_deg = float(bin_deg)
        self.ii = ii
        self.jj = jj
        self.catches = catches
        self.effort_km = effort_km
        self.min_effort_km = float(min_effort_km)
        self.defined = effort_km >= min_effort_km
        self.cpue = np.where(self.defined, catches / np.maximum(effort_km, 1e-300) * 1000.0, np.nan)
        # Catches in cells without usable effort: a data-quality signal,
        # since every multi-stop expedition leaves effort where it catches.
        self.catch_without_effort = (catches > 0) & ~self.defined

    def __len__(self) -> int:
        return int(self.ii.size)

    def cells(self):
        for k in range(len(self)):
            yield (int(self.ii[k]), int(self.jj[k])), {
                "catches": int(self.catches[k]),
                "effort_km": float(self.effort_km[k]),
                "cpue": float(self.cpue[k]) if self.defined[k] else None,
                "defined": bool(self.defined[k]),
            }

    def to_dict(self) -> dict:
        cells = []
        for k in range(len(self)):
            i, j = int(self.ii[k]), int(self.jj[k])
            defined = bool(self.defined[k])
            cells.append(
                {
                    "i": i,
                    "j": j,
                    "lat_min": i * self.bin_deg - 90.0,
                    "lon_min": j * self.bin_deg - 180.0,
                    "catches": int(self.catches[k]),
                    "effort_km": round(float(self.effort_km[k]), 6),
                    "cpue": round(float(self.cpue[k]), 6) if defined else None,
                    "defined": defined,
                    "catch_without_effort": bool(self.catch_without_effort[k]),
                }
            )
        return {
            "bin_deg": self.bin_deg,
            "min_effort_km": self.min_effort_km,
            "cells": cells,
        }

    def to_geojson(self) -> dict:
        features = [
            {
                "type": "Feature",
                "geometry": cell_polygon(c["lat_min"], c["lon_min"], self.bin_deg),
                "properties": {
                    k: c[k] for k in ("i", "j", "catches", "effort_km", "cpue", "defined")
                },
            }
            for c in self.to_dict()["cells"]
        ]
        return {"type": "FeatureCollection", "features": features}


def cpue_grid(
    catch_grid: SpatialBinGrid,
    effort: EffortRaster,
    min_effort_km: float = DEFAULT_MIN_EFFORT_KM,
) -> CpueGrid:
    """Join catch counts with effort on matching grids."""
    if catch_grid.bin_deg != effort.bin_deg:
        raise ValueError(
            f"bin_deg mismatch: catches {catch_grid.bin_deg}, effort {effort.bin_deg}"
        )
    nlon = effort.grid.shape[1]
    eff_i, eff_j = np.nonzero(effort.grid)
    keys = np.union1d(catch_grid.ii * nlon + catch_grid.jj, eff_i * nlon + eff_j)
    ii = keys // nlon
    jj = keys % nlon
    catch_dense = catch_grid.count_grid()
    return CpueGrid(
        catch_grid.bin_deg,
        ii.astype(np.int64),
        jj.astype(np.int64),
        catch_dense[ii, jj],
        effort.grid[ii, jj],
        min_effort_km,
    )


def diffuse_effort(graph: CatchGraph, node_weights, params: DiffusionParams) -> np.ndarray:
    """Spread node masses along the graph, favoring nearer neighbors.

    Each iteration a node keeps (1 - alpha) of its mass and distributes
    the rest over its undirected neighbors proportionally to
    1/length_km. Isolated nodes keep their mass; total mass is conserved
    every iteration; iterations = 0 returns the input unchanged.
    """
    weights = np.ascontiguousarray(node_weights, dtype=np.float64)
    if weights.shape != (graph.n_nodes,):
        raise ValueError(f"expected {graph.n_nodes} node weights, got {weights.shape}")
    if np.any(weights < 0):
        raise ValueError("node weights must be non-negative")
    indptr, indices, affinity = graph.undirected_csr()
    return _kernels.diffuse(weights, indptr, indices, affinity, params.alpha, params.iterations)
