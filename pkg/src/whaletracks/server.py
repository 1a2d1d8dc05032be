"""Read-only HTTP query service over a frozen catalog and its route graph.

Every endpoint takes the shared filter grammar (see filters.py) plus its
own parameters. Responses are plain JSON, GeoJSON for geometry, and an
RFC-4180 CSV stream for /export. The catalog and graph are immutable, so
identical requests return identical bodies and results cache freely.
"""

from __future__ import annotations

import dataclasses
import functools
import json
from pathlib import Path
from typing import Optional, Union

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from . import grids
from .effort import DEFAULT_MIN_EFFORT_KM, cpue_grid, effort_raster
from .filters import FilterError, parse_filter
from .ingest import iter_canonical_csv
from .model import (
    Catalog,
    EXPECTED_YEAR_SPAN,
    FilterSpec,
    SEX_ORDER,
    SPECIES_ORDER,
    TYPE_ORDER,
    accept_mask,
    canonical_order,
)
from .routes import build_graph, edge_feature

CACHE_SIZE = 128


@dataclasses.dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    max_raw_points: int = 200_000
    page_size: int = 10_000
    min_effort_km: float = DEFAULT_MIN_EFFORT_KM
    allow_origins: tuple = ("*",)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "allow_origins" in raw:
            raw["allow_origins"] = tuple(raw["allow_origins"])
        return cls(**raw)


def _split_params(request: Request, own: set) -> tuple:
    """Separate endpoint-specific parameters from filter parameters."""
    filter_items = []
    extras = {}
    for key, value in request.query_params.multi_items():
        if key in own:
            if key in extras:
                raise FilterError(key, "parameter given more than once")
            extras[key] = value
        else:
            filter_items.append((key, value))
    return parse_filter(filter_items), extras


def _int_param(extras: dict, key: str, default: int, lo: int, hi: Optional[int] = None) -> int:
    raw = extras.get(key)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise FilterError(key, f"not an integer: {raw!r}") from None
    if value < lo or (hi is not None and value > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise FilterError(key, f"must be {bound}")
    return value


def _float_param(extras: dict, key: str, default: float, lo: float) -> float:
    raw = extras.get(key)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise FilterError(key, f"not a number: {raw!r}") from None
    if value < lo:
        raise FilterError(key, f"must be >= {lo}")
    return value


def _bin_param(extras: dict, default: float = 5.0) -> float:
    raw = extras.get("bin")
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise FilterError("bin", f"not a number: {raw!r}") from None
    if value not in grids.BIN_CHOICES:
        raise FilterError("bin", f"must be one of {sorted(grids.BIN_CHOICES)}")
    return value


def _format_param(extras: dict) -> str:
    fmt = extras.get("format", "json")
    if fmt not in ("json", "geojson"):
        raise FilterError("format", "must be json or geojson")
    return fmt


def create_app(
    catalog: Catalog,
    graph=None,
    config: Optional[ServiceConfig] = None,
) -> FastAPI:
    cfg = config or ServiceConfig()
    if graph is None:
        graph = build_graph(catalog)

    app = FastAPI(title="whaletracks query service", docs_url=None, redoc_url=None)
    if cfg.allow_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(CORSMiddleware, allow_origins=list(cfg.allow_origins), allow_methods=["GET"])

    @app.exception_handler(FilterError)
    async def _filter_error(request: Request, exc: FilterError):
        return JSONResponse(status_code=400, content={"param": exc.param, "reason": exc.reason})

    @functools.lru_cache(maxsize=CACHE_SIZE)
    def accepted(spec: FilterSpec) -> np.ndarray:
        return np.nonzero(accept_mask(catalog, spec))[0]

    @functools.lru_cache(maxsize=CACHE_SIZE)
    def cached_bins(spec: FilterSpec, bin_deg: float):
        return grids.bin_catches(catalog, spec, bin_deg)

    @functools.lru_cache(maxsize=CACHE_SIZE)
    def cached_effort(spec: FilterSpec, bin_deg: float):
        return effort_raster(graph, spec, bin_deg, spec.date_range)

    @functools.lru_cache(maxsize=CACHE_SIZE)
    def cached_points(spec: FilterSpec, level: int, encoding: str):
        return grids.aggregate_points(catalog, spec, level, encoding)

    @functools.lru_cache(maxsize=CACHE_SIZE)
    def cached_route_features(spec: FilterSpec):
        g = graph if spec.is_empty() else build_graph(catalog, spec)
        return [edge_feature(g, e) for e in range(g.n_edges)]

    @app.get("/catches")
    def catches(request: Request):
        spec, extras = _split_params(request, {"level", "encoding", "cursor", "limit"})
        level = _int_param(extras, "level", 0, 0, 3)
        encoding = extras.get("encoding", "species")
        if encoding not in grids.ENCODINGS:
            raise FilterError("encoding", f"must be one of {list(grids.ENCODINGS)}")
        if level == 0:
            total = int(accepted(spec).size)
            if total > cfg.max_raw_points:
                return JSONResponse(
                    status_code=413,
                    content={
                        "param": "level",
                        "reason": f"{total} raw points exceed the {cfg.max_raw_points} limit; "
                        "request an aggregated level (1-3)",
                    },
                )
        points = cached_points(spec, level, encoding)
        cursor = _int_param(extras, "cursor", 0, 0)
        limit = _int_param(extras, "limit", cfg.page_size, 1)
        page = points[cursor : cursor + limit] if level == 0 else points
        next_cursor = cursor + limit if level == 0 and cursor + limit < len(points) else None
        return {
            "level": level,
            "encoding": encoding,
            "total": len(points) if level == 0 else sum(p.count for p in points),
            "points": [
                {"lat": p.lat, "lon": p.lon, "count": p.count, "dominant_class": p.dominant_class}
                for p in page
            ],
            "next_cursor": next_cursor,
        }

    @app.get("/bins")
    def bins(request: Request):
        spec, extras = _split_params(request, {"bin", "format"})
        grid = cached_bins(spec, _bin_param(extras))
        return grid.to_geojson() if _format_param(extras) == "geojson" else grid.to_dict()

    @app.get("/routes")
    def routes_endpoint(request: Request):
        spec, extras = _split_params(request, {"cursor", "limit"})
        features = cached_route_features(spec)
        cursor = _int_param(extras, "cursor", 0, 0)
        limit = _int_param(extras, "limit", cfg.page_size, 1)
        page = features[cursor : cursor + limit]
        next_cursor = cursor + limit if cursor + limit < len(features) else None
        return {
            "type": "FeatureCollection",
            "features": page,
            "total": len(features),
            "next_cursor": next_cursor,
        }

    @app.get("/effort")
    def effort_endpoint(request: Request):
        spec, extras = _split_params(request, {"bin", "format"})
        raster = cached_effort(spec, _bin_param(extras))
        return raster.to_geojson() if _format_param(extras) == "geojson" else raster.to_dict()

    @app.get("/cpue")
    def cpue(request: Request):
        spec, extras = _split_params(request, {"bin", "format", "min_effort"})
        bin_deg = _bin_param(extras)
        min_effort = _float_param(extras, "min_effort", cfg.min_effort_km, 0.0)
        result = cpue_grid(cached_bins(spec, bin_deg), cached_effort(spec, bin_deg), min_effort)
        return result.to_geojson() if _format_param(extras) == "geojson" else result.to_dict()

    @app.get("/timeline")
    def timeline(request: Request):
        spec, extras = _split_params(request, {"interval"})
        interval = _int_param(extras, "interval", 1, 1)
        buckets = grids.timeline_histogram(catalog, spec, interval)
        return {
            "interval": interval,
            "total": sum(c for _, c in buckets),
            "buckets": [{"year": y, "count": c} for y, c in buckets],
        }

    @app.get("/lengths")
    def lengths(request: Request):
        spec, extras = _split_params(request, {"bucket"})
        bucket = _float_param(extras, "bucket", 5.0, 0.1)
        hist, excluded = grids.length_histogram(catalog, spec, bucket)
        return {
            "bucket_ft": bucket,
            "total": sum(c for _, c in hist),
            "excluded": excluded,
            "buckets": [{"start_ft": s, "count": c} for s, c in hist],
        }

    @app.get("/export")
    def export(request: Request):
        spec, _ = _split_params(request, set())
        order = canonical_order(catalog, accepted(spec))
        return StreamingResponse(
            iter_canonical_csv(catalog, order),
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": 'attachment; filename="catches.csv"'},
        )

    @app.get("/meta")
    def meta(request: Request):
        spec, _ = _split_params(request, set())
        years = catalog.year
        return {
            "count": len(catalog),
            "filtered": int(accepted(spec).size),
            "ingest_report": catalog.ingest_report.to_dict(),
            "schema_version": catalog.schema_version,
            "codes": {
                "species": [s.value for s in SPECIES_ORDER],
                "sexes": [s.value for s in SEX_ORDER],
                "types": [t.value for t in TYPE_ORDER],
                "nations": sorted(catalog.nations),
            },
            "expedition_count": len(catalog.expedition_ids),
            "year_range": (
                [int(years.min()), int(years.max())] if len(catalog) else list(EXPECTED_YEAR_SPAN)
            ),
            "bins": list(grids.BIN_CHOICES),
            "levels": {str(k): (v or "raw") for k, v in grids.LEVEL_BIN_DEG.items()},
            "max_raw_points": cfg.max_raw_points,
        }

    return app


def run(catalog: Catalog, config: ServiceConfig) -> None:
    """Blocking server start; used by the CLI serve command."""
    import uvicorn

    app = create_app(catalog, config=config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
