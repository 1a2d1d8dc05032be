"""Historical whale-catch analysis engine.

Turns catch-event logs into an immutable columnar catalog, reconstructs
expedition route graphs, aggregates catches on spatial grids and
histograms, quantifies search effort along routes, derives CPUE
surfaces, and serves everything over a read-only HTTP API.
"""

__version__ = "0.1.0"

from .effort import (
    DEFAULT_MIN_EFFORT_KM,
    CpueGrid,
    DiffusionParams,
    EffortRaster,
    cpue_grid,
    diffuse_effort,
    effort_raster,
    rasterize_edge,
)
from .filters import FilterError, parse_filter, render_filter
from .grids import (
    ClusterPoint,
    SpatialBinGrid,
    aggregate_points,
    bin_catches,
    bin_index,
    length_histogram,
    timeline_histogram,
)
from .ingest import (
    ColumnMapping,
    IngestError,
    ingest_files,
    load_catalog,
    save_catalog,
)
from .model import (
    Catalog,
    CatchRecord,
    ExpeditionType,
    FilterSpec,
    IngestReport,
    Sex,
    Species,
    matches,
)
from .routes import (
    CatchGraph,
    ExpeditionTrack,
    RouteEdge,
    TrackStop,
    build_expedition_tracks,
    build_graph,
    extract_routes,
    graph_to_geojson,
)
from .server import ServiceConfig, create_app
from .sphere import EARTH_RADIUS_KM, great_circle_km
from .synth import SynthSpec, generate_progression_demo

__all__ = [
    "DEFAULT_MIN_EFFORT_KM",
    "EARTH_RADIUS_KM",
    "Catalog",
    "CatchGraph",
    "CatchRecord",
    "ClusterPoint",
    "ColumnMapping",
    "CpueGrid",
    "DiffusionParams",
    "EffortRaster",
    "ExpeditionTrack",
    "ExpeditionType",
    "FilterError",
    "FilterSpec",
    "IngestError",
    "IngestReport",
    "RouteEdge",
    "ServiceConfig",
    "Sex",
    "SpatialBinGrid",
    "Species",
    "SynthSpec",
    "TrackStop",
    "aggregate_points",
    "bin_catches",
    "bin_index",
    "build_expedition_tracks",
    "build_graph",
    "cpue_grid",
    "create_app",
    "diffuse_effort",
    "effort_raster",
    "extract_routes",
    "generate_progression_demo",
    "graph_to_geojson",
    "great_circle_km",
    "ingest_files",
    "length_histogram",
    "load_catalog",
    "matches",
    "parse_filter",
    "rasterize_edge",
    "render_filter",
    "save_catalog",
    "timeline_histogram",
]
