"""Expedition route reconstruction: stops, movements, and the catch graph."""

from __future__ import annotations

import dataclasses
import datetime as dt
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .model import Catalog, FilterSpec, accept_mask, canonical_order
from .sphere import great_circle_km, render_points, split_antimeridian

# Positions closer than this (per axis, degrees) count as the same place.
# Historical logs quantize coordinates, so this is recorded-value equality.
COINCIDENCE_EPSILON_DEG = 1e-6


@dataclasses.dataclass(frozen=True)
class TrackStop:
    """One visited location, consecutive same-place catches collapsed."""

    lat: float
    lon: float
    date_first: dt.date
    date_last: dt.date
    catch_record_ids: tuple


@dataclasses.dataclass(frozen=True)
class RouteEdge:
    """A movement between two successive distinct stops of one expedition."""

    expedition_id: str
    from_stop: TrackStop
    to_stop: TrackStop
    depart_date: dt.date
    arrive_date: dt.date
    length_km: float


@dataclasses.dataclass(frozen=True)
class ExpeditionTrack:
    expedition_id: str
    stops: tuple


@dataclasses.dataclass
class _Collapsed:
    """Columnar stop sequences, laid out track by track."""

    node_exp_code: np.ndarray
    node_lat: np.ndarray
    node_lon: np.ndarray
    node_date_first: np.ndarray
    node_date_last: np.ndarray
    node_catch_indptr: np.ndarray
    node_catch_ids: np.ndarray
    track_indptr: np.ndarray
    track_exp_code: np.ndarray


def _collapse(catalog: Catalog, spec: Optional[FilterSpec], eps: float) -> _Collapsed:
    if spec is None:
        spec = FilterSpec()
    rec = np.nonzero(accept_mask(catalog, spec))[0]
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f = np.zeros(0, dtype=np.float64)
    if rec.size == 0:
        zero = np.zeros(1, dtype=np.int64)
        return _Collapsed(empty_i, empty_f, empty_f, empty_i, empty_i, zero, empty_i, zero, empty_i)

    s = canonical_order(catalog, rec)
    slat = catalog.lat[s]
    slon = catalog.lon[s]
    sdate = catalog.date_ord[s]
    sexp = catalog.expedition_code[s].astype(np.int64)

    dlat = np.abs(np.diff(slat))
    dlon = np.abs(np.diff(slon))
    dlon = np.minimum(dlon, 360.0 - dlon)
    moved = (dlat >= eps) | (dlon >= eps)
    new_stop = np.r_[True, (sexp[1:] != sexp[:-1]) | moved]

    first = np.nonzero(new_stop)[0]
    last = np.r_[first[1:] - 1, s.size - 1]
    node_exp = sexp[first]
    tstart = np.nonzero(np.r_[True, node_exp[1:] != node_exp[:-1]])[0]
    return _Collapsed(
        node_exp_code=node_exp,
        node_lat=slat[first],
        node_lon=slon[first],
        node_date_first=sdate[first],
        node_date_last=sdate[last],
        node_catch_indptr=np.r_[first, s.size].astype(np.int64),
        node_catch_ids=s.astype(np.int64),
        track_indptr=np.r_[tstart, node_exp.size].astype(np.int64),
        track_exp_code=node_exp[tstart],
    )


class CatchGraph:
    """All stops and movements of the expeditions passing a filter.

    Stored columnar; nodes are laid out track by track in canonical order
    (expedition id, then date). Node objects materialize on demand.
    """

    def __init__(self, catalog: Catalog, collapsed: _Collapsed):
        self.catalog = catalog
        c = collapsed
        self.node_exp_code = c.node_exp_code
        self.node_lat = c.node_lat
        self.node_lon = c.node_lon
        self.node_date_first = c.node_date_first
        self.node_date_last = c.node_date_last
        self.node_catch_indptr = c.node_catch_indptr
        self.node_catch_ids = c.node_catch_ids
        self.track_indptr = c.track_indptr
        self.track_exp_code = c.track_exp_code

        inner = np.nonzero(c.node_exp_code[1:] == c.node_exp_code[:-1])[0]
        self.edge_src = inner.astype(np.int64)
        self.edge_dst = self.edge_src + 1
        self.edge_exp_code = c.node_exp_code[self.edge_src]
        self.edge_depart = c.node_date_last[self.edge_src]
        self.edge_arrive = c.node_date_first[self.edge_dst]
        self.edge_length_km = _kernels.haversine_km(
            c.node_lat[self.edge_src], c.node_lon[self.edge_src],
            c.node_lat[self.edge_dst], c.node_lon[self.edge_dst],
        )
        self._csr = None

    @property
    def n_nodes(self) -> int:
        return int(self.node_lat.size)

    @property
    def n_edges(self) -> int:
        return int(self.edge_src.size)

    @property
    def n_tracks(self) -> int:
        return int(self.track_exp_code.size)

    def expedition_id(self, code: int) -> str:
        return self.catalog.expedition_ids[code]

    def stop(self, i: int) -> TrackStop:
        lo, hi = self.node_catch_indptr[i], self.node_catch_indptr[i + 1]
        return TrackStop(
            lat=float(self.node_lat[i]),
            lon=float(self.node_lon[i]),
            date_first=dt.date.fromordinal(int(self.node_date_first[i])),
            date_last=dt.date.fromordinal(int(self.node_date_last[i])),
            catch_record_ids=tuple(int(r) for r in self.node_catch_ids[lo:hi]),
        )

    def edge(self, e: int) -> RouteEdge:
        return RouteEdge(
            expedition_id=self.expedition_id(int(self.edge_exp_code[e])),
            from_stop=self.stop(int(self.edge_src[e])),
            to_stop=self.stop(int(self.edge_dst[e])),
            depart_date=dt.date.fromordinal(int(self.edge_depart[e])),
            arrive_date=dt.date.fromordinal(int(self.edge_arrive[e])),
            length_km=float(self.edge_length_km[e]),
        )

    def iter_edges(self) -> Iterator[RouteEdge]:
        for e in range(self.n_edges):
            yield self.edge(e)

    def undirected_csr(self):
        """CSR neighbor lists with 1/length_km affinities, both directions."""
        if self._csr is None:
            n = self.n_nodes
            src = np.r_[self.edge_src, self.edge_dst]
            dst = np.r_[self.edge_dst, self.edge_src]
            aff = np.r_[1.0 / self.edge_length_km, 1.0 / self.edge_length_km]
            order = np.lexsort((dst, src))
            src, dst, aff = src[order], dst[order], aff[order]
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, dst, aff)
        return self._csr


def build_graph(
    catalog: Catalog,
    spec: Optional[FilterSpec] = None,
    coincidence_epsilon: float = COINCIDENCE_EPSILON_DEG,
) -> CatchGraph:
    """Group, sort, collapse, and link every expedition passing the filter."""
    return CatchGraph(catalog, _collapse(catalog, spec, coincidence_epsilon))


def build_expedition_tracks(
    catalog: Catalog,
    spec: Optional[FilterSpec] = None,
    coincidence_epsilon: float = COINCIDENCE_EPSILON_DEG,
) -> list:
    """Per-expedition stop sequences, ordered by expedition id."""
    graph = build_graph(catalog, spec, coincidence_epsilon)
    tracks = []
    for t in range(graph.n_tracks):
        lo, hi = graph.track_indptr[t], graph.track_indptr[t + 1]
        stops = tuple(graph.stop(i) for i in range(lo, hi))
        tracks.append(ExpeditionTrack(graph.expedition_id(int(graph.track_exp_code[t])), stops))
    return tracks


def extract_routes(track: ExpeditionTrack) -> list:
    """One edge per consecutive stop pair; empty for one-stop tracks."""
    edges = []
    for a, b in zip(track.stops, track.stops[1:]):
        edges.append(
            RouteEdge(
                expedition_id=track.expedition_id,
                from_stop=a,
                to_stop=b,
                depart_date=a.date_last,
                arrive_date=b.date_first,
                length_km=great_circle_km(a.lat, a.lon, b.lat, b.lon),
            )
        )
    return edges


def _line_geometry(lat1, lon1, lat2, lon2) -> dict:
    lats, lons = render_points(lat1, lon1, lat2, lon2)
    parts = split_antimeridian(lats, lons)
    rounded = [[[round(x, 5), round(y, 5)] for x, y in part] for part in parts]
    if len(rounded) == 1:
        return {"type": "LineString", "coordinates": rounded[0]}
    return {"type": "MultiLineString", "coordinates": rounded}


def edge_feature(graph: CatchGraph, e: int) -> dict:
    return {
        "type": "Feature",
        "geometry": _line_geometry(
            float(graph.node_lat[graph.edge_src[e]]),
            float(graph.node_lon[graph.edge_src[e]]),
            float(graph.node_lat[graph.edge_dst[e]]),
            float(graph.node_lon[graph.edge_dst[e]]),
        ),
        "properties": {
            "expedition_id": graph.expedition_id(int(graph.edge_exp_code[e])),
            "depart_date": dt.date.fromordinal(int(graph.edge_depart[e])).isoformat(),
            "arrive_date": dt.date.fromordinal(int(graph.edge_arrive[e])).isoformat(),
            "length_km": round(float(graph.edge_length_km[e]), 3),
        },
    }


def node_feature(graph: CatchGraph, i: int) -> dict:
    lo, hi = graph.node_catch_indptr[i], graph.node_catch_indptr[i + 1]
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [round(float(graph.node_lon[i]), 5), round(float(graph.node_lat[i]), 5)],
        },
        "properties": {
            "expedition_id": graph.expedition_id(int(graph.node_exp_code[i])),
            "date_first": dt.date.fromordinal(int(graph.node_date_first[i])).isoformat(),
            "date_last": dt.date.fromordinal(int(graph.node_date_last[i])).isoformat(),
            "catches": int(hi - lo),
        },
    }


def graph_to_geojson(graph: CatchGraph, include_nodes: bool = False) -> dict:
    features = [edge_feature(graph, e) for e in range(graph.n_edges)]
    if include_nodes:
        features.extend(node_feature(graph, i) for i in range(graph.n_nodes))
    return {"type": "FeatureCollection", "features": features}
