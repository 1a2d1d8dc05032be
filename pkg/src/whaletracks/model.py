"""Canonical in-memory data model: catch records, the frozen catalog, filters.

The catalog is stored column-wise (numpy arrays) so that filtering and
binning stay vectorized at million-row scale; ``CatchRecord`` objects are
materialized on demand.
"""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field, fields
from typing import Iterable, Iterator, Optional

import numpy as np

SCHEMA_VERSION = "1"

# Sanity cap for recorded whale lengths; the largest credible records are
# around 110 ft.
MAX_LENGTH_FT = 120.0

# Dates outside this span are kept but flagged at ingest.
EXPECTED_YEAR_SPAN = (1880, 2020)


class Species(str, enum.Enum):
    BLUE = "blue"
    FIN = "fin"
    SEI = "sei"
    MINKE = "minke"
    SPERM = "sperm"
    HUMPBACK = "humpback"
    RIGHT = "right"
    BRYDE = "bryde"
    GRAY = "gray"
    BOWHEAD = "bowhead"
    OTHER = "other"
    UNKNOWN = "unknown"


class Sex(str, enum.Enum):
    FEMALE = "female"
    MALE = "male"
    UNKNOWN = "unknown"


class ExpeditionType(str, enum.Enum):
    LAND = "land"
    PELAGIC = "pelagic"
    UNKNOWN = "unknown"


SPECIES_ORDER = list(Species)
SEX_ORDER = list(Sex)
TYPE_ORDER = list(ExpeditionType)

_SPECIES_INDEX = {s: i for i, s in enumerate(SPECIES_ORDER)}
_SEX_INDEX = {s: i for i, s in enumerate(SEX_ORDER)}
_TYPE_INDEX = {t: i for i, t in enumerate(TYPE_ORDER)}


def canonical_lon(lon: float) -> float:
    """Map a longitude into [-180, 180); 180 maps to -180."""
    lon = (lon + 180.0) % 360.0 - 180.0
    # The modulo can return 180.0 for inputs like -1e-14 below a wrap point.
    if lon >= 180.0:
        lon -= 360.0
    return lon


@dataclass(frozen=True)
class CatchRecord:
    """One validated catch event. Field order here fixes the canonical CSV
    column order used by export and by the catalog artifact."""

    record_id: int
    expedition_id: str
    date: dt.date
    lat: float
    lon: float
    species: Species
    sex: Sex
    length_ft: Optional[float]
    nation: str
    expedition_type: ExpeditionType
    source_line: int

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat out of range: {self.lat}")
        if not -180.0 <= self.lon < 180.0:
            raise ValueError(f"lon out of range: {self.lon}")
        if self.length_ft is not None and not 0.0 < self.length_ft <= MAX_LENGTH_FT:
            raise ValueError(f"length_ft out of range: {self.length_ft}")


CANONICAL_FIELDS = [f.name for f in fields(CatchRecord)]


@dataclass(frozen=True)
class FilterSpec:
    """Conjunction of attribute predicates. Absent predicates never exclude;
    an empty FilterSpec matches every record.

    ``date_range`` endpoints are inclusive and either side may be open
    (``None``). ``bbox`` is (lat_min, lat_max, lon_min, lon_max); when
    lon_min > lon_max the box wraps the antimeridian.
    """

    species_set: Optional[frozenset[Species]] = None
    sex_set: Optional[frozenset[Sex]] = None
    date_range: Optional[tuple[Optional[dt.date], Optional[dt.date]]] = None
    bbox: Optional[tuple[float, float, float, float]] = None
    nations: Optional[frozenset[str]] = None
    expedition_types: Optional[frozenset[ExpeditionType]] = None
    length_range_ft: Optional[tuple[Optional[float], Optional[float]]] = None
    expedition_ids: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.date_range is not None:
            lo, hi = self.date_range
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"date_range start {lo} after end {hi}")
        if self.bbox is not None:
            lat_min, lat_max, lon_min, lon_max = self.bbox
            if lat_min > lat_max:
                raise ValueError(f"bbox lat_min {lat_min} > lat_max {lat_max}")
            # lon_min > lon_max is legal: the box wraps the antimeridian.

    def is_empty(self) -> bool:
        return all(getattr(self, f.name) is None for f in fields(self))

    def intersect(self, other: "FilterSpec") -> "FilterSpec":
        """Predicate-wise conjunction of two filters. A conjunction with an
        empty meet (disjoint ranges) collapses to a filter matching nothing.

        Raises ValueError in one unrepresentable case: two bounding boxes
        whose longitude intervals meet in two disjoint arcs (only possible
        when at least one box wraps the antimeridian).
        """

        def both(a, b, combine):
            if a is None:
                return b
            if b is None:
                return a
            return combine(a, b)

        try:
            return FilterSpec(
                species_set=both(self.species_set, other.species_set, frozenset.intersection),
                sex_set=both(self.sex_set, other.sex_set, frozenset.intersection),
                date_range=both(self.date_range, other.date_range, _range_meet),
                bbox=both(self.bbox, other.bbox, _bbox_meet),
                nations=both(self.nations, other.nations, frozenset.intersection),
                expedition_types=both(
                    self.expedition_types, other.expedition_types, frozenset.intersection
                ),
                length_range_ft=both(self.length_range_ft, other.length_range_ft, _range_meet),
                expedition_ids=both(
                    self.expedition_ids, other.expedition_ids, frozenset.intersection
                ),
            )
        except _EmptyRange:
            return FilterSpec(species_set=frozenset())


class _EmptyRange(Exception):
    pass


def _range_meet(a, b):
    lo = max((x for x in (a[0], b[0]) if x is not None), default=None)
    hi = min((x for x in (a[1], b[1]) if x is not None), default=None)
    if lo is not None and hi is not None and lo > hi:
        raise _EmptyRange()
    return (lo, hi)


def _lon_segments(lo: float, hi: float) -> list:
    """A longitude interval as linear [lo, hi] pieces; wrapped intervals
    split into their two halves."""
    if lo <= hi:
        return [(lo, hi)]
    return [(lo, 180.0), (-180.0, hi)]


def _bbox_meet(a, b):
    lat_min = max(a[0], b[0])
    lat_max = min(a[1], b[1])
    if lat_min > lat_max:
        raise _EmptyRange()
    segs = []
    for lo1, hi1 in _lon_segments(a[2], a[3]):
        for lo2, hi2 in _lon_segments(b[2], b[3]):
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo <= hi:
                segs.append((lo, hi))
    if not segs:
        raise _EmptyRange()
    segs.sort()
    if len(segs) == 1:
        return (lat_min, lat_max, segs[0][0], segs[0][1])
    # Pieces from intersecting the split intervals are pairwise disjoint,
    # so two pieces are a single box only when they abut across the
    # antimeridian, i.e. the wrapped form.
    if len(segs) == 2 and segs[0][0] == -180.0 and segs[1][1] == 180.0 and segs[1][0] > segs[0][1]:
        return (lat_min, lat_max, segs[1][0], segs[0][1])
    raise ValueError(
        "bbox conjunction covers two disjoint longitude arcs and cannot "
        "be expressed as a single bounding box"
    )


def _lon_in_interval(lon: float, lon_min: float, lon_max: float) -> bool:
    if lon_min <= lon_max:
        return lon_min <= lon <= lon_max
    # Wrapped interval across the antimeridian.
    return lon >= lon_min or lon <= lon_max


def matches(record: CatchRecord, spec: FilterSpec) -> bool:
    """True iff the record satisfies every present predicate."""
    if spec.species_set is not None and record.species not in spec.species_set:
        return False
    if spec.sex_set is not None and record.sex not in spec.sex_set:
        return False
    if spec.date_range is not None:
        lo, hi = spec.date_range
        if lo is not None and record.date < lo:
            return False
        if hi is not None and record.date > hi:
            return False
    if spec.bbox is not None:
        lat_min, lat_max, lon_min, lon_max = spec.bbox
        if not lat_min <= record.lat <= lat_max:
            return False
        if not _lon_in_interval(record.lon, lon_min, lon_max):
            return False
    if spec.nations is not None and record.nation not in spec.nations:
        return False
    if spec.expedition_types is not None and record.expedition_type not in spec.expedition_types:
        return False
    if spec.length_range_ft is not None:
        if record.length_ft is None:
            return False
        lo, hi = spec.length_range_ft
        if lo is not None and record.length_ft < lo:
            return False
        if hi is not None and record.length_ft > hi:
            return False
    if spec.expedition_ids is not None and record.expedition_id not in spec.expedition_ids:
        return False
    return True


@dataclass
class IngestReport:
    total_rows: int = 0
    accepted: int = 0
    rejected: int = 0
    rejection_breakdown: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def rejection_rate(self) -> float:
        return self.rejected / self.total_rows if self.total_rows else 0.0

    def to_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejection_rate": self.rejection_rate,
            "rejection_breakdown": dict(sorted(self.rejection_breakdown.items())),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IngestReport":
        return cls(
            total_rows=d["total_rows"],
            accepted=d["accepted"],
            rejected=d["rejected"],
            rejection_breakdown=dict(d.get("rejection_breakdown", {})),
            warnings=list(d.get("warnings", [])),
        )


class Catalog:
    """Immutable, column-wise snapshot of accepted catch records.

    Iteration order equals ingestion order; ``record_id`` equals the
    positional index (ids are assigned sequentially from 0 at ingest).
    """

    def __init__(
        self,
        *,
        expedition_code: np.ndarray,
        expedition_ids: list[str],
        date_ord: np.ndarray,
        year: np.ndarray,
        lat: np.ndarray,
        lon: np.ndarray,
        species_code: np.ndarray,
        sex_code: np.ndarray,
        length_ft: np.ndarray,
        nation_code: np.ndarray,
        nations: list[str],
        type_code: np.ndarray,
        source_line: np.ndarray,
        ingest_report: IngestReport,
        schema_version: str = SCHEMA_VERSION,
    ):
        self.expedition_code = expedition_code
        self.expedition_ids = expedition_ids
        self.date_ord = date_ord
        self.year = year
        self.lat = lat
        self.lon = lon
        self.species_code = species_code
        self.sex_code = sex_code
        self.length_ft = length_ft
        self.nation_code = nation_code
        self.nations = nations
        self.type_code = type_code
        self.source_line = source_line
        self.ingest_report = ingest_report
        self.schema_version = schema_version
        for arr in (
            self.expedition_code, self.date_ord, self.year, self.lat, self.lon,
            self.species_code, self.sex_code, self.length_ft, self.nation_code,
            self.type_code, self.source_line,
        ):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.date_ord)

    @property
    def expedition_lookup(self) -> dict[str, int]:
        if not hasattr(self, "_exp_lookup"):
            self._exp_lookup = {e: i for i, e in enumerate(self.expedition_ids)}
        return self._exp_lookup

    @property
    def nation_lookup(self) -> dict[str, int]:
        if not hasattr(self, "_nation_lookup"):
            self._nation_lookup = {n: i for i, n in enumerate(self.nations)}
        return self._nation_lookup

    def record(self, i: int) -> CatchRecord:
        i = int(i)
        if not 0 <= i < len(self):
            raise IndexError(i)
        length = float(self.length_ft[i])
        return CatchRecord(
            record_id=i,
            expedition_id=self.expedition_ids[self.expedition_code[i]],
            date=dt.date.fromordinal(int(self.date_ord[i])),
            lat=float(self.lat[i]),
            lon=float(self.lon[i]),
            species=SPECIES_ORDER[self.species_code[i]],
            sex=SEX_ORDER[self.sex_code[i]],
            length_ft=None if np.isnan(length) else length,
            nation=self.nations[self.nation_code[i]],
            expedition_type=TYPE_ORDER[self.type_code[i]],
            source_line=int(self.source_line[i]),
        )

    def __getitem__(self, i: int) -> CatchRecord:
        return self.record(i)

    def __iter__(self) -> Iterator[CatchRecord]:
        for i in range(len(self)):
            yield self.record(i)

    @classmethod
    def from_records(
        cls, records: Iterable[CatchRecord], ingest_report: Optional[IngestReport] = None
    ) -> "Catalog":
        b = CatalogBuilder()
        for r in records:
            b.append(r)
        return b.freeze(ingest_report or IngestReport())


class CatalogBuilder:
    """Write-exclusive accumulator used by ingest; ``freeze`` produces the
    immutable Catalog (record ids = append order)."""

    def __init__(self):
        self._exp_index: dict[str, int] = {}
        self.expedition_ids: list[str] = []
        self._nation_index: dict[str, int] = {}
        self.nations: list[str] = []
        self.expedition_code: list[int] = []
        self.date_ord: list[int] = []
        self.year: list[int] = []
        self.lat: list[float] = []
        self.lon: list[float] = []
        self.species_code: list[int] = []
        self.sex_code: list[int] = []
        self.length_ft: list[float] = []
        self.nation_code: list[int] = []
        self.type_code: list[int] = []
        self.source_line: list[int] = []
        self._frozen = False

    def __len__(self) -> int:
        return len(self.date_ord)

    def intern_expedition(self, expedition_id: str) -> int:
        code = self._exp_index.get(expedition_id)
        if code is None:
            code = len(self.expedition_ids)
            self._exp_index[expedition_id] = code
            self.expedition_ids.append(expedition_id)
        return code

    def intern_nation(self, nation: str) -> int:
        code = self._nation_index.get(nation)
        if code is None:
            code = len(self.nations)
            self._nation_index[nation] = code
            self.nations.append(nation)
        return code

    def append(self, r: CatchRecord) -> None:
        if self._frozen:
            raise RuntimeError("catalog already frozen")
        self.expedition_code.append(self.intern_expedition(r.expedition_id))
        self.date_ord.append(r.date.toordinal())
        self.year.append(r.date.year)
        self.lat.append(r.lat)
        self.lon.append(r.lon)
        self.species_code.append(_SPECIES_INDEX[r.species])
        self.sex_code.append(_SEX_INDEX[r.sex])
        self.length_ft.append(np.nan if r.length_ft is None else r.length_ft)
        self.nation_code.append(self.intern_nation(r.nation))
        self.type_code.append(_TYPE_INDEX[r.expedition_type])
        self.source_line.append(r.source_line)

    def freeze(self, ingest_report: IngestReport) -> Catalog:
        self._frozen = True
        return Catalog(
            expedition_code=np.asarray(self.expedition_code, dtype=np.int32),
            expedition_ids=self.expedition_ids,
            date_ord=np.asarray(self.date_ord, dtype=np.int64),
            year=np.asarray(self.year, dtype=np.int32),
            lat=np.asarray(self.lat, dtype=np.float64),
            lon=np.asarray(self.lon, dtype=np.float64),
            species_code=np.asarray(self.species_code, dtype=np.int8),
            sex_code=np.asarray(self.sex_code, dtype=np.int8),
            length_ft=np.asarray(self.length_ft, dtype=np.float64),
            nation_code=np.asarray(self.nation_code, dtype=np.int32),
            nations=self.nations,
            type_code=np.asarray(self.type_code, dtype=np.int8),
            source_line=np.asarray(self.source_line, dtype=np.int64),
            ingest_report=ingest_report,
        )


def accept_mask(catalog: Catalog, spec: FilterSpec) -> np.ndarray:
    """Vectorized accept-set of ``spec`` over the catalog (boolean mask).

    Semantically identical to ``matches`` applied record by record.
    """
    n = len(catalog)
    mask = np.ones(n, dtype=bool)
    if spec.species_set is not None:
        codes = np.array(sorted(_SPECIES_INDEX[s] for s in spec.species_set), dtype=np.int8)
        mask &= np.isin(catalog.species_code, codes)
    if spec.sex_set is not None:
        codes = np.array(sorted(_SEX_INDEX[s] for s in spec.sex_set), dtype=np.int8)
        mask &= np.isin(catalog.sex_code, codes)
    if spec.date_range is not None:
        lo, hi = spec.date_range
        if lo is not None:
            mask &= catalog.date_ord >= lo.toordinal()
        if hi is not None:
            mask &= catalog.date_ord <= hi.toordinal()
    if spec.bbox is not None:
        lat_min, lat_max, lon_min, lon_max = spec.bbox
        mask &= (catalog.lat >= lat_min) & (catalog.lat <= lat_max)
        if lon_min <= lon_max:
            mask &= (catalog.lon >= lon_min) & (catalog.lon <= lon_max)
        else:
            mask &= (catalog.lon >= lon_min) | (catalog.lon <= lon_max)
    if spec.nations is not None:
        lookup = catalog.nation_lookup
        codes = [lookup[nt] for nt in spec.nations if nt in lookup]
        if codes:
            mask &= np.isin(catalog.nation_code, np.array(sorted(codes), dtype=np.int32))
        else:
            mask &= False
    if spec.expedition_types is not None:
        codes = np.array(sorted(_TYPE_INDEX[t] for t in spec.expedition_types), dtype=np.int8)
        mask &= np.isin(catalog.type_code, codes)
    if spec.length_range_ft is not None:
        lo, hi = spec.length_range_ft
        ok = ~np.isnan(catalog.length_ft)
        if lo is not None:
            ok &= catalog.length_ft >= lo
        if hi is not None:
            ok &= catalog.length_ft <= hi
        mask &= ok
    if spec.expedition_ids is not None:
        lookup = catalog.expedition_lookup
        wanted = {lookup[e] for e in spec.expedition_ids if e in lookup}
        if wanted:
            mask &= np.isin(catalog.expedition_code, np.array(sorted(wanted), dtype=np.int32))
        else:
            mask &= False
    return mask


def expedition_rank(catalog: Catalog) -> np.ndarray:
    """Rank of each expedition code under lexicographic id ordering."""
    ids = np.asarray(catalog.expedition_ids, dtype=object)
    order = np.argsort(ids, kind="stable")
    rank = np.empty(len(ids), dtype=np.int64)
    rank[order] = np.arange(len(ids))
    return rank


def canonical_order(catalog: Catalog, indices: np.ndarray) -> np.ndarray:
    """Record indices sorted by (expedition id, date, record id).

    This is the stable order used for routes, exports, and pagination.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return indices
    rank = expedition_rank(catalog)[catalog.expedition_code[indices]]
    return indices[np.lexsort((indices, catalog.date_ord[indices], rank))]


def species_from_code(code: str) -> Species:
    """Map a raw species code to the enum; unrecognized or blank codes map
    to ``unknown`` (never dropped)."""
    c = code.strip().lower()
    if not c:
        return Species.UNKNOWN
    try:
        return Species(c)
    except ValueError:
        return Species.UNKNOWN


_SEX_ALIASES = {
    "f": Sex.FEMALE, "female": Sex.FEMALE,
    "m": Sex.MALE, "male": Sex.MALE,
    "u": Sex.UNKNOWN, "unknown": Sex.UNKNOWN,
}


def sex_from_code(code: str) -> Sex:
    return _SEX_ALIASES.get(code.strip().lower(), Sex.UNKNOWN)


_TYPE_ALIASES = {
    "land": ExpeditionType.LAND, "l": ExpeditionType.LAND,
    "pelagic": ExpeditionType.PELAGIC, "p": ExpeditionType.PELAGIC,
    "unknown": ExpeditionType.UNKNOWN, "u": ExpeditionType.UNKNOWN,
}


def expedition_type_from_code(code: str) -> ExpeditionType:
    return _TYPE_ALIASES.get(code.strip().lower(), ExpeditionType.UNKNOWN)
