"""CSV ingestion: raw catch-event files -> frozen Catalog + rejection report.

Rejection is row-local (one bad row never aborts a file). Rows lacking a
usable date or coordinates are removed; everything else is kept, with
unknown codes mapped to explicit "unknown" members.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .model import (
    CANONICAL_FIELDS,
    EXPECTED_YEAR_SPAN,
    MAX_LENGTH_FT,
    SCHEMA_VERSION,
    Catalog,
    CatalogBuilder,
    CatchRecord,
    IngestReport,
    canonical_lon,
    expedition_type_from_code,
    sex_from_code,
    species_from_code,
)

METERS_TO_FEET = 3.28084

ARTIFACT_FORMAT = "whaletracks-catalog"
ARTIFACT_VERSION = 1


class IngestError(Exception):
    """Fatal ingest failure (unreadable file, header mismatch)."""


class RejectReason(str, enum.Enum):
    MISSING_DATE = "missing_date"
    MISSING_COORDS = "missing_coords"
    MALFORMED_FIELD = "malformed_field"


# Column spec forms: a header name, a 0-based index, or a dict of part
# columns ({"year","month","day"} for dates, {"deg","min","hem"} for
# coordinates).
ColumnSpec = Union[str, int, dict]

MANDATORY_FIELDS = ("expedition_id", "date", "lat", "lon")
OPTIONAL_FIELDS = ("species", "sex", "length_ft", "nation", "expedition_type")


@dataclass
class ColumnMapping:
    columns: dict[str, ColumnSpec]
    date_format: str = "%Y-%m-%d"
    length_unit: str = "feet"  # "feet" | "meters"

    def __post_init__(self):
        missing = [f for f in MANDATORY_FIELDS if f not in self.columns]
        if missing:
            raise IngestError(f"mapping missing mandatory fields: {', '.join(missing)}")
        if self.length_unit not in ("feet", "meters"):
            raise IngestError(f"unsupported length_unit: {self.length_unit!r}")
        unknown = set(self.columns) - set(MANDATORY_FIELDS) - set(OPTIONAL_FIELDS)
        if unknown:
            raise IngestError(f"mapping names unknown fields: {', '.join(sorted(unknown))}")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ColumnMapping":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        return cls(
            columns=raw["columns"],
            date_format=raw.get("date_format", "%Y-%m-%d"),
            length_unit=raw.get("length_unit", "feet"),
        )

    def resolve(self, header: Sequence[str], path: str = "<file>") -> "ColumnMapping":
        """Translate index-based column specs to header names and verify
        every referenced column exists. Header mismatch is fatal."""
        index = {name: i for i, name in enumerate(header)}

        def resolve_one(spec: ColumnSpec) -> ColumnSpec:
            if isinstance(spec, int):
                if not 0 <= spec < len(header):
                    raise IngestError(
                        f"{path}: column index {spec} out of range for {len(header)}-column header"
                    )
                return header[spec]
            if isinstance(spec, str):
                if spec not in index:
                    raise IngestError(f"{path}: column {spec!r} not in header")
                return spec
            return {k: resolve_one(v) for k, v in spec.items()}

        return ColumnMapping(
            columns={f: resolve_one(s) for f, s in self.columns.items()},
            date_format=self.date_format,
            length_unit=self.length_unit,
        )


def canonical_mapping() -> ColumnMapping:
    """Mapping for the canonical CSV layout produced by export/synth."""
    return ColumnMapping(
        columns={
            "expedition_id": "expedition_id",
            "date": "date",
            "lat": "lat",
            "lon": "lon",
            "species": "species",
            "sex": "sex",
            "length_ft": "length_ft",
            "nation": "nation",
            "expedition_type": "expedition_type",
        },
        date_format="%Y-%m-%d",
    )


def _month_level_formats(fmt: str) -> list[str]:
    """Candidate formats with the day directive stripped, for year+month
    rows (day imputed to mid-month)."""
    candidates = []
    for sep in ("-%d", "/%d", ".%d", " %d", "%d-", "%d/", "%d.", "%d "):
        trimmed = fmt.replace(sep, "")
        if trimmed != fmt and "%d" not in trimmed:
            candidates.append(trimmed)
    bare = fmt.replace("%d", "")
    if bare != fmt and bare not in candidates:
        candidates.append(bare)
    return candidates


class _RowWarnings:
    """Accumulates per-code warning counts with a first-occurrence pointer."""

    def __init__(self):
        self.counts: dict[str, int] = {}
        self.first: dict[str, str] = {}

    def add(self, code: str, where: str) -> None:
        self.counts[code] = self.counts.get(code, 0) + 1
        self.first.setdefault(code, where)

    def render(self) -> list[str]:
        return [
            f"{code}: {self.counts[code]} rows (first at {self.first[code]})"
            for code in sorted(self.counts)
        ]


def _parse_date(
    row: Mapping[str, str], spec: ColumnSpec, fmt: str, where: str, warnings: _RowWarnings
) -> Union[dt.date, RejectReason]:
    if isinstance(spec, dict):
        y = (row.get(spec["year"]) or "").strip()
        if not y:
            return RejectReason.MISSING_DATE
        m = (row.get(spec["month"]) or "").strip() if "month" in spec else ""
        if not m:
            # Day precision is required for expedition ordering; a bare
            # year cannot be ordered within itself.
            return RejectReason.MISSING_DATE
        d = (row.get(spec["day"]) or "").strip() if "day" in spec else ""
        try:
            year, month = int(y), int(m)
            if d:
                return dt.date(year, month, int(d))
            warnings.add("mid_month_imputation", where)
            return dt.date(year, month, 15)
        except ValueError:
            return RejectReason.MALFORMED_FIELD
    raw = (row.get(spec) or "").strip()
    if not raw:
        return RejectReason.MISSING_DATE
    try:
        return dt.datetime.strptime(raw, fmt).date()
    except ValueError:
        pass
    for month_fmt in _month_level_formats(fmt):
        try:
            parsed = dt.datetime.strptime(raw, month_fmt)
        except ValueError:
            continue
        warnings.add("mid_month_imputation", where)
        return parsed.date().replace(day=15)
    return RejectReason.MALFORMED_FIELD


def _parse_coord(row: Mapping[str, str], spec: ColumnSpec) -> Union[float, RejectReason, None]:
    """Returns the coordinate value, a RejectReason, or None when blank."""
    if isinstance(spec, dict):
        deg_raw = (row.get(spec["deg"]) or "").strip()
        if not deg_raw:
            return None
        try:
            value = float(deg_raw)
            if "min" in spec:
                minutes_raw = (row.get(spec["min"]) or "").strip()
                if minutes_raw:
                    value = value + float(minutes_raw) / 60.0 if value >= 0 \
                        else value - float(minutes_raw) / 60.0
        except ValueError:
            return RejectReason.MALFORMED_FIELD
        hem = (row.get(spec["hem"]) or "").strip().upper() if "hem" in spec else ""
        if hem:
            if hem in ("S", "W"):
                value = -value
            elif hem not in ("N", "E"):
                return RejectReason.MALFORMED_FIELD
        return value
    raw = (row.get(spec) or "").strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        return RejectReason.MALFORMED_FIELD


def parse_catch_row(
    row: Mapping[str, str],
    mapping: ColumnMapping,
    next_id: int,
    *,
    source_line: int = 0,
    where: str = "<row>",
    warnings: Optional[_RowWarnings] = None,
) -> Union[CatchRecord, RejectReason]:
    """Parse one CSV field map into a CatchRecord, or classify the rejection.

    A record is produced iff the date parses and lat/lon parse within range.
    Missing optional fields become unknown/absent, never rejections.
    """
    warnings = warnings if warnings is not None else _RowWarnings()
    cols = mapping.columns

    date = _parse_date(row, cols["date"], mapping.date_format, where, warnings)
    if isinstance(date, RejectReason):
        return date

    lat = _parse_coord(row, cols["lat"])
    lon = _parse_coord(row, cols["lon"])
    if lat is None or lon is None:
        return RejectReason.MISSING_COORDS
    if isinstance(lat, RejectReason):
        return lat
    if isinstance(lon, RejectReason):
        return lon
    if not -90.0 <= lat <= 90.0 or not -360.0 <= lon <= 360.0:
        return RejectReason.MALFORMED_FIELD
    lon = canonical_lon(lon)

    expedition_id = (row.get(cols["expedition_id"]) or "").strip()
    if not expedition_id:
        # Routes are reconstructed per expedition; a record with no
        # expedition code cannot be attributed and the field is mandatory.
        return RejectReason.MALFORMED_FIELD

    species = species_from_code(row.get(cols["species"]) or "") if "species" in cols \
        else species_from_code("")
    sex = sex_from_code(row.get(cols["sex"]) or "") if "sex" in cols else sex_from_code("")
    etype = expedition_type_from_code(row.get(cols["expedition_type"]) or "") \
        if "expedition_type" in cols else expedition_type_from_code("")

    nation = (row.get(cols["nation"]) or "").strip() if "nation" in cols else ""
    if not nation:
        nation = "unknown"

    length_ft: Optional[float] = None
    if "length_ft" in cols:
        raw_len = (row.get(cols["length_ft"]) or "").strip()
        if raw_len:
            try:
                length_ft = float(raw_len)
                if mapping.length_unit == "meters":
                    length_ft *= METERS_TO_FEET
            except ValueError:
                length_ft = None
            if length_ft is not None and not 0.0 < length_ft <= MAX_LENGTH_FT:
                length_ft = None
            if length_ft is None:
                # Optional field: implausible values are dropped, never
                # reasons to reject the whole record.
                warnings.add("length_discarded", where)

    if not EXPECTED_YEAR_SPAN[0] <= date.year <= EXPECTED_YEAR_SPAN[1]:
        warnings.add("date_out_of_expected_span", where)

    return CatchRecord(
        record_id=next_id,
        expedition_id=expedition_id,
        date=date,
        lat=lat,
        lon=lon,
        species=species,
        sex=sex,
        length_ft=length_ft,
        nation=nation,
        expedition_type=etype,
        source_line=source_line,
    )


def ingest_files(
    paths: Sequence[Union[str, Path]], mapping: Optional[ColumnMapping] = None
) -> tuple[Catalog, IngestReport]:
    """Parse the files in order into a frozen Catalog; ids start at 0."""
    mapping = mapping or canonical_mapping()
    builder = CatalogBuilder()
    report = IngestReport()
    warnings = _RowWarnings()

    for path in paths:
        path = str(path)
        try:
            f = open(path, newline="", encoding="utf-8")
        except OSError as e:
            raise IngestError(f"cannot read {path}: {e}") from e
        with f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise IngestError(f"{path}: empty file (header row required)")
            resolved = mapping.resolve(header, path)
            positions = _field_positions(resolved, header)
            for row in reader:
                line = reader.line_num
                report.total_rows += 1
                field_map = {
                    name: (row[idx] if idx < len(row) else "")
                    for name, idx in positions.items()
                }
                result = parse_catch_row(
                    field_map,
                    resolved,
                    len(builder),
                    source_line=line,
                    where=f"{path}:{line}",
                    warnings=warnings,
                )
                if isinstance(result, RejectReason):
                    report.rejected += 1
                    report.rejection_breakdown[result.value] = (
                        report.rejection_breakdown.get(result.value, 0) + 1
                    )
                else:
                    builder.append(result)
                    report.accepted += 1

    report.warnings = warnings.render()
    return builder.freeze(report), report


def _field_positions(resolved: ColumnMapping, header: Sequence[str]) -> dict[str, int]:
    """Header positions of every referenced column name."""
    index = {name: i for i, name in enumerate(header)}
    positions: dict[str, int] = {}
    for spec in resolved.columns.values():
        if isinstance(spec, dict):
            for name in spec.values():
                positions[name] = index[name]
        else:
            positions[spec] = index[spec]
    return positions


# ---------------------------------------------------------------------------
# Canonical CSV + catalog artifact


def format_float(x: float) -> str:
    s = repr(x)
    return s


def canonical_rows(catalog: Catalog, indices: Optional[np.ndarray] = None) -> Iterator[list]:
    """Canonical CSV rows (CatchRecord field order), header excluded."""
    if indices is None:
        indices = range(len(catalog))
    exp_ids = catalog.expedition_ids
    nations = catalog.nations
    from .model import SEX_ORDER, SPECIES_ORDER, TYPE_ORDER

    for i in indices:
        i = int(i)
        length = catalog.length_ft[i]
        yield [
            i,
            exp_ids[catalog.expedition_code[i]],
            dt.date.fromordinal(int(catalog.date_ord[i])).isoformat(),
            format_float(float(catalog.lat[i])),
            format_float(float(catalog.lon[i])),
            SPECIES_ORDER[catalog.species_code[i]].value,
            SEX_ORDER[catalog.sex_code[i]].value,
            "" if np.isnan(length) else format_float(float(length)),
            nations[catalog.nation_code[i]],
            TYPE_ORDER[catalog.type_code[i]].value,
            int(catalog.source_line[i]),
        ]


def iter_canonical_csv(
    catalog: Catalog, indices: Optional[np.ndarray] = None, chunk_rows: int = 8192
) -> Iterator[str]:
    """Canonical CSV text in chunks (RFC 4180, CRLF), header first."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CANONICAL_FIELDS)
    n = 0
    for row in canonical_rows(catalog, indices):
        writer.writerow(row)
        n += 1
        if n % chunk_rows == 0:
            yield buf.getvalue()
            buf.seek(0)
            buf.truncate()
    yield buf.getvalue()


def write_canonical_csv(catalog: Catalog, f, indices: Optional[np.ndarray] = None) -> None:
    for chunk in iter_canonical_csv(catalog, indices):
        f.write(chunk)


def atomic_write(path: Union[str, Path], write_fn) -> None:
    """Write via temp file + rename so failures never leave partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            write_fn(f)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def save_catalog(catalog: Catalog, path: Union[str, Path]) -> None:
    """Persist the catalog: one JSON meta line, then the canonical CSV.

    Byte-identical output for identical catalogs.
    """
    meta = {
        "format": ARTIFACT_FORMAT,
        "format_version": ARTIFACT_VERSION,
        "schema_version": catalog.schema_version,
        "count": len(catalog),
        "ingest_report": catalog.ingest_report.to_dict(),
    }

    def write(f):
        f.write(json.dumps(meta, sort_keys=True, separators=(",", ":")))
        f.write("\n")
        write_canonical_csv(catalog, f)

    atomic_write(path, write)


def load_catalog(path: Union[str, Path]) -> Catalog:
    try:
        f = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise IngestError(f"cannot read catalog {path}: {e}") from e
    with f:
        meta_line = f.readline()
        try:
            meta = json.loads(meta_line)
        except json.JSONDecodeError as e:
            raise IngestError(f"{path}: not a catalog artifact") from e
        if meta.get("format") != ARTIFACT_FORMAT:
            raise IngestError(f"{path}: not a catalog artifact")
        if meta.get("format_version") != ARTIFACT_VERSION:
            raise IngestError(
                f"{path}: unsupported format_version {meta.get('format_version')}"
            )
        report = IngestReport.from_dict(meta["ingest_report"])
        reader = csv.reader(f)
        header = next(reader)
        if header != CANONICAL_FIELDS:
            raise IngestError(f"{path}: unexpected catalog columns {header}")
        builder = CatalogBuilder()
        from .model import SEX_ORDER, SPECIES_ORDER, TYPE_ORDER

        species_idx = {s.value: i for i, s in enumerate(SPECIES_ORDER)}
        sex_idx = {s.value: i for i, s in enumerate(SEX_ORDER)}
        type_idx = {t.value: i for i, t in enumerate(TYPE_ORDER)}
        for row in reader:
            (_, exp, date_s, lat_s, lon_s, sp_s, sex_s, len_s, nation, ty_s, src_s) = row
            d = dt.date.fromisoformat(date_s)
            builder.expedition_code.append(builder.intern_expedition(exp))
            builder.date_ord.append(d.toordinal())
            builder.year.append(d.year)
            builder.lat.append(float(lat_s))
            builder.lon.append(float(lon_s))
            builder.species_code.append(species_idx[sp_s])
            builder.sex_code.append(sex_idx[sex_s])
            builder.length_ft.append(float(len_s) if len_s else np.nan)
            builder.nation_code.append(builder.intern_nation(nation))
            builder.type_code.append(type_idx[ty_s])
            builder.source_line.append(int(src_s))
        catalog = builder.freeze(report)
        if len(catalog) != meta["count"]:
            raise IngestError(
                f"{path}: row count {len(catalog)} != declared {meta['count']}"
            )
        return catalog
