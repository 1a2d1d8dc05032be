import datetime as dt
import io
import json
import os

import numpy as np
import pytest

from whaletracks.ingest import (
    ColumnMapping,
    IngestError,
    RejectReason,
    atomic_write,
    canonical_mapping,
    ingest_files,
    iter_canonical_csv,
    load_catalog,
    parse_catch_row,
    save_catalog,
    write_canonical_csv,
)
from whaletracks.model import CANONICAL_FIELDS, Sex, Species, canonical_order

VALID = {
    "expedition_id": "E1",
    "date": "1950-06-01",
    "lat": "-55.5",
    "lon": "10.25",
    "species": "blue",
    "sex": "f",
    "length_ft": "82.5",
    "nation": "norway",
    "expedition_type": "pelagic",
}


def parse(overrides=None, mapping=None):
    row = dict(VALID)
    if overrides:
        row.update(overrides)
    return parse_catch_row(row, mapping or canonical_mapping(), 0)


def write_csv(path, rows, header=None):
    header = header or list(VALID.keys())
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(r.get(k, "") for k in header))
    path.write_text("\n".join(lines) + "\n")
    return path


class TestColumnMapping:
    def test_missing_mandatory_field(self):
        with pytest.raises(IngestError, match="mandatory"):
            ColumnMapping(columns={"expedition_id": "e", "date": "d", "lat": "a"})

    def test_unknown_field(self):
        cols = dict(expedition_id="e", date="d", lat="a", lon="o", bogus="x")
        with pytest.raises(IngestError, match="unknown"):
            ColumnMapping(columns=cols)

    def test_bad_length_unit(self):
        cols = dict(expedition_id="e", date="d", lat="a", lon="o")
        with pytest.raises(IngestError, match="length_unit"):
            ColumnMapping(columns=cols, length_unit="furlongs")

    def test_index_specs_resolve_to_names(self):
        m = ColumnMapping(columns=dict(expedition_id=0, date=1, lat=2, lon=3))
        resolved = m.resolve(["e", "d", "a", "o"])
        assert resolved.columns == dict(expedition_id="e", date="d", lat="a", lon="o")

    def test_index_out_of_range_is_fatal(self):
        m = ColumnMapping(columns=dict(expedition_id=0, date=1, lat=2, lon=9))
        with pytest.raises(IngestError, match="out of range"):
            m.resolve(["e", "d", "a", "o"])

    def test_name_not_in_header_is_fatal(self):
        with pytest.raises(IngestError, match="not in header"):
            canonical_mapping().resolve(["wrong", "columns"])

    def test_from_file(self, tmp_path):
        p = tmp_path / "map.json"
        p.write_text(json.dumps({
            "columns": {"expedition_id": "Exp", "date": "Day", "lat": "Lat", "lon": "Lon"},
            "date_format": "%d/%m/%Y",
            "length_unit": "meters",
        }))
        m = ColumnMapping.from_file(p)
        assert m.date_format == "%d/%m/%Y"
        assert m.length_unit == "meters"


class TestParseCatchRow:
    def test_valid_row_round_trips(self):
        rec = parse()
        assert rec.expedition_id == "E1"
        assert rec.date == dt.date(1950, 6, 1)
        assert rec.lat == -55.5
        assert rec.lon == 10.25
        assert rec.species is Species.BLUE
        assert rec.sex is Sex.FEMALE
        assert rec.length_ft == 82.5
        assert rec.nation == "norway"

    def test_blank_date_is_missing_date(self):
        assert parse({"date": ""}) is RejectReason.MISSING_DATE

    def test_blank_coords_are_missing_coords(self):
        assert parse({"lat": ""}) is RejectReason.MISSING_COORDS
        assert parse({"lon": ""}) is RejectReason.MISSING_COORDS

    def test_garbage_date_is_malformed(self):
        assert parse({"date": "whenever"}) is RejectReason.MALFORMED_FIELD

    def test_year_only_date_is_missing(self):
        # Day precision is required to order catches within an expedition.
        assert parse({"date": "1950"}) is RejectReason.MISSING_DATE or \
            parse({"date": "1950"}) is RejectReason.MALFORMED_FIELD

    def test_year_month_imputes_mid_month(self):
        rec = parse({"date": "1950-06"})
        assert rec.date == dt.date(1950, 6, 15)

    def test_garbage_coord_is_malformed(self):
        assert parse({"lat": "far south"}) is RejectReason.MALFORMED_FIELD

    def test_out_of_range_lat_is_malformed(self):
        assert parse({"lat": "95.0"}) is RejectReason.MALFORMED_FIELD

    def test_lon_canonicalized(self):
        assert parse({"lon": "185.0"}).lon == -175.0
        assert parse({"lon": "180.0"}).lon == -180.0
        assert parse({"lon": "360.0"}).lon == 0.0
        assert parse({"lon": "-185.0"}).lon == 175.0

    def test_blank_expedition_is_malformed(self):
        assert parse({"expedition_id": ""}) is RejectReason.MALFORMED_FIELD

    def test_unknown_codes_map_to_unknown(self):
        rec = parse({"species": "kraken", "sex": "?", "expedition_type": "dirigible"})
        assert rec.species is Species.UNKNOWN
        assert rec.sex is Sex.UNKNOWN
        assert rec.expedition_type.value == "unknown"

    def test_blank_nation_becomes_unknown(self):
        assert parse({"nation": ""}).nation == "unknown"

    def test_bad_length_discarded_not_rejected(self):
        assert parse({"length_ft": "enormous"}).length_ft is None
        assert parse({"length_ft": "400"}).length_ft is None
        assert parse({"length_ft": "-3"}).length_ft is None
        assert parse({"length_ft": ""}).length_ft is None

    def test_meters_converted(self):
        m = canonical_mapping()
        m.length_unit = "meters"
        rec = parse({"length_ft": "25.0"}, mapping=m)
        assert rec.length_ft == pytest.approx(25.0 * 3.28084)

    def test_split_date_columns(self):
        m = ColumnMapping(columns={
            "expedition_id": "e", "lat": "a", "lon": "o",
            "date": {"year": "y", "month": "m", "day": "d"},
        })
        row = {"e": "E1", "a": "-50", "o": "10", "y": "1950", "m": "6", "d": "3"}
        assert parse_catch_row(row, m, 0).date == dt.date(1950, 6, 3)
        row["d"] = ""
        assert parse_catch_row(row, m, 0).date == dt.date(1950, 6, 15)
        row["m"] = ""
        assert parse_catch_row(row, m, 0) is RejectReason.MISSING_DATE

    def test_degree_minute_hemisphere_coords(self):
        m = ColumnMapping(columns={
            "expedition_id": "e", "date": "d",
            "lat": {"deg": "latd", "min": "latm", "hem": "lath"},
            "lon": {"deg": "lond", "min": "lonm", "hem": "lonh"},
        })
        row = {"e": "E1", "d": "1950-06-01", "latd": "54", "latm": "30", "lath": "S",
               "lond": "170", "lonm": "15", "lonh": "W"}
        rec = parse_catch_row(row, m, 0)
        assert rec.lat == pytest.approx(-54.5)
        assert rec.lon == pytest.approx(-170.25)
        row["lath"] = "X"
        assert parse_catch_row(row, m, 0) is RejectReason.MALFORMED_FIELD


class TestIngestFiles:
    def test_two_files_concatenate(self, tmp_path):
        rows = [dict(VALID, expedition_id=f"E{k}") for k in range(3)]
        a = write_csv(tmp_path / "a.csv", rows)
        b = write_csv(tmp_path / "b.csv", rows)
        catalog, report = ingest_files([a, b])
        assert len(catalog) == 6
        assert report.total_rows == 6
        assert report.accepted == 6
        assert [r.record_id for r in catalog] == list(range(6))

    def test_rejections_counted_by_reason(self, tmp_path):
        rows = [dict(VALID) for _ in range(5)]
        rows[1]["date"] = ""
        rows[2]["lat"] = ""
        rows[3]["date"] = "gibberish"
        p = write_csv(tmp_path / "c.csv", rows)
        catalog, report = ingest_files([p])
        assert report.accepted == 2
        assert report.rejected == 3
        assert report.rejection_breakdown == {
            "missing_date": 1,
            "missing_coords": 1,
            "malformed_field": 1,
        }
        assert report.total_rows == report.accepted + report.rejected

    def test_source_lines_point_at_file_rows(self, tmp_path):
        p = write_csv(tmp_path / "d.csv", [dict(VALID), dict(VALID)])
        catalog, _ = ingest_files([p])
        # Line 1 is the header.
        assert list(catalog.source_line) == [2, 3]

    def test_missing_file_is_fatal(self, tmp_path):
        with pytest.raises(IngestError, match="cannot read"):
            ingest_files([tmp_path / "nope.csv"])

    def test_empty_file_is_fatal(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("")
        with pytest.raises(IngestError, match="header"):
            ingest_files([p])

    def test_warnings_aggregated(self, tmp_path):
        rows = [dict(VALID, date="1950-06"), dict(VALID, length_ft="999"),
                dict(VALID, date="1870-01-01")]
        p = write_csv(tmp_path / "w.csv", rows)
        _, report = ingest_files([p])
        text = "\n".join(report.warnings)
        assert "mid_month_imputation" in text
        assert "length_discarded" in text
        assert "date_out_of_expected_span" in text


class TestCanonicalCsv:
    def test_header_and_crlf(self, small_catalog):
        text = "".join(iter_canonical_csv(small_catalog, np.arange(3)))
        lines = text.split("\r\n")
        assert lines[0] == ",".join(CANONICAL_FIELDS)
        assert len(lines) == 5  # header + 3 rows + trailing empty

    def test_export_then_ingest_is_identity(self, small_catalog, tmp_path):
        order = canonical_order(small_catalog, np.arange(len(small_catalog)))
        out = tmp_path / "export.csv"
        with open(out, "w", newline="", encoding="utf-8") as f:
            write_canonical_csv(small_catalog, f, order)
        again, report = ingest_files([out])
        assert report.rejected == 0
        assert len(again) == len(small_catalog)
        for k, i in enumerate(order):
            a = small_catalog.record(int(i))
            b = again.record(k)
            assert (a.expedition_id, a.date, a.lat, a.lon, a.species, a.sex,
                    a.length_ft, a.nation, a.expedition_type) == \
                   (b.expedition_id, b.date, b.lat, b.lon, b.species, b.sex,
                    b.length_ft, b.nation, b.expedition_type)

    def test_floats_round_trip_exactly(self, tmp_path):
        row = dict(VALID, lat="-55.123456789012", lon="179.999999999")
        p = write_csv(tmp_path / "f.csv", [row])
        catalog, _ = ingest_files([p])
        text = "".join(iter_canonical_csv(catalog))
        assert "-55.123456789012" in text
        assert "179.999999999" in text


class TestArtifact:
    def test_save_load_round_trip(self, small_catalog, tmp_path):
        p = tmp_path / "catalog.wt"
        save_catalog(small_catalog, p)
        loaded = load_catalog(p)
        assert len(loaded) == len(small_catalog)
        assert loaded.expedition_ids == small_catalog.expedition_ids
        assert loaded.nations == small_catalog.nations
        np.testing.assert_array_equal(loaded.lat, small_catalog.lat)
        np.testing.assert_array_equal(loaded.lon, small_catalog.lon)
        np.testing.assert_array_equal(loaded.date_ord, small_catalog.date_ord)
        np.testing.assert_array_equal(loaded.species_code, small_catalog.species_code)
        np.testing.assert_array_equal(loaded.length_ft, small_catalog.length_ft)
        assert loaded.ingest_report.to_dict() == small_catalog.ingest_report.to_dict()

    def test_save_is_deterministic(self, small_catalog, tmp_path):
        a = tmp_path / "a.wt"
        b = tmp_path / "b.wt"
        save_catalog(small_catalog, a)
        save_catalog(small_catalog, b)
        assert a.read_bytes() == b.read_bytes()

    def test_resave_after_load_is_byte_identical(self, small_catalog, tmp_path):
        a = tmp_path / "a.wt"
        save_catalog(small_catalog, a)
        b = tmp_path / "b.wt"
        save_catalog(load_catalog(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_not_an_artifact(self, tmp_path):
        p = tmp_path / "junk"
        p.write_text("hello\nworld\n")
        with pytest.raises(IngestError, match="not a catalog artifact"):
            load_catalog(p)

    def test_unsupported_version(self, small_catalog, tmp_path):
        p = tmp_path / "catalog.wt"
        save_catalog(small_catalog, p)
        text = p.read_text()
        meta, rest = text.split("\n", 1)
        doc = json.loads(meta)
        doc["format_version"] = 99
        p.write_text(json.dumps(doc) + "\n" + rest)
        with pytest.raises(IngestError, match="format_version"):
            load_catalog(p)


class TestAtomicWrite:
    def test_failure_leaves_no_file(self, tmp_path):
        target = tmp_path / "out.json"

        def boom(f):
            f.write("partial")
            raise RuntimeError("disk on fire")

        with pytest.raises(RuntimeError):
            atomic_write(target, boom)
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []

    def test_failure_keeps_previous_content(self, tmp_path):
        target = tmp_path / "out.json"
        target.write_text("original")
        with pytest.raises(RuntimeError):
            atomic_write(target, lambda f: (_ for _ in ()).throw(RuntimeError()))
        assert target.read_text() == "original"

    def test_success_replaces(self, tmp_path):
        target = tmp_path / "out.json"
        target.write_text("old")
        atomic_write(target, lambda f: f.write("new"))
        assert target.read_text() == "new"
