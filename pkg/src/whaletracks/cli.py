"""Operator entry points: ingest, serve, stats, export, synth, and
per-product file outputs (bins, effort, routes, timeline, lengths).

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error. Output
files are written atomically (temp file + rename), never left partial.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.parse
from typing import Optional

from .effort import cpue_grid, effort_raster
from .filters import FilterError, parse_filter
from .grids import bin_catches, length_histogram, timeline_histogram
from .ingest import (
    ColumnMapping,
    IngestError,
    atomic_write,
    ingest_files,
    iter_canonical_csv,
    load_catalog,
    save_catalog,
)
from .model import Catalog, FilterSpec, accept_mask, canonical_order
from .routes import build_graph, graph_to_geojson
from .server import ServiceConfig
from . import synth as synth_mod

import numpy as np

USAGE_EXIT = 1
DATA_EXIT = 2
IO_EXIT = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for data
    # errors, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _filter_arg(value: Optional[str]) -> FilterSpec:
    if not value:
        return FilterSpec()
    pairs = urllib.parse.parse_qsl(value, keep_blank_values=True)
    if not pairs and value.strip():
        raise FilterError("filter", f"cannot parse {value!r}")
    return parse_filter(pairs)


def _write_json(path: str, obj) -> None:
    atomic_write(path, lambda f: f.write(json.dumps(obj, indent=2, sort_keys=True) + "\n"))


def _emit_json(obj, out: Optional[str]) -> None:
    if out:
        _write_json(out, obj)
    else:
        json.dump(obj, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _load(path: str) -> Catalog:
    return load_catalog(path)


def cmd_ingest(args) -> int:
    mapping = ColumnMapping.from_file(args.mapping) if args.mapping else None
    catalog, report = ingest_files(args.files, mapping)
    save_catalog(catalog, args.out)
    _write_json(args.out + ".report.json", report.to_dict())
    print(
        f"accepted {report.accepted} of {report.total_rows} rows "
        f"({report.rejection_rate:.2%} rejected) -> {args.out}"
    )
    return 0


def cmd_serve(args) -> int:
    cfg = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    if args.host:
        cfg.host = args.host
    if args.port is not None:
        cfg.port = args.port
    catalog = _load(args.catalog)
    from .server import run

    print(f"serving {len(catalog)} records on {cfg.host}:{cfg.port}", flush=True)
    run(catalog, cfg)
    return 0


def cmd_stats(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    graph = build_graph(catalog, spec)
    report = catalog.ingest_report
    payload = {
        "records": len(catalog),
        "filtered": int(accept_mask(catalog, spec).sum()),
        "expeditions": len(catalog.expedition_ids),
        "tracks": graph.n_tracks,
        "routes": graph.n_edges,
        "rejected": report.rejected,
        "rejection_breakdown": report.rejection_breakdown,
        "warnings": report.warnings,
    }
    if args.json:
        _emit_json(payload, None)
    else:
        print(f"records:     {payload['records']}")
        print(f"filtered:    {payload['filtered']}")
        print(f"expeditions: {payload['expeditions']}")
        print(f"tracks:      {payload['tracks']}")
        print(f"routes:      {payload['routes']}")
        print(f"rejected:    {payload['rejected']}")
        for reason, count in sorted(payload["rejection_breakdown"].items()):
            print(f"  {reason}: {count}")
    return 0


def cmd_export(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    order = canonical_order(catalog, np.nonzero(accept_mask(catalog, spec))[0])
    for chunk in iter_canonical_csv(catalog, order):
        sys.stdout.write(chunk)
    return 0


def cmd_synth(args) -> int:
    if args.demo:
        header, rows, meta = synth_mod.generate_progression_demo(args.seed)
    elif args.spec:
        spec = synth_mod.SynthSpec.from_json(args.spec)
        header, rows, meta = synth_mod.generate_rows(spec)
    elif args.rows:
        header, rows, meta = synth_mod.generate_defect_corpus(args.seed, args.rows, args.defects)
    else:
        raise FilterError("synth", "one of --demo, --spec, or --rows is required")
    synth_mod.write_corpus(args.out, header, rows, meta)
    print(f"wrote {meta['records']} rows -> {args.out} (sidecar {args.out}.meta.json)")
    return 0


def cmd_bins(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    grid = bin_catches(catalog, spec, args.bin)
    _emit_json(grid.to_geojson() if args.format == "geojson" else grid.to_dict(), args.out)
    return 0


def cmd_effort(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    graph = build_graph(catalog)
    raster = effort_raster(graph, spec, args.bin, spec.date_range)
    _emit_json(raster.to_geojson() if args.format == "geojson" else raster.to_dict(), args.out)
    return 0


def cmd_cpue(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    graph = build_graph(catalog)
    grid = cpue_grid(
        bin_catches(catalog, spec, args.bin),
        effort_raster(graph, spec, args.bin, spec.date_range),
        args.min_effort,
    )
    _emit_json(grid.to_geojson() if args.format == "geojson" else grid.to_dict(), args.out)
    return 0


def cmd_routes(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    graph = build_graph(catalog, spec)
    _emit_json(graph_to_geojson(graph, include_nodes=args.nodes), args.out)
    return 0


def cmd_timeline(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    buckets = timeline_histogram(catalog, spec, args.interval)
    payload = {
        "interval": args.interval,
        "total": sum(c for _, c in buckets),
        "buckets": [{"year": y, "count": c} for y, c in buckets],
    }
    _emit_json(payload, args.out)
    return 0


def cmd_lengths(args) -> int:
    catalog = _load(args.catalog)
    spec = _filter_arg(args.filter)
    hist, excluded = length_histogram(catalog, spec, args.bucket)
    payload = {
        "bucket_ft": args.bucket,
        "total": sum(c for _, c in hist),
        "excluded": excluded,
        "buckets": [{"start_ft": s, "count": c} for s, c in hist],
    }
    _emit_json(payload, args.out)
    return 0


def _add_filter_opt(p) -> None:
    p.add_argument(
        "--filter",
        default="",
        help="filter expression, same grammar as the HTTP API "
        "(e.g. \"species=blue&from=1950-01-01\")",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="whaletracks",
                     description="ingest catch logs, query products, run the service")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", help="parse raw CSV files into a catalog artifact")
    p.add_argument("files", nargs="+", help="raw CSV files, merged in order")
    p.add_argument("--mapping", help="JSON column mapping file")
    p.add_argument("--out", required=True, help="catalog artifact path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--catalog", required=True)
    p.add_argument("--config", help="JSON service config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("stats", help="record, expedition, and route counts")
    p.add_argument("--catalog", required=True)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    _add_filter_opt(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="write filtered records as canonical CSV to stdout")
    p.add_argument("--catalog", required=True)
    _add_filter_opt(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--demo", action="store_true", help="bundled progression demo (~100k rows)")
    p.add_argument("--spec", help="JSON SynthSpec file")
    p.add_argument("--rows", type=int, help="quick corpus with --defects planted defects")
    p.add_argument("--defects", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    for name, func, extras in (
        ("bins", cmd_bins, ("bin", "format")),
        ("effort", cmd_effort, ("bin", "format")),
        ("cpue", cmd_cpue, ("bin", "format", "min_effort")),
        ("routes", cmd_routes, ("nodes",)),
        ("timeline", cmd_timeline, ("interval",)),
        ("lengths", cmd_lengths, ("bucket",)),
    ):
        p = sub.add_parser(name, help=f"write the {name} product as JSON/GeoJSON")
        p.add_argument("--catalog", required=True)
        p.add_argument("--out", help="output file (stdout when omitted)")
        _add_filter_opt(p)
        if "bin" in extras:
            p.add_argument("--bin", type=float, default=5.0, choices=(1.0, 2.0, 5.0, 10.0))
        if "format" in extras:
            p.add_argument("--format", choices=("json", "geojson"), default="json")
        if "min_effort" in extras:
            p.add_argument("--min-effort", dest="min_effort", type=float, default=100.0)
        if "nodes" in extras:
            p.add_argument("--nodes", action="store_true", help="include stop nodes as Points")
        if "interval" in extras:
            p.add_argument("--interval", type=int, default=1)
        if "bucket" in extras:
            p.add_argument("--bucket", type=float, default=5.0)
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FilterError as exc:
        print(f"whaletracks: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (IngestError, ValueError) as exc:
        print(f"whaletracks: {exc}", file=sys.stderr)
        # An IngestError wrapping an OSError is an unreadable file, not
        # bad data.
        return IO_EXIT if isinstance(exc.__cause__, OSError) else DATA_EXIT
    except BrokenPipeError:
        # Downstream consumer (head, less) closed stdout; not an error
        # worth reporting. The dup keeps the interpreter's final flush
        # from raising again.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return IO_EXIT
    except OSError as exc:
        print(f"whaletracks: {exc}", file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())
