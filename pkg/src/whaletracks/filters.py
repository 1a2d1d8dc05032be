"""Filter parameter grammar shared by the HTTP API and the CLI.

The grammar is flat query parameters: species=blue,fin & sex=f &
from=1950-01-01 & to=1969-12-31 & bbox=-70,-30,-180,180 & nation=norway
& type=pelagic & lmin=60 & lmax=90 & expedition=A12. Unknown keys and
unparseable values are errors, never silent defaults.
"""

from __future__ import annotations

import datetime as dt
from typing import Mapping

from .model import (
    ExpeditionType,
    FilterSpec,
    Sex,
    Species,
    expedition_type_from_code,
    sex_from_code,
)

KNOWN_KEYS = ("species", "sex", "from", "to", "bbox", "nation", "type", "lmin", "lmax", "expedition")

_SPECIES_VALUES = {s.value for s in Species}
_SEX_ALIASES = {"f", "m", "u", "female", "male", "unknown"}
_TYPE_ALIASES = {"land", "l", "pelagic", "p", "unknown", "u"}


class FilterError(ValueError):
    """A named parameter failed to parse; maps to a 400-class response."""

    def __init__(self, param: str, reason: str):
        self.param = param
        self.reason = reason
        super().__init__(f"{param}: {reason}")


def _items(params):
    if isinstance(params, Mapping):
        return list(params.items())
    return list(params)


def _split_list(param: str, value: str) -> list:
    parts = [p.strip() for p in value.split(",")]
    if any(not p for p in parts):
        raise FilterError(param, "empty list entry")
    return parts


def _parse_date(param: str, value: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise FilterError(param, f"not an ISO date: {value!r}") from None


def _parse_float(param: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise FilterError(param, f"not a number: {value!r}") from None


def parse_filter(params) -> FilterSpec:
    """Build a FilterSpec from decoded query parameters.

    Accepts a mapping or an iterable of (key, value) pairs; repeated keys
    merge as if comma-joined.
    """
    merged: dict = {}
    for key, value in _items(params):
        if key not in KNOWN_KEYS:
            raise FilterError(key, "unknown filter parameter")
        if value is None or value == "":
            raise FilterError(key, "empty value")
        if key in merged:
            merged[key] = f"{merged[key]},{value}"
        else:
            merged[key] = value

    species = None
    if "species" in merged:
        names = _split_list("species", merged["species"])
        for n in names:
            if n not in _SPECIES_VALUES:
                raise FilterError("species", f"unknown species code {n!r}")
        species = frozenset(Species(n) for n in names)

    sexes = None
    if "sex" in merged:
        names = _split_list("sex", merged["sex"])
        for n in names:
            if n.lower() not in _SEX_ALIASES:
                raise FilterError("sex", f"unknown sex code {n!r}")
        sexes = frozenset(sex_from_code(n) for n in names)

    date_lo = _parse_date("from", merged["from"]) if "from" in merged else None
    date_hi = _parse_date("to", merged["to"]) if "to" in merged else None
    date_range = (date_lo, date_hi) if (date_lo or date_hi) else None

    bbox = None
    if "bbox" in merged:
        parts = merged["bbox"].split(",")
        if len(parts) != 4:
            raise FilterError("bbox", f"expected lat_min,lat_max,lon_min,lon_max, got {len(parts)} values")
        lat_min, lat_max, lon_min, lon_max = (_parse_float("bbox", p) for p in parts)
        if not (-90 <= lat_min <= 90 and -90 <= lat_max <= 90):
            raise FilterError("bbox", "latitudes must be within [-90, 90]")
        if not (-180 <= lon_min <= 180 and -180 <= lon_max <= 180):
            raise FilterError("bbox", "longitudes must be within [-180, 180]")
        bbox = (lat_min, lat_max, lon_min, lon_max)

    nations = frozenset(_split_list("nation", merged["nation"])) if "nation" in merged else None

    types = None
    if "type" in merged:
        names = _split_list("type", merged["type"])
        for n in names:
            if n.lower() not in _TYPE_ALIASES:
                raise FilterError("type", f"unknown expedition type {n!r}")
        types = frozenset(expedition_type_from_code(n) for n in names)

    lmin = _parse_float("lmin", merged["lmin"]) if "lmin" in merged else None
    lmax = _parse_float("lmax", merged["lmax"]) if "lmax" in merged else None
    for param, val in (("lmin", lmin), ("lmax", lmax)):
        if val is not None and val < 0:
            raise FilterError(param, "length must be non-negative")
    length_range = (lmin, lmax) if (lmin is not None or lmax is not None) else None

    expeditions = (
        frozenset(_split_list("expedition", merged["expedition"])) if "expedition" in merged else None
    )

    try:
        return FilterSpec(
            species_set=species,
            sex_set=sexes,
            date_range=date_range,
            bbox=bbox,
            nations=nations,
            expedition_types=types,
            length_range_ft=length_range,
            expedition_ids=expeditions,
        )
    except ValueError as exc:
        raise FilterError("filter", str(exc)) from None


def render_filter(spec: FilterSpec) -> dict:
    """Inverse of parse_filter: parse_filter(render_filter(s)) == s.

    Match-nothing filters (empty predicate sets, produced by intersect on
    disjoint filters) have no URL form and are rejected.
    """
    for name in ("species_set", "sex_set", "nations", "expedition_types", "expedition_ids"):
        value = getattr(spec, name)
        if value is not None and not value:
            raise ValueError(f"cannot render empty {name}; the grammar has no match-nothing form")
    params: dict = {}
    if spec.species_set is not None:
        params["species"] = ",".join(sorted(s.value for s in spec.species_set))
    if spec.sex_set is not None:
        params["sex"] = ",".join(sorted(s.value for s in spec.sex_set))
    if spec.date_range is not None:
        lo, hi = spec.date_range
        if lo is not None:
            params["from"] = lo.isoformat()
        if hi is not None:
            params["to"] = hi.isoformat()
    if spec.bbox is not None:
        params["bbox"] = ",".join(repr(float(v)) for v in spec.bbox)
    if spec.nations is not None:
        params["nation"] = ",".join(sorted(spec.nations))
    if spec.expedition_types is not None:
        params["type"] = ",".join(sorted(t.value for t in spec.expedition_types))
    if spec.length_range_ft is not None:
        lo, hi = spec.length_range_ft
        if lo is not None:
            params["lmin"] = repr(float(lo))
        if hi is not None:
            params["lmax"] = repr(float(hi))
    if spec.expedition_ids is not None:
        params["expedition"] = ",".join(sorted(spec.expedition_ids))
    return params
