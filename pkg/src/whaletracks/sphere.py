"""Great-circle geometry on a spherical Earth."""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_KM = 6371.0

# Arcs sampled for rendering use at most this point spacing.
RENDER_STEP_DEG = 2.0

_COINCIDENT_EPS = 1e-12
_ANTIPODAL_EPS = 1e-6


def great_circle_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Haversine distance in kilometers, sphere radius 6371 km."""
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def to_unit_xyz(lat_deg, lon_deg) -> np.ndarray:
    """Geographic degrees to unit vectors, shape (..., 3)."""
    lat = np.radians(np.asarray(lat_deg, dtype=np.float64))
    lon = np.radians(np.asarray(lon_deg, dtype=np.float64))
    cos_lat = np.cos(lat)
    return np.stack([cos_lat * np.cos(lon), cos_lat * np.sin(lon), np.sin(lat)], axis=-1)


def from_unit_xyz(xyz: np.ndarray):
    """Unit vectors back to (lat, lon) degrees with lon in [-180, 180)."""
    lat = np.degrees(np.arcsin(np.clip(xyz[..., 2], -1.0, 1.0)))
    lon = np.degrees(np.arctan2(xyz[..., 1], xyz[..., 0]))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    return lat, lon


def arc_angle(p1: np.ndarray, p2: np.ndarray) -> float:
    """Central angle between two unit vectors, in radians."""
    dot = float(np.dot(p1, p2))
    cross = np.cross(p1, p2)
    return math.atan2(float(np.linalg.norm(cross)), dot)


def detour_waypoint(p1: np.ndarray) -> np.ndarray:
    """Deterministic waypoint perpendicular to p1, for antipodal arcs."""
    # Near the poles the z axis is unusable as a reference.
    axis = np.array([1.0, 0.0, 0.0]) if abs(p1[2]) > 0.9 else np.array([0.0, 0.0, 1.0])
    w = np.cross(p1, axis)
    return w / np.linalg.norm(w)


def _slerp(p1: np.ndarray, p2: np.ndarray, omega: float, t: np.ndarray) -> np.ndarray:
    sin_om = math.sin(omega)
    a = np.sin((1.0 - t) * omega) / sin_om
    b = np.sin(t * omega) / sin_om
    return a[:, None] * p1[None, :] + b[:, None] * p2[None, :]


def arc_points(lat1: float, lon1: float, lat2: float, lon2: float, n: int):
    """Points along the shorter great-circle arc, endpoints included.

    Exactly n >= 2 points for ordinary arcs. Antipodal endpoints take a
    deterministic detour via a waypoint perpendicular to the start point
    and may return one extra point.
    """
    if n < 2:
        raise ValueError("need at least two points")
    p1 = to_unit_xyz(lat1, lon1)
    p2 = to_unit_xyz(lat2, lon2)
    omega = arc_angle(p1, p2)
    if omega < _COINCIDENT_EPS:
        return np.full(n, lat1), np.full(n, lon1)
    if omega > math.pi - _ANTIPODAL_EPS:
        w = detour_waypoint(p1)
        half = max(2, n // 2 + 1)
        la1, lo1 = _arc_points_between(p1, w, half)
        la2, lo2 = _arc_points_between(w, p2, max(2, n - half + 1))
        return np.concatenate([la1, la2[1:]]), np.concatenate([lo1, lo2[1:]])
    return _arc_points_between(p1, p2, n)


def _arc_points_between(p1: np.ndarray, p2: np.ndarray, n: int):
    omega = arc_angle(p1, p2)
    t = np.linspace(0.0, 1.0, n)
    return from_unit_xyz(_slerp(p1, p2, omega, t))


def render_points(lat1: float, lon1: float, lat2: float, lon2: float):
    """Arc polyline sampled at RENDER_STEP_DEG or finer."""
    omega = arc_angle(to_unit_xyz(lat1, lon1), to_unit_xyz(lat2, lon2))
    n = max(2, int(math.degrees(omega) / RENDER_STEP_DEG) + 2)
    return arc_points(lat1, lon1, lat2, lon2, n)


def split_antimeridian(lats: np.ndarray, lons: np.ndarray) -> list:
    """Split a polyline at +-180 longitude into GeoJSON-ready parts.

    Returns a list of [lon, lat] coordinate lists. Crossing segments are
    interpolated linearly in the sampled polyline, which is fine as long
    as samples are dense (render_points guarantees <= 2 deg spacing).
    """
    parts = []
    cur = [[float(lons[0]), float(lats[0])]]
    for k in range(1, len(lons)):
        lon_prev, lat_prev = float(lons[k - 1]), float(lats[k - 1])
        lon_next, lat_next = float(lons[k]), float(lats[k])
        dlon = lon_next - lon_prev
        if abs(dlon) > 180.0:
            # Unwrap so the segment takes the short way round.
            unwrapped = lon_next - 360.0 if dlon > 0 else lon_next + 360.0
            boundary = -180.0 if unwrapped < lon_prev else 180.0
            span = unwrapped - lon_prev
            t = 0.0 if span == 0.0 else (boundary - lon_prev) / span
            lat_cross = lat_prev + t * (lat_next - lat_prev)
            cur.append([boundary, lat_cross])
            parts.append(cur)
            cur = [[-boundary, lat_cross], [lon_next, lat_next]]
        else:
            cur.append([lon_next, lat_next])
    parts.append(cur)
    return [p for p in parts if len(p) >= 2]
