"""Hot numeric kernels, numba-compiled with a pure numpy fallback.

Set WHALETRACKS_NUMBA=0 to force the numpy path even when numba is
installed. Both paths implement identical arithmetic and are
equivalence-tested; benchmarks/bench_kernels.py compares their speed.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .sphere import EARTH_RADIUS_KM

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def _env_wants_numba() -> bool:
    flag = os.environ.get("WHALETRACKS_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _env_wants_numba()

# Arc sampling resolution: at least NSEG_MIN midpoint samples per arc and
# never a coarser step than MAX_STEP_DEG. Worst-case per-cell assignment
# error is a couple of segment lengths, i.e. well under 1% of arc length.
NSEG_MIN = 512
MAX_STEP_DEG = 0.05
COINCIDENT_EPS = 1e-12
ANTIPODAL_EPS = 1e-6


# -- haversine ---------------------------------------------------------------


@njit(cache=True)
def _haversine_nb(lat1, lon1, lat2, lon2):
    n = lat1.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        phi1 = math.radians(lat1[i])
        phi2 = math.radians(lat2[i])
        dphi = math.radians(lat2[i] - lat1[i])
        dlam = math.radians(lon2[i] - lon1[i])
        a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
        root = math.sqrt(a)
        if root > 1.0:
            root = 1.0
        out[i] = 2.0 * EARTH_RADIUS_KM * math.asin(root)
    return out


def _haversine_np(lat1, lon1, lat2, lon2):
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dphi = np.radians(lat2 - lat1)
    dlam = np.radians(lon2 - lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(np.sqrt(a), 1.0))


def haversine_km(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Elementwise great-circle distance over coordinate arrays."""
    lat1 = np.ascontiguousarray(lat1, dtype=np.float64)
    lon1 = np.ascontiguousarray(lon1, dtype=np.float64)
    lat2 = np.ascontiguousarray(lat2, dtype=np.float64)
    lon2 = np.ascontiguousarray(lon2, dtype=np.float64)
    if USE_NUMBA:
        return _haversine_nb(lat1, lon1, lat2, lon2)
    return _haversine_np(lat1, lon1, lat2, lon2)


# -- great-circle rasterization ----------------------------------------------


def _num_segments(omega_deg: float) -> int:
    nseg = int(omega_deg / MAX_STEP_DEG) + 1
    return NSEG_MIN if nseg < NSEG_MIN else nseg


@njit(cache=True)
def _deposit_arc_nb(x1, y1, z1, x2, y2, z2, omega, contrib, bin_deg, grid):
    nlat, nlon = grid.shape
    nseg = int(math.degrees(omega) / MAX_STEP_DEG) + 1
    if nseg < NSEG_MIN:
        nseg = NSEG_MIN
    per_seg = contrib / nseg
    sin_om = math.sin(omega)
    for k in range(nseg):
        t = (k + 0.5) / nseg
        a = math.sin((1.0 - t) * omega) / sin_om
        b = math.sin(t * omega) / sin_om
        x = a * x1 + b * x2
        y = a * y1 + b * y2
        z = a * z1 + b * z2
        if z > 1.0:
            z = 1.0
        elif z < -1.0:
            z = -1.0
        lat = math.degrees(math.asin(z))
        lon = math.degrees(math.atan2(y, x))
        if lon >= 180.0:
            lon -= 360.0
        i = int((lat + 90.0) / bin_deg)
        if i >= nlat:
            i = nlat - 1
        j = int((lon + 180.0) / bin_deg)
        if j >= nlon:
            j = nlon - 1
        grid[i, j] += per_seg


@njit(cache=True)
def _rasterize_nb(lat1, lon1, lat2, lon2, contrib, bin_deg, grid):
    nlat, nlon = grid.shape
    for e in range(lat1.shape[0]):
        c = contrib[e]
        if c == 0.0:
            continue
        phi1 = math.radians(lat1[e])
        lam1 = math.radians(lon1[e])
        phi2 = math.radians(lat2[e])
        lam2 = math.radians(lon2[e])
        x1 = math.cos(phi1) * math.cos(lam1)
        y1 = math.cos(phi1) * math.sin(lam1)
        z1 = math.sin(phi1)
        x2 = math.cos(phi2) * math.cos(lam2)
        y2 = math.cos(phi2) * math.sin(lam2)
        z2 = math.sin(phi2)
        dot = x1 * x2 + y1 * y2 + z1 * z2
        cx = y1 * z2 - z1 * y2
        cy = z1 * x2 - x1 * z2
        cz = x1 * y2 - y1 * x2
        omega = math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), dot)
        if omega < COINCIDENT_EPS:
            i = int((lat1[e] + 90.0) / bin_deg)
            if i >= nlat:
                i = nlat - 1
            j = int((lon1[e] + 180.0) / bin_deg)
            if j >= nlon:
                j = nlon - 1
            grid[i, j] += c
            continue
        if omega > math.pi - ANTIPODAL_EPS:
            # Antipodal: detour via a waypoint perpendicular to p1, same
            # convention as sphere.detour_waypoint.
            if abs(z1) > 0.9:
                kx, ky, kz = 1.0, 0.0, 0.0
            else:
                kx, ky, kz = 0.0, 0.0, 1.0
            wx = y1 * kz - z1 * ky
            wy = z1 * kx - x1 * kz
            wz = x1 * ky - y1 * kx
            wn = math.sqrt(wx * wx + wy * wy + wz * wz)
            wx /= wn
            wy /= wn
            wz /= wn
            d1 = x1 * wx + y1 * wy + z1 * wz
            d2 = wx * x2 + wy * y2 + wz * z2
            if d1 > 1.0:
                d1 = 1.0
            elif d1 < -1.0:
                d1 = -1.0
            if d2 > 1.0:
                d2 = 1.0
            elif d2 < -1.0:
                d2 = -1.0
            om1 = math.acos(d1)
            om2 = math.acos(d2)
            share = c / (om1 + om2)
            _deposit_arc_nb(x1, y1, z1, wx, wy, wz, om1, share * om1, bin_deg, grid)
            _deposit_arc_nb(wx, wy, wz, x2, y2, z2, om2, share * om2, bin_deg, grid)
            continue
        _deposit_arc_nb(x1, y1, z1, x2, y2, z2, omega, c, bin_deg, grid)


def _arc_cells_np(p1, p2, omega, contrib, bin_deg, nlat, nlon):
    """Midpoint-sample one sub-arc; returns (i, j, value) sample arrays."""
    nseg = _num_segments(math.degrees(omega))
    t = (np.arange(nseg, dtype=np.float64) + 0.5) / nseg
    sin_om = math.sin(omega)
    a = np.sin((1.0 - t) * omega) / sin_om
    b = np.sin(t * omega) / sin_om
    xyz = a[:, None] * p1[None, :] + b[:, None] * p2[None, :]
    lat = np.degrees(np.arcsin(np.clip(xyz[:, 2], -1.0, 1.0)))
    lon = np.degrees(np.arctan2(xyz[:, 1], xyz[:, 0]))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    ii = np.minimum(((lat + 90.0) / bin_deg).astype(np.int64), nlat - 1)
    jj = np.minimum(((lon + 180.0) / bin_deg).astype(np.int64), nlon - 1)
    vals = np.full(nseg, contrib / nseg)
    return ii, jj, vals


def _edge_cells_np(lat1, lon1, lat2, lon2, contrib, bin_deg, nlat, nlon):
    """All (i, j, value) samples for one edge, antipodal detour included."""
    p1 = np.squeeze(_to_xyz(lat1, lon1))
    p2 = np.squeeze(_to_xyz(lat2, lon2))
    dot = float(np.dot(p1, p2))
    cross = np.cross(p1, p2)
    omega = math.atan2(float(np.linalg.norm(cross)), dot)
    if omega < COINCIDENT_EPS:
        i = min(int((lat1 + 90.0) / bin_deg), nlat - 1)
        j = min(int((lon1 + 180.0) / bin_deg), nlon - 1)
        return np.array([i]), np.array([j]), np.array([contrib])
    if omega > math.pi - ANTIPODAL_EPS:
        axis = np.array([1.0, 0.0, 0.0]) if abs(p1[2]) > 0.9 else np.array([0.0, 0.0, 1.0])
        w = np.cross(p1, axis)
        w /= np.linalg.norm(w)
        om1 = math.acos(min(1.0, max(-1.0, float(np.dot(p1, w)))))
        om2 = math.acos(min(1.0, max(-1.0, float(np.dot(w, p2)))))
        share = contrib / (om1 + om2)
        i1, j1, v1 = _arc_cells_np(p1, w, om1, share * om1, bin_deg, nlat, nlon)
        i2, j2, v2 = _arc_cells_np(w, p2, om2, share * om2, bin_deg, nlat, nlon)
        return np.concatenate([i1, i2]), np.concatenate([j1, j2]), np.concatenate([v1, v2])
    return _arc_cells_np(p1, p2, omega, contrib, bin_deg, nlat, nlon)


def _to_xyz(lat_deg, lon_deg):
    lat = math.radians(lat_deg)
    lon = math.radians(lon_deg)
    return np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


def _rasterize_np(lat1, lon1, lat2, lon2, contrib, bin_deg, grid):
    nlat, nlon = grid.shape
    for e in range(lat1.shape[0]):
        if contrib[e] == 0.0:
            continue
        ii, jj, vals = _edge_cells_np(
            lat1[e], lon1[e], lat2[e], lon2[e], contrib[e], bin_deg, nlat, nlon
        )
        np.add.at(grid, (ii, jj), vals)


def grid_shape(bin_deg: float) -> tuple:
    return int(round(180.0 / bin_deg)), int(round(360.0 / bin_deg))


def rasterize_edges(lat1, lon1, lat2, lon2, contrib_km, bin_deg: float) -> np.ndarray:
    """Spread each edge's contribution along its arc into a lat/lon grid.

    Every sample carries contrib/nseg, so each edge's total contribution
    lands in the grid exactly (up to float accumulation).
    """
    lat1 = np.ascontiguousarray(lat1, dtype=np.float64)
    lon1 = np.ascontiguousarray(lon1, dtype=np.float64)
    lat2 = np.ascontiguousarray(lat2, dtype=np.float64)
    lon2 = np.ascontiguousarray(lon2, dtype=np.float64)
    contrib = np.ascontiguousarray(contrib_km, dtype=np.float64)
    grid = np.zeros(grid_shape(bin_deg), dtype=np.float64)
    if USE_NUMBA:
        _rasterize_nb(lat1, lon1, lat2, lon2, contrib, float(bin_deg), grid)
    else:
        _rasterize_np(lat1, lon1, lat2, lon2, contrib, float(bin_deg), grid)
    return grid


def edge_cell_contributions(lat1, lon1, lat2, lon2, length_km, bin_deg):
    """Per-cell contributions of a single edge, aggregated and sorted."""
    nlat, nlon = grid_shape(bin_deg)
    ii, jj, vals = _edge_cells_np(
        float(lat1), float(lon1), float(lat2), float(lon2), float(length_km), float(bin_deg), nlat, nlon
    )
    flat = ii * nlon + jj
    order = np.argsort(flat, kind="stable")
    flat = flat[order]
    vals = vals[order]
    keys, starts = np.unique(flat, return_index=True)
    sums = np.add.reduceat(vals, starts)
    return [((int(k // nlon), int(k % nlon)), float(s)) for k, s in zip(keys, sums)]


# -- graph diffusion ---------------------------------------------------------


@njit(cache=True)
def _diffuse_nb(values, indptr, indices, frac, alpha, iterations):
    n = values.shape[0]
    cur = values.copy()
    nxt = np.zeros(n, np.float64)
    for _ in range(iterations):
        for i in range(n):
            nxt[i] = 0.0
        for u in range(n):
            lo = indptr[u]
            hi = indptr[u + 1]
            if hi == lo:
                nxt[u] += cur[u]
                continue
            out = alpha * cur[u]
            nxt[u] += cur[u] - out
            for k in range(lo, hi):
                nxt[indices[k]] += out * frac[k]
        tmp = cur
        cur = nxt
        nxt = tmp
    return cur.copy()


def _diffuse_np(values, indptr, indices, frac, alpha, iterations):
    n = values.shape[0]
    deg = np.diff(indptr)
    rows = np.repeat(np.arange(n), deg)
    isolated = deg == 0
    cur = values.copy()
    for _ in range(iterations):
        out = alpha * cur
        out[isolated] = 0.0
        nxt = cur - out
        np.add.at(nxt, indices, out[rows] * frac)
        cur = nxt
    return cur


def diffuse(values, indptr, indices, affinity, alpha: float, iterations: int) -> np.ndarray:
    """Iterate mass diffusion over a CSR adjacency.

    Each step a node keeps (1 - alpha) of its mass and sends the rest to
    its neighbors proportionally to affinity; nodes without neighbors
    keep everything. Total mass is conserved every iteration.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    affinity = np.ascontiguousarray(affinity, dtype=np.float64)
    n = values.shape[0]
    deg = np.diff(indptr)
    sums = np.bincount(np.repeat(np.arange(n), deg), weights=affinity, minlength=n)
    if np.any((deg > 0) & (sums <= 0.0)):
        raise ValueError("non-isolated node with zero total affinity")
    frac = affinity / np.repeat(sums, deg)
    if iterations == 0:
        return values.copy()
    if USE_NUMBA:
        return _diffuse_nb(values, indptr, indices, frac, float(alpha), int(iterations))
    return _diffuse_np(values, indptr, indices, frac, float(alpha), int(iterations))
