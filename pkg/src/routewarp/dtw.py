"""Dynamic time warping: full, open-ended and open-beginning open-ended.

All variants use the symmetric unit-weight step pattern

    W(i, j) = d(i, j) + min(W(i, j-1), W(i-1, j), W(i-1, j-1))

with ``W(0, 0) = 0`` and infinite borders, no windowing constraint, and the
normalisation ``distance = raw_cost / (n + m)`` where ``m`` is the length of
the matched part of ``Y``.

Index ranges in :class:`WarpResult` are 0-based and inclusive.

Masked samples (phone-interaction gaps) cost 0 against anything.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .trace_io import AngularSpeedSeries, GpsPoint, trajectory_array

EARTH_RADIUS_M = 6_371_000.0

ABSOLUTE = "absolute"
GREAT_CIRCLE = "great-circle"
COSTS = (ABSOLUTE, GREAT_CIRCLE)

_MAX_REFINEMENTS = 200


@dataclass
class WarpResult:
    distance: float
    raw_cost: float
    matched_x: tuple[int, int]
    matched_y: tuple[int, int]
    path: np.ndarray | None = None  # (T, 2) int array of (i, j), 0-based

    @property
    def matched_length(self) -> int:
        return self.matched_y[1] - self.matched_y[0] + 1


# -- pointwise costs ----------------------------------------------------------------


def great_circle(p1, p2) -> float:
    """Haversine distance in metres between two points on a 6 371 km sphere.

    Points are :class:`GpsPoint` or ``(lat, lon)`` pairs in degrees.
    """
    lat1, lon1 = _latlon(p1)
    lat2, lon2 = _latlon(p2)
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlmb = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _latlon(p) -> tuple[float, float]:
    if isinstance(p, GpsPoint):
        return p.lat, p.lon
    lat, lon = p
    return float(lat), float(lon)


def haversine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise great-circle distances between ``(N, 2)`` and ``(M, 2)`` lat/lon arrays."""
    a = np.radians(np.asarray(a, dtype=float))
    b = np.radians(np.asarray(b, dtype=float))
    dphi = b[None, :, 0] - a[:, None, 0]
    dlmb = b[None, :, 1] - a[:, None, 1]
    h = np.sin(dphi / 2) ** 2 + np.cos(a[:, None, 0]) * np.cos(b[None, :, 0]) * np.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def _as_series(s) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(s, AngularSpeedSeries):
        return s.values, s.mask
    v = np.asarray(s, dtype=float).ravel()
    return v, np.zeros(v.size, dtype=bool)


def _as_points(traj) -> np.ndarray:
    if len(traj) and isinstance(traj[0], GpsPoint):
        return trajectory_array(traj)
    return np.asarray(traj, dtype=float).reshape(-1, 2)


def cost_matrix(X, Y, cost: str = ABSOLUTE) -> np.ndarray:
    """Pointwise cost matrix ``d(i, j)`` of shape ``(n, m)``."""
    if cost == ABSOLUTE:
        x, xm = _as_series(X)
        y, ym = _as_series(Y)
        if x.size == 0 or y.size == 0:
            raise ValueError("DTW needs non-empty series")
        c = np.abs(x[:, None] - y[None, :])
        if xm.any():
            c[xm, :] = 0.0
        if ym.any():
            c[:, ym] = 0.0
        return c
    if cost == GREAT_CIRCLE:
        a = _as_points(X)
        b = _as_points(Y)
        if a.shape[0] == 0 or b.shape[0] == 0:
            raise ValueError("DTW needs non-empty trajectories")
        return haversine_matrix(a, b)
    raise ValueError(f"unknown cost {cost!r}; expected one of {COSTS}")


# -- kernels --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _last_row(c):
    """``W(n, j)`` for j = 1..m, computed with two rolling rows."""
    n, m = c.shape
    inf = np.inf
    prev = np.full(m + 1, inf)
    prev[0] = 0.0
    cur = np.empty(m + 1)
    for i in range(n):
        cur[0] = inf
        for j in range(1, m + 1):
            best = cur[j - 1]
            if prev[j] < best:
                best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = c[i, j - 1] + best
        prev, cur = cur, prev
    return prev[1:].copy()


@njit(cache=True, nogil=True)
def _accumulate(c):
    n, m = c.shape
    w = np.full((n + 1, m + 1), np.inf)
    w[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = w[i, j - 1]
            if w[i - 1, j] < best:
                best = w[i - 1, j]
            if w[i - 1, j - 1] < best:
                best = w[i - 1, j - 1]
            w[i, j] = c[i - 1, j - 1] + best
    return w


@njit(cache=True, nogil=True)
def _backtrack(w):
    i, j = w.shape[0] - 1, w.shape[1] - 1
    out = np.empty((i + j, 2), dtype=np.int64)
    k = 0
    while True:
        out[k, 0] = i - 1
        out[k, 1] = j - 1
        k += 1
        if i == 1 and j == 1:
            break
        diag = w[i - 1, j - 1]
        up = w[i - 1, j]
        left = w[i, j - 1]
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
    return out[:k][::-1].copy()


@njit(cache=True, nogil=True)
def _open_both_shifted(c, lam):
    """Free-start, free-end DP minimising ``raw - lam * (matched Y length)``.

    Every step that advances along Y pays ``-lam`` and so does the start cell,
    so the shifted cost of a path from (0, i) to (n-1, j) is its raw cost minus
    ``lam * (j - i + 1)``. Per cell the start index and raw cost of the chosen
    path are tracked. Ties prefer the earlier start (longer match); at the end
    the largest ``j`` wins ties.

    Returns ``(i, j, raw)`` with 0-based inclusive Y indices.
    """
    n, m = c.shape
    g_prev = np.empty(m)
    r_prev = np.empty(m)
    s_prev = np.empty(m, dtype=np.int64)
    g_cur = np.empty(m)
    r_cur = np.empty(m)
    s_cur = np.empty(m, dtype=np.int64)
    # first query sample: start fresh at j or continue horizontally
    for j in range(m):
        g = -lam
        r = 0.0
        s = j
        if j > 0:
            gc = g_cur[j - 1] - lam
            if gc <= g:
                g = gc
                r = r_cur[j - 1]
                s = s_cur[j - 1]
        g_cur[j] = c[0, j] + g
        r_cur[j] = c[0, j] + r
        s_cur[j] = s
    for i in range(1, n):
        g_prev, g_cur = g_cur, g_prev
        r_prev, r_cur = r_cur, r_prev
        s_prev, s_cur = s_cur, s_prev
        for j in range(m):
            g = g_prev[j]
            r = r_prev[j]
            s = s_prev[j]
            if j > 0:
                gd = g_prev[j - 1] - lam
                if gd < g or (gd == g and s_prev[j - 1] < s):
                    g = gd
                    r = r_prev[j - 1]
                    s = s_prev[j - 1]
                gl = g_cur[j - 1] - lam
                if gl < g or (gl == g and s_cur[j - 1] < s):
                    g = gl
                    r = r_cur[j - 1]
                    s = s_cur[j - 1]
            g_cur[j] = c[i, j] + g
            r_cur[j] = c[i, j] + r
            s_cur[j] = s
    # scanning downward with a strict comparison keeps the largest j on ties
    best_j = m - 1
    for j in range(m - 2, -1, -1):
        if g_cur[j] < g_cur[best_j]:
            best_j = j
    return s_cur[best_j], best_j, r_cur[best_j]


# -- public API --------------------------------------------------------------------


def _finish(c: np.ndarray, j0: int, j1: int, with_path: bool) -> WarpResult:
    sub = c[:, j0 : j1 + 1]
    n = sub.shape[0]
    if with_path:
        w = _accumulate(sub)
        raw = float(w[-1, -1])
        path = _backtrack(w)
        path[:, 1] += j0
    else:
        raw = float(_last_row(sub)[-1])
        path = None
    return WarpResult(raw / (n + sub.shape[1]), raw, (0, n - 1), (j0, j1), path)


def dtw_full_from_cost(c: np.ndarray, path: bool = False) -> WarpResult:
    c = np.ascontiguousarray(c, dtype=float)
    if c.ndim != 2 or 0 in c.shape:
        raise ValueError("cost matrix must be a non-empty 2-D array")
    return _finish(c, 0, c.shape[1] - 1, path)


def dtw_open_ended_from_cost(c: np.ndarray, path: bool = False) -> WarpResult:
    c = np.ascontiguousarray(c, dtype=float)
    if c.ndim != 2 or 0 in c.shape:
        raise ValueError("cost matrix must be a non-empty 2-D array")
    n, m = c.shape
    row = _last_row(c)
    norm = row / (n + np.arange(1, m + 1))
    best = norm.min()
    j = int(np.flatnonzero(norm == best)[-1])
    if path:
        return _finish(c, 0, j, True)
    return WarpResult(float(norm[j]), float(row[j]), (0, n - 1), (0, j), None)


def dtw_open_both_from_cost(c: np.ndarray, path: bool = False) -> WarpResult:
    """Minimum normalised DTW distance of the query against every sub-range of ``Y``.

    The first pass (shift 0) is the classic subsequence DTW with start-index
    tracking and minimises the raw cost. Because lengths differ between
    candidate sub-ranges, the raw optimum need not be the normalised optimum,
    so the shift is then set to the best ratio found and the pass repeated
    until the ratio stops decreasing (Dinkelbach iteration). Each pass is one
    O(n m) sweep; a handful suffices in practice.
    """
    c = np.ascontiguousarray(c, dtype=float)
    if c.ndim != 2 or 0 in c.shape:
        raise ValueError("cost matrix must be a non-empty 2-D array")
    n = c.shape[0]
    lam = 0.0
    best = None
    for _ in range(_MAX_REFINEMENTS):
        i, j, raw = _open_both_shifted(c, lam)
        ratio = raw / (n + j - i + 1)
        if best is not None and not ratio < best[0]:
            break
        best = (ratio, int(i), int(j))
        lam = ratio
    _, i, j = best
    return _finish(c, i, j, path)


def dtw_full(X, Y, cost: str = ABSOLUTE, path: bool = False) -> WarpResult:
    """Full DTW: both end points of ``X`` and ``Y`` are matched."""
    return dtw_full_from_cost(cost_matrix(X, Y, cost), path)


def dtw_open_ended(X, Y, cost: str = ABSOLUTE, path: bool = False) -> WarpResult:
    """Match all of ``X`` against the prefix of ``Y`` with smallest normalised distance."""
    return dtw_open_ended_from_cost(cost_matrix(X, Y, cost), path)


def dtw_open_both(X, Y, cost: str = ABSOLUTE, path: bool = False) -> WarpResult:
    """Match all of ``X`` against the sub-range of ``Y`` with smallest normalised distance."""
    return dtw_open_both_from_cost(cost_matrix(X, Y, cost), path)


MODES = {"full": dtw_full, "open": dtw_open_ended, "open-both": dtw_open_both}


def dtw(X, Y, mode: str = "full", cost: str = ABSOLUTE, path: bool = False) -> WarpResult:
    try:
        fn = MODES[mode]
    except KeyError:
        raise ValueError(f"unknown DTW mode {mode!r}; expected one of {sorted(MODES)}") from None
    return fn(X, Y, cost, path)


def dtw_gps(T1: Sequence[GpsPoint], T2: Sequence[GpsPoint], path: bool = False) -> WarpResult:
    """Full DTW between GPS trajectories with great-circle cost (metres per step)."""
    if len(T1) < 2 or len(T2) < 2:
        raise ValueError("GPS trajectories need at least 2 points")
    return dtw_full(T1, T2, GREAT_CIRCLE, path)
