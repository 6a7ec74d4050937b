"""Turn extraction, maneuver-string encoding and the grid-network uniqueness study.

Turn angles are signed with z up: counter-clockwise (left) is positive.
Encoding bins (degrees)::

    t < -30          R  right
    -30 <= t < -15   S  slight right
    -15 <= t <= 15   (ignored)
    15 < t <= 30     T  slight left
    t > 30           L  left
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .trace_io import AngularSpeedSeries

ALPHABET = "LRST"

DEFAULT_ONSET = 0.1  # rad/s
DEFAULT_TAIL = 0.02  # rad/s
DEFAULT_MERGE_GAP = 2.0  # s


@dataclass(frozen=True)
class TurnEvent:
    t_start: float
    t_end: float
    angle: float  # degrees, left positive

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("turn must end after it starts")


def encode_angle(angle: float) -> str:
    if angle < -30.0:
        return "R"
    if angle < -15.0:
        return "S"
    if angle <= 15.0:
        return ""
    if angle <= 30.0:
        return "T"
    return "L"


def extract_turns(
    series: AngularSpeedSeries | np.ndarray,
    onset: float = DEFAULT_ONSET,
    merge_gap: float = DEFAULT_MERGE_GAP,
    tail: float = DEFAULT_TAIL,
    dt: float = 1.0,
) -> list[TurnEvent]:
    """Turn events from a uniformly sampled yaw-rate series.

    A turn is a maximal run with ``|omega| > onset``. Runs are widened over
    neighbouring same-sign samples above ``tail`` so the ramps of a turn are
    integrated too, and same-sign turns less than ``merge_gap`` seconds apart
    are fused. The angle is the rectangle-rule integral over the event.
    """
    if not onset > 0:
        raise ValueError("turn onset must be positive")
    if isinstance(series, AngularSpeedSeries):
        w = series.values
        t0 = series.t0
    else:
        w = np.asarray(series, dtype=float).ravel()
        t0 = 0.0
    n = w.size
    above = np.abs(w) > onset
    sign = np.sign(w)
    spans: list[list[int]] = []
    k = 0
    while k < n:
        if not above[k]:
            k += 1
            continue
        a = b = k
        # widen over the ramps; a sign change always stops the widening
        while a > 0 and sign[a - 1] == sign[k] and abs(w[a - 1]) > tail:
            a -= 1
        while b < n - 1 and sign[b + 1] == sign[k] and abs(w[b + 1]) > tail:
            b += 1
        if spans and sign[spans[-1][0]] == sign[k] and (a - spans[-1][1] - 1) * dt < merge_gap:
            spans[-1][1] = b
        else:
            spans.append([a, b])
        k = b + 1
    events = []
    for a, b in spans:
        angle = math.degrees(float(np.sum(w[a : b + 1])) * dt)
        events.append(TurnEvent(t0 + a * dt, t0 + (b + 1) * dt, angle))
    return events


def encode_turns(events: Iterable[TurnEvent]) -> str:
    return "".join(encode_angle(e.angle) for e in events)


# -- string similarity -----------------------------------------------------------


def longest_common_turns(a: str, b: str) -> int:
    """Length of the longest common contiguous substring."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    best = 0
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            if ca == cb:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def longest_common_subsequence(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            cur[j] = prev[j - 1] + 1 if ca == cb else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


# -- grid networks ----------------------------------------------------------------


@dataclass
class GridNetwork:
    """A 4-connected ``rows x cols`` lattice of intersections ``spacing`` metres apart.

    ``jitter`` displaces every intersection uniformly by up to that many
    metres on each axis, drawn once from ``seed``. Without it every shortest
    lattice path turns strictly alternately left and right; the displacement
    gives roads the small bends real street grids have.
    """

    rows: int
    cols: int
    spacing: float = 100.0
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 2:
            raise ValueError("grid needs at least two intersections")
        if not self.spacing > 0:
            raise ValueError("grid spacing must be positive")
        if self.jitter < 0 or self.jitter >= self.spacing / 2:
            raise ValueError("jitter must lie in [0, spacing / 2)")

    @cached_property
    def coords(self) -> np.ndarray:
        """``(rows, cols, 2)`` array of intersection ``(x, y)`` metres (x east, y north)."""
        r, c = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        xy = np.stack([c * self.spacing, r * self.spacing], axis=-1).astype(float)
        if self.jitter:
            rng = np.random.default_rng(self.seed)
            xy += rng.uniform(-self.jitter, self.jitter, size=xy.shape)
        return xy

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    def contains(self, node) -> bool:
        r, c = node
        return 0 <= r < self.rows and 0 <= c < self.cols

    def node_id(self, node) -> int:
        return int(node[0]) * self.cols + int(node[1])

    def xy(self, node) -> np.ndarray:
        return self.coords[node[0], node[1]]

    def neighbors(self, node) -> list[tuple[int, int]]:
        r, c = node
        out = [(r + dr, c + dc) for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))]
        return [n for n in out if self.contains(n)]

    def edge_id(self, u, v) -> int:
        a, b = sorted((self.node_id(u), self.node_id(v)))
        return a * self.n_nodes + b

    def edge_length(self, u, v) -> float:
        return float(np.linalg.norm(self.xy(u) - self.xy(v)))

    def graph(self):
        """The lattice as an undirected ``networkx`` graph with ``length`` edge weights."""
        import networkx as nx

        g = nx.grid_2d_graph(self.rows, self.cols)
        for u, v in g.edges:
            g.edges[u, v]["length"] = self.edge_length(u, v)
        return g


@dataclass
class GridRoute:
    network: GridNetwork
    nodes: list[tuple[int, int]]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a route needs at least two intersections")
        for u, v in zip(self.nodes, self.nodes[1:]):
            if abs(u[0] - v[0]) + abs(u[1] - v[1]) != 1:
                raise ValueError(f"{u} and {v} are not adjacent")

    @property
    def polyline(self) -> np.ndarray:
        return np.array([self.network.xy(n) for n in self.nodes])

    @property
    def edges(self) -> list[int]:
        return [self.network.edge_id(u, v) for u, v in zip(self.nodes, self.nodes[1:])]

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.polyline, axis=0), axis=1)))

    @property
    def turn_angles(self) -> np.ndarray:
        return polyline_turn_angles(self.polyline)

    @property
    def maneuvers(self) -> str:
        return "".join(encode_angle(a) for a in self.turn_angles)


def polyline_turn_angles(polyline: np.ndarray) -> np.ndarray:
    """Signed heading change (degrees, left positive) at every interior vertex."""
    p = np.asarray(polyline, dtype=float)
    d = np.diff(p, axis=0)
    heading = np.arctan2(d[:, 1], d[:, 0])
    delta = np.diff(heading)
    delta = (delta + np.pi) % (2 * np.pi) - np.pi
    return np.degrees(delta)


def grid_route(network: GridNetwork, src, dst, seed: int | np.random.Generator = 0) -> GridRoute:
    """A uniformly random shortest lattice path from ``src`` to ``dst``.

    At each intersection the next step goes along the row axis with
    probability ``remaining_rows / (remaining_rows + remaining_cols)``, which
    samples every monotone lattice path with equal probability.
    """
    src = tuple(int(v) for v in src)
    dst = tuple(int(v) for v in dst)
    if not (network.contains(src) and network.contains(dst)):
        raise ValueError("route endpoints must be grid intersections")
    if src == dst:
        raise ValueError("route endpoints must differ")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    r, c = src
    nodes = [src]
    while (r, c) != dst:
        dr = dst[0] - r
        dc = dst[1] - c
        if rng.random() * (abs(dr) + abs(dc)) < abs(dr):
            r += int(np.sign(dr))
        else:
            c += int(np.sign(dc))
        nodes.append((r, c))
    return GridRoute(network, nodes)


def overlap_length(a: GridRoute, b: GridRoute) -> float:
    """Total length of undirected edges shared by two routes on the same network."""
    if a.network is not b.network and a.network != b.network:
        raise ValueError("routes lie on different networks")
    shared = set(a.edges) & set(b.edges)
    if not shared:
        return 0.0
    length = 0.0
    for u, v in zip(a.nodes, a.nodes[1:]):
        e = a.network.edge_id(u, v)
        if e in shared:
            length += a.network.edge_length(u, v)
            shared.discard(e)
    return length


# -- uniqueness study -------------------------------------------------------------


@njit(cache=True)
def _lcs_substring(a, la, b, lb):
    best = 0
    prev = np.zeros(lb + 1, dtype=np.int64)
    cur = np.zeros(lb + 1, dtype=np.int64)
    for i in range(la):
        cur[0] = 0
        for j in range(lb):
            if a[i] == b[j]:
                cur[j + 1] = prev[j] + 1
                if cur[j + 1] > best:
                    best = cur[j + 1]
            else:
                cur[j + 1] = 0
        prev, cur = cur, prev
    return best


@njit(cache=True)
def _lcs_subsequence(a, la, b, lb):
    prev = np.zeros(lb + 1, dtype=np.int64)
    cur = np.zeros(lb + 1, dtype=np.int64)
    for i in range(la):
        cur[0] = 0
        for j in range(lb):
            if a[i] == b[j]:
                cur[j + 1] = prev[j] + 1
            else:
                cur[j + 1] = max(prev[j + 1], cur[j])
        prev, cur = cur, prev
    return prev[lb]


@njit(cache=True)
def _all_pairs(codes, lengths, edges, edge_len, n_edges, subsequence):
    n = codes.shape[0]
    n_pairs = n * (n - 1) // 2
    overlap = np.zeros(n_pairs)
    lcs = np.zeros(n_pairs, dtype=np.int64)
    k = 0
    for p in range(n):
        for q in range(p + 1, n):
            # edges rows are sorted; merge-intersect
            i = 0
            j = 0
            acc = 0.0
            while i < n_edges[p] and j < n_edges[q]:
                if edges[p, i] == edges[q, j]:
                    acc += edge_len[p, i]
                    i += 1
                    j += 1
                elif edges[p, i] < edges[q, j]:
                    i += 1
                else:
                    j += 1
            overlap[k] = acc
            if subsequence:
                lcs[k] = _lcs_subsequence(codes[p], lengths[p], codes[q], lengths[q])
            else:
                lcs[k] = _lcs_substring(codes[p], lengths[p], codes[q], lengths[q])
            k += 1
    return overlap, lcs


@dataclass
class UniquenessStudy:
    routes: list[GridRoute]
    overlap: np.ndarray  # per pair, metres
    lcs: np.ndarray  # per pair, turns
    bin_edges: np.ndarray
    bin_mean_lcs: np.ndarray
    bin_counts: np.ndarray
    subsequence: bool = False
    strings: list[str] = field(default_factory=list)

    @property
    def turns_per_trip(self) -> np.ndarray:
        return np.array([len(s) for s in self.strings])

    @property
    def zero_overlap_mean_lcs(self) -> float:
        return float(self.bin_mean_lcs[0])

    def table(self) -> list[tuple[float, float, float, int]]:
        """``(bin_low_m, bin_high_m, mean_lcs, pairs)`` rows."""
        return [
            (float(lo), float(hi), float(m), int(c))
            for lo, hi, m, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.bin_mean_lcs, self.bin_counts)
        ]

    def write_pairs_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["overlap_m", "lcs_turns"])
            for o, l in zip(self.overlap, self.lcs):
                w.writerow([repr(float(o)), int(l)])

    def write_bins_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["overlap_low_m", "overlap_high_m", "mean_lcs_turns", "pairs"])
            for row in self.table():
                w.writerow([repr(row[0]), repr(row[1]), repr(row[2]), row[3]])

    def write_trips_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trip_id", "turns", "string"])
            for k, s in enumerate(self.strings):
                w.writerow([k, len(s), s])


def _bin_pairs(overlap, lcs, bin_width, min_pairs):
    top = float(overlap.max()) if overlap.size else 0.0
    n_bins = max(1, int(math.floor(top / bin_width)) + 1)
    edges = [k * bin_width for k in range(n_bins + 1)]
    idx = np.minimum((overlap // bin_width).astype(np.int64), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=lcs.astype(float), minlength=n_bins)
    # fold sparse bins into their lower neighbour, from the top down
    k = n_bins - 1
    while k > 0:
        if counts[k] < min_pairs:
            counts[k - 1] += counts[k]
            sums[k - 1] += sums[k]
            counts = np.delete(counts, k)
            sums = np.delete(sums, k)
            del edges[k]
        k -= 1
    edges[-1] = max(edges[-1], top + 1e-9)
    keep = counts > 0
    means = np.where(keep, sums / np.maximum(counts, 1), np.nan)
    return np.array(edges), means, counts


def random_trips(network: GridNetwork, trips: int, seed: int = 0) -> list[GridRoute]:
    rng = np.random.default_rng(seed)
    routes = []
    while len(routes) < trips:
        a = (int(rng.integers(network.rows)), int(rng.integers(network.cols)))
        b = (int(rng.integers(network.rows)), int(rng.integers(network.cols)))
        if a == b:
            continue
        routes.append(grid_route(network, a, b, rng))
    return routes


def uniqueness_study(
    network: GridNetwork,
    trips: int,
    seed: int = 0,
    bin_width: float | None = None,
    min_pairs: int = 200,
    subsequence: bool = False,
    routes: Sequence[GridRoute] | None = None,
) -> UniquenessStudy:
    """Pairwise spatial overlap vs longest common turn sequence for random trips.

    Trips join uniformly drawn intersection pairs by :func:`grid_route`.
    Overlaps are binned in ``bin_width`` metres (default: two block lengths);
    bins with fewer than ``min_pairs`` pairs are folded into the bin below so
    every reported mean rests on enough pairs.
    """
    if routes is None:
        if trips < 2:
            raise ValueError("the study needs at least two trips")
        routes = random_trips(network, trips, seed)
    routes = list(routes)
    strings = [r.maneuvers for r in routes]
    width = 2.0 * network.spacing if bin_width is None else float(bin_width)
    max_len = max(1, max(len(s) for s in strings))
    codes = np.zeros((len(routes), max_len), dtype=np.int8)
    for k, s in enumerate(strings):
        codes[k, : len(s)] = [ALPHABET.index(ch) + 1 for ch in s]
    lengths = np.array([len(s) for s in strings], dtype=np.int64)
    max_edges = max(len(r.nodes) - 1 for r in routes)
    edges = np.full((len(routes), max_edges), np.iinfo(np.int64).max, dtype=np.int64)
    edge_len = np.zeros((len(routes), max_edges))
    n_edges = np.zeros(len(routes), dtype=np.int64)
    for k, r in enumerate(routes):
        ids = {}
        for u, v in zip(r.nodes, r.nodes[1:]):
            ids[network.edge_id(u, v)] = network.edge_length(u, v)
        order = sorted(ids)
        edges[k, : len(order)] = order
        edge_len[k, : len(order)] = [ids[e] for e in order]
        n_edges[k] = len(order)
    overlap, lcs = _all_pairs(codes, lengths, edges, edge_len, n_edges, subsequence)
    bin_edges, means, counts = _bin_pairs(overlap, lcs, width, min_pairs)
    return UniquenessStudy(routes, overlap, lcs, bin_edges, means, counts, subsequence, strings)
