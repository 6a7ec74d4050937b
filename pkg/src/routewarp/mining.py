"""Route mining: dissimilarity matrix, cluster count, k-medoids, route model.

Journeys are compared pairwise by normalized full DTW. The number of
distinct routes is chosen by BIC over diagonal Gaussian mixtures fitted to a
classical-MDS embedding of the distance matrix. PAM then partitions the
journeys, and clusters with more than ``tau`` members count as significant
routes. Partitions are dense 1-based integer labels.
"""
from __future__ import annotations

import json
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dtw import dtw_full, dtw_gps, great_circle
from .trace_io import AngularSpeedSeries, GpsPoint

log = logging.getLogger(__name__)

DEFAULT_TAU = 3
# classical_mds default when called directly; BIC picks its own dimension
DEFAULT_EMBED_DIM = 8
# variance floor of the mixture components, on an embedding scaled to [-1, 1]
VARIANCE_FLOOR = 1e-3
DEFAULT_RESTARTS = 5
MATCH_FACTOR = 1.25
CITY_SPLIT_M = 50_000.0
FORMAT_VERSION = 1
THREADS_ENV = "ROUTEWARP_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else ``ROUTEWARP_THREADS``, else available cores."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            threads = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


@dataclass
class DissimilarityMatrix:
    d: np.ndarray
    ids: list[str]

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        n = self.d.shape[0]
        if self.d.shape != (n, n):
            raise ValueError("dissimilarity matrix must be square")
        if len(self.ids) != n:
            raise ValueError("need one id per row")
        if not np.all(np.isfinite(self.d)) or np.any(self.d < 0):
            raise ValueError("dissimilarities must be finite and non-negative")
        if not np.array_equal(self.d, self.d.T) or np.any(np.diag(self.d) != 0):
            raise ValueError("dissimilarity matrix must be symmetric with zero diagonal")

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def subset(self, idx: Sequence[int]) -> "DissimilarityMatrix":
        idx = list(idx)
        return DissimilarityMatrix(self.d[np.ix_(idx, idx)], [self.ids[i] for i in idx])

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("id," + ",".join(self.ids) + "\n")
            for tid, row in zip(self.ids, self.d):
                fh.write(tid + "," + ",".join(f"{x:.9g}" for x in row) + "\n")


def pairwise_matrix(items: Sequence, distance: Callable, ids: Sequence[str] | None = None, threads: int | None = None) -> DissimilarityMatrix:
    """Symmetric matrix of ``distance(a, b)``, each unordered pair evaluated once."""
    n = len(items)
    if n < 2:
        raise ValueError("need at least two journeys")
    ids = [str(i) for i in range(n)] if ids is None else [str(i) for i in ids]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    work = resolve_threads(threads)
    if work == 1:
        vals = [distance(items[i], items[j]) for i, j in pairs]
    else:
        with ThreadPoolExecutor(max_workers=work) as pool:
            vals = list(pool.map(lambda p: distance(items[p[0]], items[p[1]]), pairs))
    d = np.zeros((n, n))
    for (i, j), v in zip(pairs, vals):
        d[i, j] = d[j, i] = v
    return DissimilarityMatrix(d, ids)


def _series_distance(a: AngularSpeedSeries, b: AngularSpeedSeries) -> float:
    return dtw_full(a, b).distance


def dissimilarity_matrix(journeys: Sequence[AngularSpeedSeries], ids: Sequence[str] | None = None, threads: int | None = None) -> DissimilarityMatrix:
    """Normalized full-DTW distances between every pair of journeys."""
    for k, s in enumerate(journeys):
        if len(s) == 0:
            raise ValueError(f"journey {k} has an empty series")
    if ids is None:
        ids = [s.origin_trace_id or str(k) for k, s in enumerate(journeys)]
    return pairwise_matrix(list(journeys), _series_distance, ids, threads)


def gps_dissimilarity_matrix(trajectories: Sequence[Sequence[GpsPoint]], ids: Sequence[str] | None = None, threads: int | None = None) -> DissimilarityMatrix:
    """Normalized great-circle DTW distances (metres) between GPS trajectories."""
    for k, tr in enumerate(trajectories):
        if len(tr) == 0:
            raise ValueError(f"trajectory {k} is empty")
    return pairwise_matrix(list(trajectories), lambda a, b: dtw_gps(a, b).distance, ids, threads)


# -- cluster count ------------------------------------------------------------------


def classical_mds(d: np.ndarray, p: int = DEFAULT_EMBED_DIM) -> np.ndarray:
    """Torgerson scaling: top-``p`` eigenvectors of the double-centred squared distances.

    Dimensions with non-positive eigenvalues are returned as zeros.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d**2) @ j
    vals, vecs = np.linalg.eigh((b + b.T) / 2)
    order = np.argsort(vals)[::-1][:p]
    vals = np.clip(vals[order], 0.0, None)
    x = vecs[:, order] * np.sqrt(vals)
    # fix the eigenvector sign so embeddings are reproducible
    signs = np.sign(x[np.argmax(np.abs(x), axis=0), np.arange(x.shape[1])])
    signs[signs == 0] = 1.0
    return x * signs


def embedding_dimension(d: np.ndarray, k_max: int) -> int:
    """Dimension at the largest ratio between consecutive positive MDS eigenvalues.

    k separated routes leave k - 1 dominant eigenvalues above a noise floor,
    so the biggest drop marks the between-route subspace. Only the first
    ``k_max + 1`` eigenvalues are searched.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d**2) @ j
    vals = np.sort(np.linalg.eigvalsh((b + b.T) / 2))[::-1]
    if vals[0] <= 0:
        return 1
    pos = vals[vals > 1e-12 * vals[0]][: k_max + 1]
    if pos.size < 2:
        return 1
    return max(1, int(np.argmax(pos[:-1] / pos[1:])) + 1)


@dataclass
class BicCurve:
    ks: list[int]
    bic: list[float]
    embedding: np.ndarray

    @property
    def best(self) -> int:
        return self.ks[int(np.argmax(self.bic))]


def bic_curve(D: DissimilarityMatrix, k_max: int, p: int | None = None, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> BicCurve:
    """BIC = 2 lnL - params ln n of diagonal Gaussian mixtures for ``k = 1..k_max``.

    ``p=None`` picks the embedding dimension with :func:`embedding_dimension`.
    """
    from sklearn.exceptions import ConvergenceWarning
    from sklearn.mixture import GaussianMixture

    n = D.n
    if k_max < 1 or k_max >= n:
        raise ValueError(f"k_max must lie in [1, {n - 1}]")
    if p is None:
        p = embedding_dimension(D.d, k_max)
        log.debug("embedding dimension %d", p)
    x = classical_mds(D.d, min(p, n - 1))
    scale = float(np.abs(x).max())
    if scale == 0.0:
        return BicCurve([1], [0.0], x)
    x = x / scale
    ks, bics = [], []
    for k in range(1, k_max + 1):
        gm = GaussianMixture(k, covariance_type="diag", n_init=restarts, random_state=seed, reg_covar=VARIANCE_FLOOR)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            gm.fit(x)
        ks.append(k)
        bics.append(-float(gm.bic(x)))
    return BicCurve(ks, bics, x)


def estimate_k(D: DissimilarityMatrix, k_max: int | None = None, p: int | None = None, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> int:
    """Cluster count maximizing BIC; 1 when the embedding collapses to a point."""
    if k_max is None:
        k_max = min(12, D.n - 1)
    curve = bic_curve(D, k_max, p, restarts, seed)
    log.info("BIC by k: %s", ", ".join(f"{k}:{b:.1f}" for k, b in zip(curve.ks, curve.bic)))
    return curve.best


# -- k-medoids --------------------------------------------------------------------------


def _cost(d: np.ndarray, medoids: np.ndarray) -> float:
    return float(d[:, medoids].min(axis=1).sum())


def _build(d: np.ndarray, k: int) -> list[int]:
    medoids = [int(np.argmin(d.sum(axis=1)))]
    nearest = d[:, medoids[0]].copy()
    for _ in range(1, k):
        gain = np.maximum(nearest[:, None] - d, 0.0).sum(axis=0)
        gain[medoids] = -1.0
        m = int(np.argmax(gain))
        medoids.append(m)
        nearest = np.minimum(nearest, d[:, m])
    return medoids


def _swap(d: np.ndarray, medoids: list[int]) -> tuple[list[int], float, list[float]]:
    """Best-improvement swaps until none lowers the total cost."""
    n = d.shape[0]
    medoids = list(medoids)
    cost = _cost(d, np.array(medoids))
    history = [cost]
    while True:
        best = (cost, None, None)
        for a in range(len(medoids)):
            others = np.array(medoids[:a] + medoids[a + 1 :], dtype=int)
            base = d[:, others].min(axis=1) if others.size else np.full(n, np.inf)
            cand = np.minimum(base[:, None], d).sum(axis=0)
            cand[medoids] = np.inf
            h = int(np.argmin(cand))
            if cand[h] < best[0] - 1e-12:
                best = (float(cand[h]), a, h)
        if best[1] is None:
            return medoids, cost, history
        medoids[best[1]] = best[2]
        cost = best[0]
        history.append(cost)


@dataclass
class Partition:
    labels: np.ndarray  # dense, 1-based

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.ndim != 1:
            raise ValueError("partition labels must be one-dimensional")
        if self.labels.size:
            present = np.unique(self.labels)
            if present[0] != 1 or present[-1] != present.size:
                raise ValueError("partition labels must be dense in 1..k")

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Partition":
        """Relabel arbitrary hashable labels to 1..k in order of first appearance."""
        mapping: dict = {}
        out = [mapping.setdefault(x, len(mapping) + 1) for x in labels]
        return cls(np.array(out, dtype=int))

    @property
    def k(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0

    @property
    def sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def __len__(self) -> int:
        return self.labels.size


@dataclass
class Clustering:
    partition: Partition
    medoids: list[int]  # medoids[c - 1] is the journey index of cluster c's medoid
    cost: float
    history: list[float] = field(default_factory=list)


def k_medoids(D: DissimilarityMatrix | np.ndarray, k: int, seed: int = 0, restarts: int = DEFAULT_RESTARTS) -> Clustering:
    """PAM: BUILD then SWAP, plus seeded random restarts; the lowest cost wins.

    Clusters are numbered by the smallest journey index they contain.
    """
    d = D.d if isinstance(D, DissimilarityMatrix) else np.asarray(D, dtype=float)
    n = d.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    starts = [_build(d, k)] + [rng.choice(n, size=k, replace=False).tolist() for _ in range(max(0, restarts - 1))]
    best = None
    for s in starts:
        med, cost, hist = _swap(d, s)
        if best is None or cost < best[1] - 1e-12:
            best = (med, cost, hist)
    med, cost, hist = best
    assign = np.argmin(d[:, med], axis=1)
    # medoids always belong to themselves, even with zero-distance ties
    for c, m in enumerate(med):
        assign[m] = c
    order = sorted(range(k), key=lambda c: int(np.flatnonzero(assign == c).min()))
    relabel = {c: r + 1 for r, c in enumerate(order)}
    labels = np.array([relabel[int(c)] for c in assign])
    medoids = [med[c] for c in order]
    return Clustering(Partition(labels), medoids, cost, hist)


def significant_routes(partition: Partition, tau: int = DEFAULT_TAU) -> list[int]:
    """Cluster ids with more than ``tau`` members, largest first."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    sizes = partition.sizes
    return sorted((c for c, s in sizes.items() if s > tau), key=lambda c: (-sizes[c], c))


# -- partition comparison ------------------------------------------------------------


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else np.asarray(p)


def contingency(a, b) -> np.ndarray:
    a = _labels(a)
    b = _labels(b)
    if a.shape != b.shape:
        raise ValueError("partitions cover different journey sets")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1) / 2


def corrected_rand(a, b) -> float:
    """Hubert-Arabie adjusted Rand index."""
    t = contingency(a, b)
    n = t.sum()
    index = _comb2(t).sum()
    sa = _comb2(t.sum(axis=1)).sum()
    sb = _comb2(t.sum(axis=0)).sum()
    expected = sa * sb / _comb2(n) if n > 1 else 0.0
    top = 0.5 * (sa + sb)
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))


def variation_of_information(a, b) -> float:
    """``H(a) + H(b) - 2 I(a; b)`` in nats."""
    t = contingency(a, b).astype(float)
    n = t.sum()
    if n == 0:
        return 0.0
    p = t / n
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    nz = p > 0
    h_a = -np.sum(pa * np.log(pa))
    h_b = -np.sum(pb * np.log(pb))
    mi = np.sum(p[nz] * np.log(p[nz] / np.outer(pa, pb)[nz]))
    return float(max(h_a + h_b - 2 * mi, 0.0))


# -- route model -------------------------------------------------------------------


@dataclass
class RouteCluster:
    """One mined route.

    ``match_threshold`` bounds whole-journey distances to the medoid.
    ``prefix_thresholds[i]`` does the same for open-begin/open-end matches of
    journey prefixes of ``prefix_lengths[i]`` seconds, the comparison a
    streaming recognizer makes.
    """

    cluster: int
    medoid_id: str
    match_threshold: float
    size: int
    series: AngularSpeedSeries
    prefix_lengths: list[int] = field(default_factory=list)
    prefix_thresholds: list[float] = field(default_factory=list)

    def threshold_at(self, elapsed: int) -> float:
        """Threshold for a buffer of ``elapsed`` seconds: the first calibrated length that covers it."""
        for length, thr in zip(self.prefix_lengths, self.prefix_thresholds):
            if elapsed <= length:
                return thr
        return self.match_threshold


@dataclass
class RouteModel:
    tau: int
    clusters: list[RouteCluster]
    assignment: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be at least 1")

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def medoid_ids(self) -> list[str]:
        return [c.medoid_id for c in self.clusters]

    @property
    def medoid_series(self) -> list[AngularSpeedSeries]:
        return [c.series for c in self.clusters]

    @property
    def significant(self) -> list[int]:
        return [c.cluster for c in sorted(self.clusters, key=lambda c: (-c.size, c.cluster)) if c.size > self.tau]

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "k": self.k,
            "tau": self.tau,
            "clusters": [
                {
                    "cluster": c.cluster,
                    "medoid_id": c.medoid_id,
                    "match_threshold": c.match_threshold,
                    "size": c.size,
                    "t0": c.series.t0,
                    "prefix_lengths": c.prefix_lengths,
                    "prefix_thresholds": c.prefix_thresholds,
                    "series": c.series.values.tolist(),
                    "mask": np.flatnonzero(c.series.mask).tolist(),
                }
                for c in self.clusters
            ],
            "assignment": self.assignment,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RouteModel":
        version = doc.get("format_version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported route model format_version {version!r}")
        clusters = []
        for c in doc["clusters"]:
            values = np.asarray(c["series"], dtype=float)
            mask = np.zeros(values.size, dtype=bool)
            mask[np.asarray(c.get("mask", []), dtype=int)] = True
            series = AngularSpeedSeries(values, c["medoid_id"], mask, float(c.get("t0", 0.0)))
            clusters.append(
                RouteCluster(
                    int(c["cluster"]),
                    c["medoid_id"],
                    float(c["match_threshold"]),
                    int(c["size"]),
                    series,
                    [int(x) for x in c.get("prefix_lengths", [])],
                    [float(x) for x in c.get("prefix_thresholds", [])],
                )
            )
        model = cls(int(doc["tau"]), clusters, {str(k): int(v) for k, v in doc.get("assignment", {}).items()})
        if "k" in doc and int(doc["k"]) != model.k:
            raise ValueError("route model k does not match its cluster list")
        return model

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RouteModel":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: not a route model ({exc})") from None
        return cls.from_dict(doc)


def match_thresholds(D: DissimilarityMatrix, clustering: Clustering, factor: float = MATCH_FACTOR) -> list[float]:
    """``factor`` x the largest member-to-medoid distance of each cluster.

    A singleton cluster has no spread of its own and borrows the median
    threshold of the other clusters (zero if every cluster is a singleton).
    """
    labels = clustering.partition.labels
    raw = []
    for c, m in enumerate(clustering.medoids, start=1):
        members = np.flatnonzero(labels == c)
        raw.append(factor * float(D.d[members, m].max()) if members.size > 1 else None)
    spread = [x for x in raw if x is not None]
    fallback = float(np.median(spread)) if spread else 0.0
    return [fallback if x is None else x for x in raw]


def prefix_thresholds(
    journeys: Sequence[AngularSpeedSeries],
    clustering: Clustering,
    lengths: Sequence[int],
    factor: float = MATCH_FACTOR,
    threads: int | None = None,
) -> list[list[float]]:
    """Match thresholds for journey prefixes, per cluster and prefix length.

    For cluster ``c`` and length ``L`` the threshold is the smaller of

    * ``factor`` x the largest open-begin/open-end distance from a member's
      ``L``-second prefix to the medoid (singletons borrow the median), and
    * the smallest distance from any ``L``-second window of a journey of
      another cluster (windows start every ``L`` seconds), divided by ``factor``.

    The second bound keeps short, ambiguous buffers from matching: a distance
    that a known journey of a different route comes close to is no evidence.
    """
    from .dtw import dtw_open_both

    labels = clustering.partition.labels
    medoids = clustering.medoids
    jobs = []
    for li, length in enumerate(lengths):
        for i, series in enumerate(journeys):
            own = labels[i] - 1
            if i != medoids[own]:
                jobs.append((li, i, 0, own))
            # any stretch of another route is a plausible stand-in for an unknown journey
            starts = range(0, max(1, len(series) - int(length) + 1), int(length))
            for c in range(len(medoids)):
                if c != own:
                    jobs.extend((li, i, o, c) for o in starts)

    def run(job):
        li, i, o, c = job
        s = journeys[i]
        end = o + int(lengths[li])
        window = AngularSpeedSeries(s.values[o:end], s.origin_trace_id, s.mask[o:end])
        return dtw_open_both(window, journeys[medoids[c]]).distance

    work = resolve_threads(threads)
    if work == 1:
        vals = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=work) as pool:
            vals = list(pool.map(run, jobs))
    k = len(medoids)
    intra = np.full((k, len(lengths)), -np.inf)
    cross = np.full((k, len(lengths)), np.inf)
    for (li, i, _, c), v in zip(jobs, vals):
        if labels[i] == c + 1:
            intra[c, li] = max(intra[c, li], v)
        else:
            cross[c, li] = min(cross[c, li], v)
    intra *= factor
    for li in range(len(lengths)):
        col = intra[:, li]
        have = np.isfinite(col)
        col[~have] = float(np.median(col[have])) if have.any() else 0.0
    return np.minimum(intra, cross / factor).tolist()


PREFIX_LENGTHS = [240, 480, 720, 960, 1200]


def build_route_model(
    D: DissimilarityMatrix,
    journeys: Sequence[AngularSpeedSeries],
    clustering: Clustering,
    tau: int = DEFAULT_TAU,
    factor: float = MATCH_FACTOR,
    lengths: Sequence[int] = PREFIX_LENGTHS,
    threads: int | None = None,
) -> RouteModel:
    thresholds = match_thresholds(D, clustering, factor)
    per_prefix = prefix_thresholds(journeys, clustering, lengths, factor, threads) if lengths else [[] for _ in thresholds]
    sizes = clustering.partition.sizes
    clusters = [
        RouteCluster(c, D.ids[m], thr, sizes[c], journeys[m], list(lengths), pre)
        for c, (m, thr, pre) in enumerate(zip(clustering.medoids, thresholds, per_prefix), start=1)
    ]
    assignment = {tid: int(lab) for tid, lab in zip(D.ids, clustering.partition.labels)}
    return RouteModel(tau, clusters, assignment)


def mine_routes(
    journeys: Sequence[AngularSpeedSeries],
    k: int | None = None,
    tau: int = DEFAULT_TAU,
    seed: int = 0,
    ids: Sequence[str] | None = None,
    k_max: int | None = None,
    p: int | None = None,
    threads: int | None = None,
) -> tuple[RouteModel, DissimilarityMatrix, Clustering]:
    """Full mining pipeline; ``k=None`` estimates the cluster count by BIC."""
    D = dissimilarity_matrix(journeys, ids, threads)
    if k is None:
        k = estimate_k(D, k_max, p, seed=seed)
        log.info("estimated k = %d", k)
    clustering = k_medoids(D, k, seed)
    return build_route_model(D, journeys, clustering, tau, threads=threads), D, clustering


# -- GPS side ------------------------------------------------------------------------


def _centroid(tr: Sequence[GpsPoint]) -> tuple[float, float]:
    return float(np.mean([p.lat for p in tr])), float(np.mean([p.lon for p in tr]))


def split_cities(trajectories: Sequence[Sequence[GpsPoint]], cutoff_m: float = CITY_SPLIT_M) -> np.ndarray:
    """Single-linkage groups of trajectory centroids closer than ``cutoff_m``; 1-based."""
    cents = [_centroid(tr) for tr in trajectories]
    n = len(cents)
    group = np.zeros(n, dtype=int)
    current = 0
    for s in range(n):
        if group[s]:
            continue
        current += 1
        group[s] = current
        stack = [s]
        while stack:
            i = stack.pop()
            for j in range(n):
                if not group[j] and great_circle(cents[i], cents[j]) < cutoff_m:
                    group[j] = current
                    stack.append(j)
    return group


def cluster_gps(
    trajectories: Sequence[Sequence[GpsPoint]],
    k: int | None = None,
    seed: int = 0,
    threads: int | None = None,
    cutoff_m: float = CITY_SPLIT_M,
) -> Partition:
    """Partition GPS trajectories by great-circle DTW and k-medoids.

    Trajectories whose centroids are more than ``cutoff_m`` apart are first
    split into cities, each clustered separately with its own BIC estimate;
    otherwise a single stage uses ``k`` (estimated when None).
    """
    cities = split_cities(trajectories, cutoff_m)
    n = len(trajectories)
    if cities.max() == 1:
        D = gps_dissimilarity_matrix(trajectories, threads=threads)
        if k is None:
            k = estimate_k(D, seed=seed)
        return k_medoids(D, k, seed).partition
    labels = [None] * n
    for city in range(1, cities.max() + 1):
        idx = np.flatnonzero(cities == city)
        if idx.size == 1:
            labels[idx[0]] = (city, 1)
            continue
        D = gps_dissimilarity_matrix([trajectories[i] for i in idx], threads=threads)
        kc = estimate_k(D, seed=seed) if idx.size > 2 else (1 if D.d[0, 1] == 0 else 2)
        part = k_medoids(D, kc, seed).partition
        for i, lab in zip(idx, part.labels):
            labels[i] = (city, int(lab))
    return Partition.from_labels(labels)


def load_labels(path: str | os.PathLike) -> dict[str, int]:
    import csv

    out = {}
    with open(Path(path), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[row["trace_id"]] = int(row["route_id"])
    return out
