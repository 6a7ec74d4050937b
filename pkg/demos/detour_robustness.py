"""Detours of growing length, measured against the mined route medoids.

Eight routes are driven five times each and clustered. Fresh drives then
replace 5, 10 and 20 % of each route's streets with a detour. The distance to
the route's own medoid grows with the detour but stays below the distance to
every other medoid. Writes ``detours.csv``.
"""
import csv

import numpy as np

from _common import output_dir
from routewarp.align import align_trace
from routewarp.dtw import dtw_full
from routewarp.mining import dissimilarity_matrix, k_medoids
from routewarp.synth import apply_detour, random_scenario, reroute, synth_corpus, synth_trace

out = output_dir(__doc__.splitlines()[0])
corpus = synth_corpus(8, 5, seed=0)
series = [align_trace(t) for t in corpus.traces]
medoids = k_medoids(dissimilarity_matrix(series, corpus.ids), 8).medoids
owner = [corpus.labels[m] for m in medoids]

rows = []
for ri, route in enumerate(corpus.routes, start=1):
    rng = np.random.default_rng(1000 + ri)
    base = random_scenario(route.polyline, rng)
    n_edges = len(route.nodes) - 1
    start = int(rng.integers(1, n_edges - round(0.2 * n_edges) - 1))
    for f in (0.05, 0.10, 0.20):
        s = align_trace(synth_trace(reroute(base, apply_detour(route, f, start=start).polyline, rng), 25).trace)
        d = [dtw_full(s, series[m]).distance for m in medoids]
        own = d[owner.index(ri)]
        nearest_other = min(x for x, o in zip(d, owner) if o != ri)
        rows.append((ri, f, own, nearest_other))
        print(f"route {ri} detour {int(100 * f):2d} %: own medoid {own:.5f}, nearest other {nearest_other:.5f}")

with open(out / "detours.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["route", "detour_fraction", "own_medoid_dist", "nearest_other_dist"])
    w.writerows(rows)
for f in (0.05, 0.10, 0.20):
    print(f"mean own-medoid distance at {int(100 * f)} %: {np.mean([r[2] for r in rows if r[1] == f]):.5f}")
