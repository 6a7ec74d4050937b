"""Matching cost grows with the product of the two lengths.

Times full DTW of queries of 300 to 1200 seconds against a 24-minute medoid
and writes ``scaling.csv``.
"""
import csv
import time

import numpy as np

from _common import output_dir
from routewarp.dtw import dtw_full, dtw_open_both

out = output_dir(__doc__.splitlines()[0])
rng = np.random.default_rng(0)
medoid = rng.normal(size=1440)
dtw_full(medoid[:10], medoid)
dtw_open_both(medoid[:10], medoid)
rows = []
for n in (150, 300, 600, 900, 1200):
    x = rng.normal(size=n)
    for name, fn in (("full", dtw_full), ("open-both", dtw_open_both)):
        best = np.inf
        for _ in range(5):
            t = time.perf_counter()
            fn(x, medoid)
            best = min(best, time.perf_counter() - t)
        rows.append((n, name, best))
        print(f"{name:9s} {n:5d} x 1440: {1000 * best:7.2f} ms")
with open(out / "scaling.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["query_len", "mode", "seconds"])
    w.writerows(rows)
