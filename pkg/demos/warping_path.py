"""How two drives of one route line up.

Open-begin/open-end DTW between two traversals; the warping path shows the
slower drive's seconds stretched against the faster one. Writes ``series.csv``
(both yaw-rate series) and ``path.csv``.
"""
import csv

import numpy as np

from _common import output_dir
from routewarp.align import align_trace
from routewarp.dtw import dtw_open_both
from routewarp.synth import synth_corpus

out = output_dir(__doc__.splitlines()[0])
corpus = synth_corpus(2, 2, seed=3)
a, b = (align_trace(t) for t in corpus.traces[:2])
r = dtw_open_both(a, b, path=True)
i0, i1 = r.matched_y
print(f"drives of {len(a)} s and {len(b)} s; distance {r.distance:.5f}")
print(f"the first drive matches seconds {i0}..{i1} of the second ({100 * (i1 - i0 + 1) / len(b):.0f} % of it)")
slope = np.diff(r.path, axis=0)
print(f"path: {len(r.path)} steps, {int(np.sum(slope[:, 0] == 0))} where only the second drive advances")

with open(out / "series.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["t", "drive_a", "drive_b"])
    for t in range(max(len(a), len(b))):
        w.writerow([t, a.values[t] if t < len(a) else "", b.values[t] if t < len(b) else ""])
np.savetxt(out / "path.csv", np.column_stack([np.arange(len(r.path)), r.path]), fmt="%d", delimiter=",", header="k,i,j", comments="")
