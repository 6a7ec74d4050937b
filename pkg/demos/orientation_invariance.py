"""One route, fifty phone orientations.

After gravity alignment every drive should look like the same yaw-rate signal,
so its DTW distance to another drive of the route stays well under its
distance to a different route. Writes ``orientation.csv`` with one row per
orientation: the alignment error against ground truth and both distances.
"""
import copy
import csv

import numpy as np

from _common import output_dir
from routewarp.align import align_trace, random_unit_quaternion
from routewarp.dtw import dtw_full
from routewarp.synth import default_network, random_route, random_scenario, synth_trace

out = output_dir(__doc__.splitlines()[0])
rng = np.random.default_rng(42)
net = default_network(0)
route, other = random_route(net, rng), random_route(net, rng)
base = random_scenario(route.polyline, rng)
reference = align_trace(synth_trace(random_scenario(route.polyline, rng), 25).trace)
control = align_trace(synth_trace(random_scenario(other.polyline, rng), 25).trace)

rows = []
for k in range(50):
    sc = copy.deepcopy(base)
    sc.orientation = random_unit_quaternion(rng)
    sc.seed = int(rng.integers(2**31))
    r = synth_trace(sc, 25)
    s, truth = align_trace(r.trace), r.yaw_1hz
    n = min(len(s), len(truth))
    err = np.sqrt(np.mean((s.values[:n] - truth.values[:n]) ** 2)) / np.abs(truth.values).max()
    rows.append((k + 1, *np.round(sc.orientation, 4), err, dtw_full(s, reference).distance, dtw_full(s, control).distance))

with open(out / "orientation.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["case", "qw", "qx", "qy", "qz", "rmse_over_peak", "actual_dist", "control_dist"])
    w.writerows(rows)

err = np.array([r[5] for r in rows])
margin = np.array([r[7] / r[6] for r in rows])
print(f"alignment error: median {100 * np.median(err):.2f} %, worst {100 * err.max():.2f} % of the peak yaw rate")
print(f"control is {margin.min():.2f}x to {margin.max():.2f}x farther than the same route")
print(f"wrote {out / 'orientation.csv'}")
