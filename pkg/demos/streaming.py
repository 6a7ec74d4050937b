"""Recognizing a journey while it is still being driven.

A route model is mined from eight routes. New drives of the known routes are
fed to the recognizer in 4-minute batches and usually match on the first batch.
Drives on routes the model has never seen stay unmatched and are declared
new once the journey ends or the 20-minute budget runs out. Writes ``stream.csv`` with every batch decision.
"""
import csv

import numpy as np

from _common import output_dir
from routewarp.align import align_trace
from routewarp.mining import mine_routes
from routewarp.stream import replay
from routewarp.synth import novel_route, random_scenario, synth_corpus, synth_trace

out = output_dir(__doc__.splitlines()[0])
corpus = synth_corpus(8, 5, seed=0)
model, _, _ = mine_routes([align_trace(t) for t in corpus.traces], ids=corpus.ids)
route_of = {c.cluster: corpus.labels[corpus.ids.index(c.medoid_id)] for c in model.clusters}
print(f"model: {model.k} routes")

rows = []
fresh = synth_corpus(8, 2, network=corpus.network, seed=1000, route_list=corpus.routes)
for tid, res, lab in zip(fresh.ids, fresh.results, fresh.labels):
    for e in replay(res.trace, model):
        rows.append(("known", tid, lab, e.at_batch, e.elapsed_s, e.best_cluster, e.best_distance, e.verdict))
    print(f"known route {lab}: {e.verdict} at batch {e.at_batch}" + (f" as route {route_of[e.cluster]}" if e.cluster else ""))

rng = np.random.default_rng(3000)
for k in range(3):
    r = novel_route(corpus.network, corpus.routes, rng, min_hops=52)
    res = synth_trace(random_scenario(r.polyline, rng), 25)
    for e in replay(res.trace, model):
        rows.append(("novel", f"novel_{k + 1}", "", e.at_batch, e.elapsed_s, e.best_cluster, e.best_distance, e.verdict))
    print(f"novel route {k + 1} ({res.duration:.0f} s): {e.verdict} at batch {e.at_batch}")

with open(out / "stream.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["kind", "trace_id", "route_id", "batch", "elapsed_s", "best_cluster", "best_distance", "verdict"])
    w.writerows(rows)
