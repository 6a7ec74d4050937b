"""Mining routes from unlabelled journeys.

Forty journeys over eight routes: the BIC curve over the number of clusters,
the k-medoids partition, and its agreement with ground truth and with an
independent clustering of the GPS tracks. Writes ``bic.csv``,
``partition.csv`` and ``dissimilarity.csv``.
"""
import csv

import numpy as np

from _common import output_dir
from routewarp.align import align_trace
from routewarp.mining import (
    Partition,
    bic_curve,
    cluster_gps,
    corrected_rand,
    dissimilarity_matrix,
    embedding_dimension,
    k_medoids,
    variation_of_information,
)
from routewarp.synth import synth_corpus

out = output_dir(__doc__.splitlines()[0])
corpus = synth_corpus(8, 5, seed=0)
series = [align_trace(t) for t in corpus.traces]
D = dissimilarity_matrix(series, corpus.ids)
D.write_csv(out / "dissimilarity.csv")
k_max = min(12, D.n - 1)
print(f"embedding dimension from the eigenvalue gap: {embedding_dimension(D.d, k_max)}")
curve = bic_curve(D, k_max)
with open(out / "bic.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["k", "bic"])
    w.writerows(zip(curve.ks, curve.bic))
k = curve.best
print("BIC by k: " + ", ".join(f"{kk}:{b:.0f}" for kk, b in zip(curve.ks, curve.bic)))
print(f"best k = {k}")

clustering = k_medoids(D, k)
truth = Partition(np.array(corpus.labels))
gps = cluster_gps(corpus.gps, k)
print(f"vs ground truth: corrected Rand {corrected_rand(clustering.partition, truth):.3f}, VI {variation_of_information(clustering.partition, truth):.3f}")
print(f"vs GPS clustering: corrected Rand {corrected_rand(clustering.partition, gps):.3f}, VI {variation_of_information(clustering.partition, gps):.3f}")
with open(out / "partition.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["trace_id", "route_id", "cluster", "gps_cluster"])
    w.writerows(zip(corpus.ids, corpus.labels, clustering.partition.labels, gps.labels))
