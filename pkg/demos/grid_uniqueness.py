"""How much of a route do two trips share before their turn sequences agree?

A thousand random trips on a jittered 30 x 30 grid. For every pair, the
shared street length against the longest run of identical turns. Trips that
share no street still agree on a few turns by chance, and the agreement
rises with overlap. Writes ``uniqueness.csv`` (per bin) and ``pairs.csv``.
"""
import numpy as np

from _common import output_dir
from routewarp.maneuvers import GridNetwork, uniqueness_study

out = output_dir(__doc__.splitlines()[0])
study = uniqueness_study(GridNetwork(30, 30, spacing=100.0, jitter=20.0, seed=0), 1000, seed=1)
study.write_bins_csv(out / "uniqueness.csv")
study.write_pairs_csv(out / "pairs.csv")
turns = study.turns_per_trip.mean()
print(f"{len(study.overlap)} pairs, {turns:.1f} turns per trip on average")
for lo, hi, m, c in study.table():
    print(f"overlap {lo:6.0f}-{hi:6.0f} m: mean common run {m:5.2f} turns over {c} pairs")
print(f"disjoint trips share {study.lcs[study.overlap == 0].mean():.2f} turns ({study.lcs[study.overlap == 0].mean() / turns:.0%} of a trip)")
