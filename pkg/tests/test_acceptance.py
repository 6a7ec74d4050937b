"""End-to-end acceptance gate, one test per criterion.

Each test records a one-line verdict (see the ``acceptance`` section of the
pytest summary) before asserting, so a failing run still says by how much.
"""
import copy
import time

import numpy as np
import pytest
from oracles import abs_cost, enumerate_paths, prefix_oracle, subrange_oracle

from routewarp.align import align_trace, random_unit_quaternion, rotate_gyro, rotate_vector, shortest_arc_quaternion
from routewarp.detect import activity_corpus, train_and_evaluate, window_features
from routewarp.dtw import dtw_full, dtw_open_both, dtw_open_ended
from routewarp.maneuvers import GridNetwork, uniqueness_study
from routewarp.mining import (
    Partition,
    build_route_model,
    cluster_gps,
    corrected_rand,
    dissimilarity_matrix,
    estimate_k,
    k_medoids,
    variation_of_information,
)
from routewarp.stream import MATCHED, NEW_ROUTE, replay
from routewarp.synth import apply_detour, default_network, novel_route, random_route, random_scenario, reroute, synth_corpus, synth_trace

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def eight_routes():
    t0 = time.perf_counter()
    corpus = synth_corpus(8, 5, seed=0)
    series = [align_trace(t) for t in corpus.traces]
    D = dissimilarity_matrix(series, corpus.ids)
    k = estimate_k(D, seed=0)
    clustering = k_medoids(D, k, seed=0)
    gps = cluster_gps(corpus.gps, k, seed=0)
    elapsed = time.perf_counter() - t0
    return corpus, series, D, k, clustering, gps, elapsed


def test_criterion_1_dtw_oracles(report):
    dtw_full([0.0, 1.0], [1.0])
    dtw_open_ended([0.0, 1.0], [1.0])
    dtw_open_both([0.0, 1.0], [1.0])
    enumerate_paths(np.zeros((2, 2)))
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    bad = {"full": 0, "open": 0, "open-both": 0}
    for _ in range(200):
        n, m = (int(v) for v in rng.integers(1, 13, 2))
        # small integers keep every cost exact in floating point
        x = rng.integers(-4, 5, n).astype(float)
        y = rng.integers(-4, 5, m).astype(float)
        best, _ = enumerate_paths(abs_cost(x, y))
        bad["full"] += dtw_full(x, y).raw_cost != best
        bad["open"] += dtw_open_ended(x, y).distance != prefix_oracle(x, y)[0]
        bad["open-both"] += dtw_open_both(x, y).distance != subrange_oracle(x, y)
    elapsed = time.perf_counter() - t0
    ok = sum(bad.values()) == 0 and elapsed < 10.0
    report(1, "DTW oracle equivalence", ok, f"200 pairs, mismatches {bad}, {elapsed:.1f} s (limit 10 s)")
    assert ok


def test_criterion_2_alignment(report):
    rng = np.random.default_rng(42)
    net = default_network(0)
    route, other = random_route(net, rng), random_route(net, rng)
    base = random_scenario(route.polyline, rng)
    reference = align_trace(synth_trace(random_scenario(route.polyline, rng, orientation=np.array([1.0, 0, 0, 0])), 25).trace)
    control = align_trace(synth_trace(random_scenario(other.polyline, rng), 25).trace)
    worst, separated = 0.0, 0
    for _ in range(50):
        sc = copy.deepcopy(base)
        sc.orientation = random_unit_quaternion(rng)
        sc.seed = int(rng.integers(2**31))
        r = synth_trace(sc, 25)
        s, truth = align_trace(r.trace), r.yaw_1hz
        n = min(len(s), len(truth))
        rel = np.sqrt(np.mean((s.values[:n] - truth.values[:n]) ** 2)) / np.abs(truth.values).max()
        worst = max(worst, rel)
        separated += dtw_full(s, reference).distance < dtw_full(s, control).distance
    ok = worst < 0.05 and separated == 50
    report(2, "alignment under random orientation", ok, f"worst RMSE {100 * worst:.2f} % of peak (limit 5 %), separated {separated}/50")
    assert ok


def test_criterion_3_detours(report, eight_routes):
    corpus, series, D, *_ = eight_routes
    medoids = k_medoids(D, 8, seed=0).medoids
    medoid_route = [corpus.labels[m] for m in medoids]
    fractions = (0.05, 0.10, 0.20)
    draws = 4
    own = np.zeros((len(corpus.routes), draws, len(fractions)))
    closest = 0
    total = 0
    for ri, route in enumerate(corpus.routes):
        rng = np.random.default_rng(1000 + ri)
        n_edges = len(route.nodes) - 1
        for d in range(draws):
            base = random_scenario(route.polyline, rng)
            # one detour start per drive, so the three fractions nest
            start = int(rng.integers(1, n_edges - round(max(fractions) * n_edges) - 1))
            for fi, f in enumerate(fractions):
                driven = apply_detour(route, f, start=start)
                s = align_trace(synth_trace(reroute(base, driven.polyline, rng), 25).trace)
                dist = [dtw_full(s, series[m]).distance for m in medoids]
                mine = dist[medoid_route.index(ri + 1)]
                others = min(x for x, lab in zip(dist, medoid_route) if lab != ri + 1)
                own[ri, d, fi] = mine
                closest += mine < others
                total += 1
    mean = own.mean(axis=(0, 1))
    per_route = own.mean(axis=1)
    monotone_routes = int(np.sum(np.all(np.diff(per_route, axis=1) > 0, axis=1)))
    trend = bool(np.all(np.diff(mean) > 0))
    ok = closest == total and trend
    report(
        3,
        "detour robustness",
        ok,
        f"closest to own medoid {closest}/{total}; mean distance at 5/10/20 % = {mean[0]:.5f}/{mean[1]:.5f}/{mean[2]:.5f}; "
        f"monotone within {monotone_routes}/8 single routes",
    )
    assert ok


def test_criterion_4_clustering(report, eight_routes):
    corpus, _, _, k, clustering, gps, elapsed = eight_routes
    truth = Partition(np.array(corpus.labels))
    ari, vi = corrected_rand(clustering.partition, truth), variation_of_information(clustering.partition, truth)
    ari_g, vi_g = corrected_rand(clustering.partition, gps), variation_of_information(clustering.partition, gps)
    ok = k == 8 and ari == 1.0 and vi == 0.0 and ari_g == 1.0 and vi_g == 0.0 and elapsed < 120
    report(4, "clustering recovery", ok, f"k={k}, vs truth rand={ari:.6f} vi={vi:.6f}, vs GPS rand={ari_g:.6f} vi={vi_g:.6f}, {elapsed:.1f} s (limit 120 s)")
    assert ok


def test_criterion_5_streaming(report, eight_routes):
    corpus, series, D, *_ = eight_routes
    clustering = k_medoids(D, 8, seed=0)
    model = build_route_model(D, series, clustering)
    route_of = {c.cluster: corpus.labels[corpus.ids.index(c.medoid_id)] for c in model.clusters}
    fresh = synth_corpus(8, 5, network=corpus.network, seed=1000, route_list=corpus.routes)
    late, wrong = 0, 0
    batches = []
    for res, label in zip(fresh.results, fresh.labels):
        events = replay(res.trace, model)
        last = events[-1]
        batches.append(last.at_batch)
        if last.verdict != MATCHED:
            late += 1
        elif route_of[last.cluster] != label:
            wrong += 1
    rng = np.random.default_rng(3000)
    novel_ok, novel = 0, 0
    while novel < 10:
        r = novel_route(corpus.network, corpus.routes, rng, min_hops=52)
        res = synth_trace(random_scenario(r.polyline, rng), 25)
        # five batches need at least 961 s of driving
        if res.duration < 1000:
            continue
        novel += 1
        events = replay(res.trace, model)
        novel_ok += events[-1].verdict == NEW_ROUTE and events[-1].at_batch == 5
    ok = late == 0 and wrong == 0 and novel_ok == 10
    report(
        5,
        "streaming recognition",
        ok,
        f"known: {40 - late - wrong}/40 matched (unmatched {late}, wrong cluster {wrong}, batches used {np.bincount(batches)[1:].tolist()}); "
        f"novel: {novel_ok}/10 new_route at batch 5",
    )
    assert ok


def test_criterion_6_grid_uniqueness(report):
    net = GridNetwork(30, 30, spacing=100.0, jitter=20.0, seed=0)
    study = uniqueness_study(net, 1000, seed=1, min_pairs=200)
    turns = study.turns_per_trip.mean()
    zero = study.lcs[study.overlap == 0].mean()
    means = study.bin_mean_lcs
    monotone = bool(np.all(np.diff(means) >= 0))
    ok = study.zero_overlap_mean_lcs < 0.4 * turns and zero < 0.4 * turns and monotone
    report(
        6,
        "grid uniqueness",
        ok,
        f"mean turns/trip {turns:.2f}; mean LCS lowest bin {study.zero_overlap_mean_lcs:.2f} (ratio {study.zero_overlap_mean_lcs / turns:.3f}), "
        f"exactly disjoint pairs {zero:.2f} (ratio {zero / turns:.3f}); {len(means)} bins monotone={monotone}",
    )
    assert ok


def test_criterion_7_driving_detection(report):
    rows = []
    for trace, label in activity_corpus(seed=0):
        rows += window_features(trace, 2.0, label)
    ev = train_and_evaluate(rows, seed=0, train_fraction=0.6)
    ok = ev.accuracy >= 0.95 and ev.auc >= 0.98
    cells = "/".join(f"{v:.1f}" for v in ev.confusion.ravel())
    report(7, "driving detection", ok, f"held-out accuracy {100 * ev.accuracy:.2f} % (limit 95 %), AUC {ev.auc:.4f} (limit 0.98), confusion {cells} %")
    assert ok


def test_criterion_8_quadratic_scaling(report):
    rng = np.random.default_rng(8)
    medoid = rng.normal(size=1440)
    dtw_full(rng.normal(size=50), medoid)
    times = []
    for n in (300, 600, 1200):
        x = rng.normal(size=n)
        best = np.inf
        for _ in range(5):
            t = time.perf_counter()
            dtw_full(x, medoid)
            best = min(best, time.perf_counter() - t)
        times.append(best)
    ratios = [times[1] / times[0], times[2] / times[1]]
    ok = max(ratios) <= 4.5
    report(8, "quadratic scaling", ok, f"times {', '.join(f'{1000 * t:.2f} ms' for t in times)}; growth per doubling {ratios[0]:.2f}x, {ratios[1]:.2f}x (limit 4.5x)")
    assert ok


def test_criterion_9_quaternions(report):
    rng = np.random.default_rng(9)
    g = rng.normal(size=(10_000, 3))
    g *= rng.uniform(0.5, 20.0, size=(10_000, 1)) / np.linalg.norm(g, axis=1, keepdims=True)
    omega = rng.normal(size=(10_000, 3))
    norm_err = onto_err = keep_err = 0.0
    for gk, wk in zip(g, omega):
        q = shortest_arc_quaternion(gk)
        norm_err = max(norm_err, abs(np.linalg.norm(q) - 1.0))
        onto_err = max(onto_err, float(np.abs(rotate_vector(q, gk / np.linalg.norm(gk)) - [0, 0, 1]).max()))
        keep_err = max(keep_err, abs(np.linalg.norm(rotate_gyro(q, wk)) - np.linalg.norm(wk)))
    anti = shortest_arc_quaternion([0.0, 0.0, -9.81])
    anti_exact = anti.tolist() == [0.0, 1.0, 0.0, 0.0] and rotate_vector(anti, [0.0, 0.0, -1.0]).tolist() == [0.0, 0.0, 1.0]
    ok = norm_err <= 1e-9 and onto_err <= 1e-9 and keep_err <= 1e-9 and anti_exact
    report(9, "quaternion properties", ok, f"10000 vectors: max |q|-1 {norm_err:.1e}, max onto-z error {onto_err:.1e}, max norm change {keep_err:.1e}; antiparallel exact={anti_exact}")
    assert ok
