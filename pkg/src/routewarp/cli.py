"""``routewarp`` command line.

Data goes to stdout, logs to stderr. Exit status: 0 success (or a matched
route), 1 usage or data error, 2 new route (``recognize`` only).
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger("routewarp")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEW_ROUTE = 2
SEED_ENV = "ROUTEWARP_SEED"


class CliError(Exception):
    pass


# -- helpers -----------------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _non_negative_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return v


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _threads(args) -> int | None:
    from .mining import resolve_threads

    return resolve_threads(args.threads)


@contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _load_series(path: str, args=None):
    """1 Hz yaw-rate series from an aligned CSV or, after alignment, a raw IMU CSV."""
    from .align import align_trace
    from .trace_io import ALIGNED_HEADER, IMU_HEADER, parse_aligned_csv, parse_imu_csv, sniff_header

    header = sniff_header(path)
    if header == ALIGNED_HEADER:
        return parse_aligned_csv(path)
    if header == IMU_HEADER:
        return align_trace(parse_imu_csv(path))
    raise CliError(f"{path}: expected an aligned ({','.join(ALIGNED_HEADER)}) or IMU ({','.join(IMU_HEADER)}) CSV")


def _trace_files(directory: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise CliError(f"{directory}: not a directory")
    sub = root / "traces"
    files = sorted((sub if sub.is_dir() else root).glob("*.csv"))
    files = [f for f in files if f.name != "labels.csv"]
    if not files:
        raise CliError(f"{directory}: no trace CSV files found")
    return files


# -- subcommands --------------------------------------------------------------------


def cmd_align(args) -> int:
    from .align import align_samples
    from .trace_io import parse_imu_csv, write_aligned_csv

    trace = parse_imu_csv(args.input)
    for w in trace.warnings:
        log.warning("%s: %s", args.input, w)
    report = align_samples(trace, args.threshold, args.sustain, args.gravity_window)
    comments = []
    if args.report_interactions:
        comments = [f"interaction,{a:.3f},{b:.3f}" for a, b in report.interactions]
    for w in report.warnings:
        log.warning(w)
    with _output(args.output) as fh:
        write_aligned_csv(fh, report.series, comments)
    log.info("aligned %d samples into %d 1 Hz values, %d interaction(s)", len(trace), len(report.series), len(report.interactions))
    return EXIT_OK


def _scenario_loop(args) -> int:
    from .align import align_trace
    from .dtw import dtw_full
    from .synth import scenario_set

    cases = scenario_set(args.scenario_set, args.count, _seed(args))
    ref = align_trace(cases[0].reference)
    ctl = align_trace(cases[0].control)
    with _output(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "actual_dist", "control_dist"])
        for case in cases:
            s = align_trace(case.trace)
            w.writerow([case.name, f"{dtw_full(s, ref).distance:.6f}", f"{dtw_full(s, ctl).distance:.6f}"])
    return EXIT_OK


def cmd_dtw(args) -> int:
    from .dtw import GREAT_CIRCLE, dtw
    from .trace_io import GPS_HEADER, parse_gps_csv, sniff_header

    if args.scenario_set:
        return _scenario_loop(args)
    if not args.a or not args.b:
        raise CliError("dtw needs two inputs (or --scenario-set)")
    gps = [sniff_header(p) == GPS_HEADER for p in (args.a, args.b)]
    if any(gps) and not all(gps):
        raise CliError("cannot compare a GPS trajectory with an angular-speed series")
    if all(gps):
        x, y, cost = parse_gps_csv(args.a), parse_gps_csv(args.b), GREAT_CIRCLE
    else:
        x, y, cost = _load_series(args.a), _load_series(args.b), "absolute"
    result = dtw(x, y, args.mode, cost, path=bool(args.path))
    print(f"{result.distance:.6f}")
    if args.path:
        with _output(args.path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "i", "j"])
            for k, (i, j) in enumerate(result.path):
                w.writerow([k, i, j])
    log.info("matched x[%d..%d] with y[%d..%d], raw cost %.6f", *result.matched_x, *result.matched_y, result.raw_cost)
    return EXIT_OK


def cmd_cluster(args) -> int:
    from .mining import (
        Partition,
        bic_curve,
        build_route_model,
        cluster_gps,
        corrected_rand,
        dissimilarity_matrix,
        k_medoids,
        load_labels,
        variation_of_information,
    )
    from .trace_io import parse_gps_csv

    seed = _seed(args)
    threads = _threads(args)
    files = _trace_files(args.directory)
    ids = [f.stem for f in files]
    journeys = [_load_series(str(f)) for f in files]
    D = dissimilarity_matrix(journeys, ids, threads)
    if args.matrix:
        D.write_csv(args.matrix)
    if args.k == "auto":
        k_max = min(args.k_max, D.n - 1)
        curve = bic_curve(D, k_max, args.embed_dim, seed=seed)
        k = curve.best
        if args.bic:
            with _output(args.bic) as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["k", "bic"])
                w.writerows([kk, f"{b:.6f}"] for kk, b in zip(curve.ks, curve.bic))
    else:
        try:
            k = int(args.k)
        except ValueError:
            raise CliError(f"--k must be 'auto' or an integer, got {args.k!r}") from None
        if not 1 <= k <= D.n:
            raise CliError(f"--k must lie in [1, {D.n}]")
    log.info("k=%d", k)
    clustering = k_medoids(D, k, seed)
    model = build_route_model(D, journeys, clustering, args.tau, threads=threads)
    model.save(args.output)
    log.info("route model written to %s", args.output)
    if args.partition:
        with _output(args.partition) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trace_id", "cluster"])
            w.writerows(zip(ids, clustering.partition.labels.tolist()))
    significant = set(model.significant)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["cluster", "size", "medoid_id", "significant"])
    for c in model.clusters:
        w.writerow([c.cluster, c.size, c.medoid_id, int(c.cluster in significant)])
    labels_path = Path(args.directory) / "labels.csv"
    if labels_path.exists():
        truth = load_labels(labels_path)
        if all(i in truth for i in ids):
            ref = Partition.from_labels([truth[i] for i in ids])
            log.info("vs labels.csv: corrected Rand %.6f, VI %.6f", corrected_rand(clustering.partition, ref), variation_of_information(clustering.partition, ref))
    if args.compare_gps:
        root = Path(args.compare_gps)
        gdir = root / "gps" if (root / "gps").is_dir() else root
        missing = [i for i in ids if not (gdir / f"{i}.csv").exists()]
        if missing:
            raise CliError(f"{gdir}: no GPS trajectory for {', '.join(missing[:3])}")
        trajectories = [parse_gps_csv(gdir / f"{i}.csv") for i in ids]
        gps_part = cluster_gps(trajectories, k, seed, threads)
        print(f"corrected_rand={corrected_rand(clustering.partition, gps_part):.6f} vi={variation_of_information(clustering.partition, gps_part):.6f}")
    return EXIT_OK


def cmd_recognize(args) -> int:
    from .mining import RouteModel
    from .stream import BUDGET_SECONDS, MATCHED, medoid_distances, replay, write_report

    if not Path(args.model).exists():
        raise CliError(f"{args.model}: model file not found")
    model = RouteModel.load(args.model)
    series = _load_series(args.trace)
    if args.stream:
        events = replay(series, model, args.batch_seconds)
    else:
        from .stream import NEW_ROUTE, RecognitionEvent

        head = series.head(BUDGET_SECONDS)
        distances = medoid_distances(head, model)
        event = RecognitionEvent(1, len(head), NEW_ROUTE, None, None, distances)
        if distances:
            best = int(np.argmin(distances))
            c = model.clusters[best]
            if distances[best] < c.threshold_at(len(head)):
                event = RecognitionEvent(1, len(head), MATCHED, c.cluster, distances[best], distances)
        events = [event]
    if args.report:
        write_report(args.report, events)
    last = events[-1]
    for e in events:
        log.info("batch %d (%d s): best cluster %s at %.6f -> %s", e.at_batch, e.elapsed_s, e.best_cluster, e.best_distance or float("nan"), e.verdict)
    if last.verdict == MATCHED:
        print(f"matched,cluster={last.cluster}")
        return EXIT_OK
    print("new_route")
    return EXIT_NEW_ROUTE


def cmd_simulate(args) -> int:
    from .maneuvers import GridNetwork
    from .synth import synth_corpus
    from .trace_io import write_imu_csv

    seed = _seed(args)
    out = Path(args.output)
    if args.kind == "activity":
        from .detect import activity_corpus

        (out / "traces").mkdir(parents=True, exist_ok=True)
        corpus = activity_corpus(seed, args.traces_per_class, args.duration, args.rate)
        with open(out / "labels.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trace_id", "label"])
            for trace, label in corpus:
                write_imu_csv(out / "traces" / f"{trace.trace_id}.csv", trace)
                w.writerow([trace.trace_id, label])
        log.info("wrote %d activity traces to %s", len(corpus), out)
        return EXIT_OK
    if args.routes < 2 or args.traversals < 2:
        raise CliError("a journey corpus needs at least 2 routes and 2 traversals")
    if not 10 <= args.rate <= 100:
        raise CliError("--rate must lie in [10, 100] Hz")
    try:
        network = GridNetwork(args.rows, args.cols, args.spacing, args.jitter, seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    corpus = synth_corpus(
        args.routes,
        args.traversals,
        network,
        seed,
        rate=args.rate,
        detour_fraction=args.detour_fraction,
        detour_probability=args.detour_probability if args.detour_fraction > 0 else 0.0,
        gyro_noise_sigma=args.gyro_sigma,
        accel_noise_sigma=args.accel_sigma,
    )
    corpus.write(out, extra={"seed": seed, "rate": args.rate})
    log.info("wrote %d traces over %d routes to %s", len(corpus.ids), args.routes, out)
    return EXIT_OK


def cmd_encode(args) -> int:
    from .maneuvers import GridNetwork, encode_turns, extract_turns, uniqueness_study

    if args.study:
        try:
            network = GridNetwork(args.rows, args.cols, args.spacing, args.jitter, _seed(args))
        except ValueError as exc:
            raise CliError(str(exc)) from None
        study = uniqueness_study(network, args.trips, _seed(args), args.bin_width, args.min_pairs, args.subsequence)
        if args.pairs:
            study.write_pairs_csv(args.pairs)
        if args.trips_csv:
            study.write_trips_csv(args.trips_csv)
        with _output(args.output) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["overlap_low_m", "overlap_high_m", "mean_lcs_turns", "pairs"])
            for lo, hi, mean, count in study.table():
                w.writerow([f"{lo:.1f}", f"{hi:.1f}", f"{mean:.4f}", count])
        log.info(
            "mean turns per trip %.2f, zero-overlap mean LCS %.2f",
            float(study.turns_per_trip.mean()),
            study.zero_overlap_mean_lcs,
        )
        return EXIT_OK
    if not args.aligned:
        raise CliError("encode needs an input series (or --study)")
    series = _load_series(args.aligned)
    print(encode_turns(extract_turns(series, args.onset)))
    return EXIT_OK


def _activity_rows(directory: str, window: float):
    from .detect import CLASSES, window_features
    from .trace_io import parse_imu_csv

    root = Path(directory)
    labels_path = root / "labels.csv"
    if not labels_path.exists():
        raise CliError(f"{directory}: labels.csv (trace_id,label) not found")
    with open(labels_path, newline="", encoding="utf-8") as fh:
        labels = {r["trace_id"]: r["label"] for r in csv.DictReader(fh)}
    rows = []
    for f in _trace_files(directory):
        label = labels.get(f.stem)
        if label is None:
            continue
        if label not in CLASSES:
            raise CliError(f"{labels_path}: unknown label {label!r} for {f.stem}")
        rows.extend(window_features(parse_imu_csv(f), window, label))
    if not rows:
        raise CliError(f"{directory}: no labelled traces")
    return rows


def cmd_detect(args) -> int:
    from .detect import DecisionTree, classify, format_confusion, train_and_evaluate, window_features, write_confusion_csv, write_roc_csv
    from .trace_io import parse_imu_csv

    if args.action == "train":
        rows = _activity_rows(args.data, args.window)
        ev = train_and_evaluate(rows, args.max_depth, _seed(args), args.train_fraction)
        ev.tree.save(args.output)
        if args.confusion:
            write_confusion_csv(args.confusion, ev.confusion)
        if args.roc:
            write_roc_csv(args.roc, ev.fpr, ev.tpr, ev.thresholds)
        print(format_confusion(ev.confusion))
        print(f"accuracy={ev.accuracy:.4f} auc={ev.auc:.4f}")
        return EXIT_OK
    tree = DecisionTree.load(args.tree)
    rows = window_features(parse_imu_csv(args.trace), args.window)
    driving = 0
    with _output(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["start_s", "label", "score"])
        for r in rows:
            label, score = classify(tree, r)
            driving += label == "driving"
            w.writerow([f"{r.start:.3f}", label, f"{score:.4f}"])
    log.info("%d of %d windows classified as driving", driving, len(rows))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--threads", type=_positive_int, default=None, help="parallel DTW workers (default: $ROUTEWARP_THREADS or all cores)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr (repeatable)")

    parser = argparse.ArgumentParser(prog="routewarp", description="Inertial route recognition with dynamic time warping.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("align", parents=[common], help="raw IMU CSV -> 1 Hz aligned yaw rate", description="Align a raw IMU trace and emit the 1 Hz vehicle yaw-rate series (t,omega_z,masked).")
    p.add_argument("input", help="IMU CSV (t,ax,ay,az,gx,gy,gz)")
    p.add_argument("-o", "--output", default="-", help="aligned CSV path (default: stdout)")
    p.add_argument("--threshold", type=_positive_float, default=2.0, help="interaction gyro magnitude threshold, rad/s (default 2.0)")
    p.add_argument("--sustain", type=_non_negative_float, default=0.5, help="minimum interaction duration, s (default 0.5)")
    p.add_argument("--gravity-window", type=_positive_float, default=240.0, help="longest gravity-averaging segment, s (default 240)")
    p.add_argument("--report-interactions", action="store_true", help="append detected interaction intervals as '# interaction,start,end' comment rows")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("dtw", parents=[common], help="DTW distance between two series or trajectories", description="Normalized DTW distance between two aligned/raw series or two GPS trajectories; printed to stdout.")
    p.add_argument("a", nargs="?", help="first input (aligned, IMU or GPS CSV)")
    p.add_argument("b", nargs="?", help="second input of the same kind")
    p.add_argument("--mode", choices=["full", "open", "open-both"], default="full", help="full, open-ended, or open-begin/open-end (default full)")
    p.add_argument("--path", metavar="CSV", help="write the warping path as k,i,j ('-' for stdout)")
    p.add_argument("--scenario-set", choices=["orientation", "noise", "detour"], help="ignore inputs; simulate a scenario set and emit scenario,actual_dist,control_dist")
    p.add_argument("--count", type=_positive_int, default=10, help="cases per scenario set (default 10; detour always uses 5/10/20 %%)")
    p.add_argument("-o", "--output", default="-", help="scenario-set CSV path (default: stdout)")
    p.set_defaults(func=cmd_dtw)

    p = sub.add_parser("cluster", parents=[common], help="mine routes from a directory of journeys", description="Build the DTW dissimilarity matrix, choose k, run k-medoids and write a route model. Prints one line per cluster.")
    p.add_argument("directory", help="directory of trace CSVs (or with a traces/ subdirectory)")
    p.add_argument("--k", default="auto", help="cluster count or 'auto' for BIC estimation (default auto)")
    p.add_argument("--k-max", type=_positive_int, default=12, help="largest k tried by BIC (default 12)")
    p.add_argument("--embed-dim", type=_positive_int, default=None, help="MDS embedding dimension for BIC (default: largest eigenvalue gap)")
    p.add_argument("--tau", type=_positive_int, default=3, help="significant-route member threshold (default 3)")
    p.add_argument("-o", "--output", default="model.json", help="route model JSON path (default model.json)")
    p.add_argument("--partition", metavar="CSV", help="write trace_id,cluster")
    p.add_argument("--matrix", metavar="CSV", help="write the dissimilarity matrix")
    p.add_argument("--bic", metavar="CSV", help="write k,bic (auto k only)")
    p.add_argument("--compare-gps", metavar="DIR", help="also cluster GPS trajectories (DIR or DIR/gps) and print corrected Rand and VI")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("recognize", parents=[common], help="match a journey against a route model", description="Replay a journey in batches against a route model. Prints 'matched,cluster=<id>' (exit 0) or 'new_route' (exit 2).")
    p.add_argument("trace", help="aligned or raw IMU CSV")
    p.add_argument("--model", required=True, help="route model JSON from 'cluster'")
    p.add_argument("--batch-seconds", type=_positive_int, default=240, help="seconds of 1 Hz data per batch (default 240)")
    p.add_argument("--stream", action=argparse.BooleanOptionalAction, default=True, help="batch-by-batch replay (default); --no-stream matches the first 20 minutes at once")
    p.add_argument("--report", metavar="CSV", help="write batch,elapsed_s,best_cluster,best_distance,verdict")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic corpus", description="Write synthetic journeys (traces/, gps/, labels.csv, scenario.json) or a driving/walking activity corpus.")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--kind", choices=["journeys", "activity"], default="journeys", help="corpus type (default journeys)")
    p.add_argument("--routes", type=_positive_int, default=3, help="distinct routes (default 3)")
    p.add_argument("--traversals", type=_positive_int, default=5, help="traversals per route (default 5)")
    p.add_argument("--rate", type=_positive_float, default=None, help="IMU sample rate, Hz (default 25 for journeys, 10 for activity)")
    p.add_argument("--rows", type=_positive_int, default=30, help="grid rows (default 30)")
    p.add_argument("--cols", type=_positive_int, default=30, help="grid columns (default 30)")
    p.add_argument("--spacing", type=_positive_float, default=150.0, help="block length, m (default 150)")
    p.add_argument("--jitter", type=_non_negative_float, default=40.0, help="intersection displacement, m (default 40)")
    p.add_argument("--detour-fraction", type=_fraction, default=0.0, help="largest share of edges a detour may replace (default 0)")
    p.add_argument("--detour-probability", type=_fraction, default=0.5, help="chance a traversal takes a detour when --detour-fraction > 0 (default 0.5)")
    p.add_argument("--gyro-sigma", type=_non_negative_float, default=0.005, help="gyro noise, rad/s (default 0.005)")
    p.add_argument("--accel-sigma", type=_non_negative_float, default=0.05, help="accelerometer noise, m/s^2 (default 0.05)")
    p.add_argument("--traces-per-class", type=_positive_int, default=20, help="activity corpus: traces of each class (default 20)")
    p.add_argument("--duration", type=_positive_float, default=240.0, help="activity corpus: seconds per trace (default 240)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("encode", parents=[common], help="maneuver string of a journey, or the grid uniqueness study", description="Print the L/R/S/T maneuver string of a journey, or with --study run the grid uniqueness study and emit per-bin mean LCS.")
    p.add_argument("aligned", nargs="?", help="aligned or raw IMU CSV")
    p.add_argument("--onset", type=_positive_float, default=0.1, help="turn onset |omega_z|, rad/s (default 0.1)")
    p.add_argument("--study", action="store_true", help="run the uniqueness study instead")
    p.add_argument("--trips", type=_positive_int, default=1000, help="study: random trips (default 1000)")
    p.add_argument("--rows", type=_positive_int, default=30, help="study: grid rows (default 30)")
    p.add_argument("--cols", type=_positive_int, default=30, help="study: grid columns (default 30)")
    p.add_argument("--spacing", type=_positive_float, default=100.0, help="study: block length, m (default 100)")
    p.add_argument("--jitter", type=_non_negative_float, default=20.0, help="study: intersection displacement, m (default 20)")
    p.add_argument("--bin-width", type=_positive_float, default=None, help="study: overlap bin width, m (default two blocks)")
    p.add_argument("--min-pairs", type=_positive_int, default=200, help="study: smallest pair count per bin (default 200)")
    p.add_argument("--subsequence", action="store_true", help="study: longest common subsequence instead of substring")
    p.add_argument("-o", "--output", default="-", help="study: per-bin CSV path (default: stdout)")
    p.add_argument("--pairs", metavar="CSV", help="study: write overlap_m,lcs_turns for every pair")
    p.add_argument("--trips-csv", metavar="CSV", help="study: write trip_id,turns,string")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("detect", parents=[common], help="driving-detection decision tree", description="Train or apply the driving/null window classifier.")
    dsub = p.add_subparsers(dest="action", required=True, metavar="ACTION")
    t = dsub.add_parser("train", parents=[common], help="train on a labelled activity corpus", description="Stratified split of the windows, train, and report the held-out confusion matrix and ROC.")
    t.add_argument("data", help="directory with traces/ and labels.csv (trace_id,label)")
    t.add_argument("-o", "--output", default="tree.json", help="tree JSON path (default tree.json)")
    t.add_argument("--window", type=_positive_float, default=2.0, help="feature window, s (default 2)")
    t.add_argument("--max-depth", type=_positive_int, default=4, help="tree depth limit (default 4)")
    t.add_argument("--train-fraction", type=float, default=0.6, help="training share of each class (default 0.6)")
    t.add_argument("--confusion", metavar="CSV", help="write the held-out confusion matrix (percent)")
    t.add_argument("--roc", metavar="CSV", help="write threshold,fpr,tpr")
    c = dsub.add_parser("classify", parents=[common], help="label the windows of a trace", description="Emit start_s,label,score for every window of a trace.")
    c.add_argument("trace", help="IMU CSV")
    c.add_argument("--tree", required=True, help="tree JSON from 'detect train'")
    c.add_argument("--window", type=_positive_float, default=2.0, help="feature window, s (default 2)")
    c.add_argument("-o", "--output", default="-", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_detect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(getattr(args, "verbose", 0), 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)
    if getattr(args, "rate", "unset") is None:
        args.rate = 10.0 if args.kind == "activity" else 25.0
    from .trace_io import TraceFormatError

    try:
        return args.func(args)
    except (CliError, TraceFormatError, ValueError, OSError) as exc:
        print(f"routewarp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
