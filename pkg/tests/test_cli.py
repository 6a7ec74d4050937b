import contextlib
import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from routewarp.cli import main
from routewarp.synth import default_network, novel_route, random_scenario, synth_corpus, synth_trace
from routewarp.trace_io import parse_aligned_csv, write_imu_csv


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    code, _, _ = run("simulate", "-o", d, "--routes", 3, "--traversals", 4, "--seed", 1)
    assert code == 0
    return d


@pytest.fixture(scope="module")
def clustered(corpus_dir):
    model = corpus_dir / "model.json"
    code, out, err = run("cluster", corpus_dir, "-o", model, "--partition", corpus_dir / "part.csv", "--bic", corpus_dir / "bic.csv", "--compare-gps", corpus_dir, "-v")
    assert code == 0
    return model, out, err


def test_simulate_layout_and_determinism(corpus_dir, tmp_path):
    labels = (corpus_dir / "labels.csv").read_text().splitlines()
    assert labels[0] == "trace_id,route_id" and len(labels) == 1 + 3 * 4
    assert len(list((corpus_dir / "traces").glob("*.csv"))) == 12
    assert len(list((corpus_dir / "gps").glob("*.csv"))) == 12
    again = tmp_path / "again"
    assert run("simulate", "-o", again, "--routes", 3, "--traversals", 4, "--seed", 1)[0] == 0
    for f in (corpus_dir / "traces").glob("*.csv"):
        assert (again / "traces" / f.name).read_bytes() == f.read_bytes()


def test_seed_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("ROUTEWARP_SEED", "1")
    assert run("simulate", "-o", tmp_path / "env", "--routes", 2, "--traversals", 2)[0] == 0
    assert run("simulate", "-o", tmp_path / "flag", "--routes", 2, "--traversals", 2, "--seed", 1)[0] == 0
    a = (tmp_path / "env" / "traces" / "r01_t01.csv").read_bytes()
    assert a == (tmp_path / "flag" / "traces" / "r01_t01.csv").read_bytes()


def test_cluster_recovers_three_routes(clustered, corpus_dir):
    model, out, err = clustered
    assert "k=3" in err
    rows = list(csv.DictReader(io.StringIO(out.split("corrected_rand")[0])))
    assert [r["cluster"] for r in rows] == ["1", "2", "3"]
    assert all(r["size"] == "4" and r["significant"] == "1" for r in rows)
    assert "corrected_rand=1.000000 vi=0.000000" in out
    assert "corrected Rand 1.000000, VI 0.000000" in err
    doc = json.loads(model.read_text())
    assert doc["k"] == 3
    part = (corpus_dir / "part.csv").read_text().splitlines()
    assert part[0] == "trace_id,cluster" and len(part) == 13
    assert (corpus_dir / "bic.csv").read_text().startswith("k,bic\n1,")


def test_cluster_with_one_cluster(corpus_dir, tmp_path):
    code, out, _ = run("cluster", corpus_dir, "--k", 1, "-o", tmp_path / "m.json")
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert row["cluster"] == "1" and row["size"] == "12" and row["medoid_id"].startswith("r0")


def test_cluster_rejects_bad_k(corpus_dir, tmp_path):
    code, _, err = run("cluster", corpus_dir, "--k", "many", "-o", tmp_path / "m.json")
    assert code == 1 and "--k" in err


def test_recognize_known_and_novel(clustered, corpus_dir, tmp_path):
    model, _, _ = clustered
    known = corpus_dir / "traces" / "r02_t03.csv"
    code, out, _ = run("recognize", known, "--model", model, "--report", tmp_path / "rep.csv")
    assert code == 0 and out.strip().startswith("matched,cluster=")
    assert (tmp_path / "rep.csv").read_text().startswith("batch,elapsed_s,best_cluster,best_distance,verdict\n")
    corpus = synth_corpus(3, 1, seed=1)
    rng = np.random.default_rng(3)
    route = novel_route(default_network(1), corpus.routes, rng, min_hops=52)
    p = tmp_path / "novel.csv"
    write_imu_csv(p, synth_trace(random_scenario(route.polyline, rng), 25).trace)
    code, out, _ = run("recognize", p, "--model", model)
    assert code == 2 and out.strip() == "new_route"
    code, out, _ = run("recognize", p, "--model", model, "--no-stream")
    assert code == 2


def test_recognize_missing_model(corpus_dir, tmp_path):
    code, _, err = run("recognize", corpus_dir / "traces" / "r01_t01.csv", "--model", tmp_path / "none.json")
    assert code == 1 and "not found" in err


def test_align_and_dtw(corpus_dir, tmp_path):
    raw = corpus_dir / "traces" / "r01_t01.csv"
    aligned = tmp_path / "a.csv"
    assert run("align", raw, "-o", aligned, "--report-interactions")[0] == 0
    s = parse_aligned_csv(aligned)
    assert len(s) > 100
    code, out, _ = run("dtw", aligned, aligned)
    assert code == 0 and out.strip() == "0.000000"
    other = corpus_dir / "traces" / "r01_t02.csv"
    path = tmp_path / "path.csv"
    code, out, _ = run("dtw", raw, other, "--mode", "open-both", "--path", path)
    assert code == 0 and float(out) > 0
    rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=int)
    assert run("align", other, "-o", tmp_path / "b.csv")[0] == 0
    n_a, n_b = len(s), len(parse_aligned_csv(tmp_path / "b.csv"))
    # two drives of one route: the warping path spans nearly all of both
    assert rows[-1, 1] - rows[0, 1] + 1 >= 0.9 * n_a
    assert rows[-1, 2] - rows[0, 2] + 1 >= 0.9 * n_b


def test_dtw_gps_pair(corpus_dir):
    a = corpus_dir / "gps" / "r01_t01.csv"
    code, out, _ = run("dtw", a, a)
    assert code == 0 and float(out) == 0


def test_dtw_scenario_set(tmp_path):
    out_csv = tmp_path / "detour.csv"
    assert run("dtw", "--scenario-set", "detour", "-o", out_csv)[0] == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert [r["scenario"] for r in rows] == ["detour_05pct", "detour_10pct", "detour_20pct"]
    assert all(float(r["actual_dist"]) < float(r["control_dist"]) for r in rows)


def test_corrupt_csv_exits_one(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,ax,ay,az,gx,gy,gz\n0,0,0,9.81,0,0,0\n0.02,0,0,x,0,0,0\n")
    code, _, err = run("align", bad)
    assert code == 1 and ":3:" in err


def test_encode_straight_and_study(tmp_path):
    straight = tmp_path / "s.csv"
    straight.write_text("t,omega_z,masked\n" + "".join(f"{k},0.0,0\n" for k in range(60)))
    code, out, _ = run("encode", straight)
    assert code == 0 and out.strip() == ""
    code, out, _ = run("encode", "--study", "--trips", 80, "--rows", 12, "--cols", 12, "--min-pairs", 20, "--seed", 2)
    assert code == 0
    assert out.splitlines()[0] == "overlap_low_m,overlap_high_m,mean_lcs_turns,pairs"


def test_detect_train_and_classify(tmp_path):
    data = tmp_path / "act"
    assert run("simulate", "--kind", "activity", "-o", data, "--traces-per-class", 4, "--duration", 60)[0] == 0
    tree = tmp_path / "tree.json"
    code, out, _ = run("detect", "train", data, "-o", tree, "--roc", tmp_path / "roc.csv", "--confusion", tmp_path / "conf.csv")
    assert code == 0 and "accuracy=" in out and "auc=" in out
    roc = np.loadtxt(tmp_path / "roc.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(roc[:, 1]) >= 0) and np.all(np.diff(roc[:, 2]) >= 0)
    trace = next((data / "traces").glob("*.csv"))
    code, out, _ = run("detect", "classify", trace, "--tree", tree)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "start_s,label,score" and len(lines) == 31


def test_every_subcommand_has_help():
    for cmd in (["align"], ["dtw"], ["cluster"], ["recognize"], ["simulate"], ["encode"], ["detect", "train"], ["detect", "classify"]):
        r = subprocess.run([sys.executable, "-m", "routewarp", *cmd, "--help"], capture_output=True, text=True)
        assert r.returncode == 0 and "--seed" in r.stdout
