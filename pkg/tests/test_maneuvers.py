from collections import Counter
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from routewarp.align import align_trace
from routewarp.maneuvers import (
    GridNetwork,
    GridRoute,
    TurnEvent,
    encode_angle,
    encode_turns,
    extract_turns,
    grid_route,
    longest_common_subsequence,
    longest_common_turns,
    overlap_length,
    random_trips,
    uniqueness_study,
)
from routewarp.synth import SpeedProfile, SynthScenario, synth_trace


def test_quiet_series_has_no_turns():
    assert extract_turns(np.zeros(60)) == []


def test_plateau_integrates_to_ninety_degrees():
    w = np.zeros(20)
    w[8:11] = 0.523
    (e,) = extract_turns(w)
    assert e.angle == pytest.approx(89.9, abs=0.05)
    assert (e.t_start, e.t_end) == (8.0, 11.0)


def test_two_right_turns():
    w = np.zeros(30)
    w[5:8] = -0.523
    w[20:23] = -0.523
    events = extract_turns(w)
    assert [round(e.angle, 1) for e in events] == [-89.9, -89.9]
    assert encode_turns(events) == "RR"


def test_ramps_are_included_and_close_turns_merge():
    w = np.zeros(20)
    w[4:9] = [0.05, 0.3, 0.3, 0.3, 0.05]
    assert extract_turns(w)[0].angle == pytest.approx(np.degrees(1.0))
    w = np.zeros(20)
    w[3:5] = 0.4
    w[6:8] = 0.4  # one quiet second between: same curve
    assert len(extract_turns(w)) == 1


@pytest.mark.parametrize(
    "angle, code",
    [(-45, "R"), (-30.5, "R"), (-30, "S"), (-16, "S"), (-15, ""), (10, ""), (15, ""), (20, "T"), (30, "T"), (30.5, "L"), (170, "L")],
)
def test_encoding_table(angle, code):
    assert encode_angle(angle) == code
    assert encode_turns([TurnEvent(0, 1, angle)]) == code


def test_turn_event_invariant():
    with pytest.raises(ValueError):
        TurnEvent(2.0, 2.0, 10.0)


def _brute_lcs(a, b):
    subs = {a[i:j] for i in range(len(a)) for j in range(i + 1, len(a) + 1)}
    return max((len(s) for s in subs if s in b), default=0)


def test_lcs_examples():
    assert longest_common_turns("LRLR", "LRLR") == 4
    assert longest_common_turns("LRLR", "RLRL") == 3 == _brute_lcs("LRLR", "RLRL")
    assert longest_common_turns("", "LR") == 0 == longest_common_turns("LR", "")
    assert longest_common_subsequence("LSRTL", "LRL") == 3


turns = st.text(alphabet="LRST", max_size=14)


@settings(max_examples=200, deadline=None)
@given(a=turns, b=turns)
def test_lcs_properties(a, b):
    n = longest_common_turns(a, b)
    assert n == longest_common_turns(b, a) == _brute_lcs(a, b)
    assert n <= min(len(a), len(b))
    assert longest_common_turns(a, b + a + b) == len(a)
    assert n <= longest_common_subsequence(a, b) == longest_common_subsequence(b, a)


def test_grid_route_basics():
    net = GridNetwork(5, 5)
    assert grid_route(net, (2, 2), (2, 3)).maneuvers == ""
    ell = GridRoute(net, [(0, 0), (0, 1), (1, 1)])  # east then north: a left
    assert ell.maneuvers == "L"
    assert GridRoute(net, [(1, 0), (1, 1), (0, 1)]).maneuvers == "R"
    with pytest.raises(ValueError):
        grid_route(net, (1, 1), (1, 1))
    with pytest.raises(ValueError):
        GridRoute(net, [(0, 0), (1, 1)])


def test_grid_route_is_shortest_and_uniform():
    net = GridNetwork(3, 3)
    seen = Counter()
    rng = np.random.default_rng(0)
    for _ in range(6000):
        r = grid_route(net, (0, 0), (2, 2), rng)
        assert len(r.nodes) == 5
        seen[tuple(r.nodes)] += 1
    assert len(seen) == 6
    freq = np.array(list(seen.values())) / 6000
    assert np.all(np.abs(freq - 1 / 6) < 0.02)


def test_far_route_string_counts_heading_changes(rng):
    net = GridNetwork(20, 20, jitter=20, seed=1)
    r = grid_route(net, (0, 1), (19, 18), rng)
    d = np.diff(r.polyline, axis=0)
    heading = np.degrees(np.arctan2(d[:, 1], d[:, 0]))
    change = (np.diff(heading) + 180) % 360 - 180
    assert len(r.maneuvers) == int(np.sum(np.abs(change) > 15))


def test_overlap_examples():
    net = GridNetwork(4, 6)
    a = GridRoute(net, [(0, k) for k in range(6)])
    assert overlap_length(a, a) == pytest.approx(a.length) == 500
    b = GridRoute(net, [(1, k) for k in range(6)])
    assert overlap_length(a, b) == 0
    c = GridRoute(net, [(1, 0), (0, 0), (0, 1), (0, 2), (0, 3), (1, 3)])
    assert overlap_length(a, c) == 300
    with pytest.raises(ValueError):
        overlap_length(a, GridRoute(GridNetwork(4, 6, spacing=50), a.nodes))


def test_jitter_validation():
    with pytest.raises(ValueError, match="jitter"):
        GridNetwork(3, 3, spacing=100, jitter=50)


def test_study_of_two_identical_routes():
    net = GridNetwork(6, 6, jitter=10, seed=2)
    r = grid_route(net, (0, 0), (5, 4), 3)
    study = uniqueness_study(net, 2, routes=[r, r])
    assert study.overlap.tolist() == [pytest.approx(r.length)]
    assert study.lcs.tolist() == [len(r.maneuvers)]


def test_study_pairs_match_direct_computation():
    net = GridNetwork(10, 10, jitter=20, seed=4)
    trips = random_trips(net, 25, seed=5)
    study = uniqueness_study(net, 25, routes=trips, min_pairs=1)
    pairs = list(combinations(range(25), 2))
    assert study.overlap.size == len(pairs)
    for k, (i, j) in enumerate(pairs):
        assert study.overlap[k] == pytest.approx(overlap_length(trips[i], trips[j]))
        assert study.lcs[k] == longest_common_turns(trips[i].maneuvers, trips[j].maneuvers)
    sub = uniqueness_study(net, 25, routes=trips, subsequence=True, min_pairs=1)
    for k, (i, j) in enumerate(pairs[:40]):
        assert sub.lcs[k] == longest_common_subsequence(trips[i].maneuvers, trips[j].maneuvers)
    assert study.bin_counts.sum() == len(pairs)


def test_study_is_deterministic(tmp_path):
    net = GridNetwork(12, 12, jitter=20, seed=0)
    a = uniqueness_study(net, 60, seed=9, min_pairs=20)
    b = uniqueness_study(net, 60, seed=9, min_pairs=20)
    assert a.table() == b.table()
    a.write_bins_csv(tmp_path / "a.csv")
    b.write_bins_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()
    assert all(c >= 20 for c in a.bin_counts)


def test_synthesized_route_encodes_to_its_geometry():
    # east, north, east, south, east: left, right, right, left
    poly = np.array([[0, 0], [400, 0], [400, 400], [800, 400], [800, 0], [1200, 0]], float)
    geometric = "".join(encode_angle(a) for a in np.array([90, -90, -90, 90]))
    for sigma in (0.0, 0.01, 0.019):
        sc = SynthScenario(poly, SpeedProfile.constant(10.0), gyro_noise_sigma=sigma, accel_noise_sigma=0.05, seed=3, turn_speed=6.0)
        s = align_trace(synth_trace(sc, 25).trace)
        assert encode_turns(extract_turns(s)) == geometric == "LRRL"


def test_scripted_lrl():
    poly = np.array([[0, 0], [300, 0], [300, 300], [600, 300], [600, 600]], float)
    sc = SynthScenario(poly, SpeedProfile.constant(9.0), gyro_noise_sigma=0.005, accel_noise_sigma=0.05, turn_speed=6.0)
    assert encode_turns(extract_turns(align_trace(synth_trace(sc, 25).trace))) == "LRL"
