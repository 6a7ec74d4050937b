import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from routewarp.synth import SpeedProfile, SynthScenario, synth_trace
from routewarp.trace_io import (
    AngularSpeedSeries,
    GpsPoint,
    ImuTrace,
    TraceFormatError,
    aggregate_1hz,
    parse_aligned_csv,
    parse_gps_csv,
    parse_imu_csv,
    write_aligned_csv,
    write_gps_csv,
    write_imu_csv,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_two_rows_give_50hz(tmp_path):
    p = _write(tmp_path / "a.csv", "t,ax,ay,az,gx,gy,gz\n0.00,0,0,9.81,0,0,0\n0.02,0,0,9.81,0,0,0\n")
    trace = parse_imu_csv(p)
    assert trace.nominal_rate == pytest.approx(50.0)
    assert trace.trace_id == "a"


def test_nan_row_names_its_line(tmp_path):
    p = _write(tmp_path / "bad.csv", "t,ax,ay,az,gx,gy,gz\n0,0,0,9.81,0,0,0\n0.02,0,0,9.81,0,0,NaN\n")
    with pytest.raises(TraceFormatError) as err:
        parse_imu_csv(p)
    assert err.value.line == 3
    assert ":3:" in str(err.value)


@pytest.mark.parametrize(
    "body, what",
    [
        ("0,0,0,9.81,0,0,0\n", "at least 2"),
        ("0,0,0,9.81,0,0,0\n0,0,0,9.81,0,0,0\n", "increasing"),
        ("0,0,0,9.81,0,0,0\n0.1,0,0,9.81,0,0\n", "fields"),
        ("0,0,0,9.81,0,0,0\n0.1,0,0,abc,0,0,0\n", "non-numeric"),
    ],
)
def test_malformed_imu_files(tmp_path, body, what):
    p = _write(tmp_path / "x.csv", "t,ax,ay,az,gx,gy,gz\n" + body)
    with pytest.raises(TraceFormatError, match=what):
        parse_imu_csv(p)


def test_wrong_header(tmp_path):
    p = _write(tmp_path / "x.csv", "time,ax,ay,az,gx,gy,gz\n0,0,0,0,0,0,0\n")
    with pytest.raises(TraceFormatError, match="header"):
        parse_imu_csv(p)


def test_jitter_is_a_warning_not_an_error():
    t = np.array([0.0, 0.1, 0.2, 0.35, 0.4, 0.5])
    trace = ImuTrace(t, np.zeros((6, 3)), np.zeros((6, 3)))
    assert trace.warnings and "jitter" in trace.warnings[0]


def test_synthetic_file_of_240_seconds(tmp_path):
    # straight 2400 m at 10 m/s is 240 s of driving
    scenario = SynthScenario(
        route=np.array([[0.0, 0.0], [2400.0, 0.0]]),
        profile=SpeedProfile.constant(10.0),
        gyro_noise_sigma=0.0,
        accel_noise_sigma=0.0,
    )
    trace = synth_trace(scenario, rate=50).trace
    p = tmp_path / "long.csv"
    write_imu_csv(p, trace)
    back = parse_imu_csv(p)
    assert len(back) == len(trace)
    assert len(back) == pytest.approx(12_000, abs=50)
    assert back.duration + 1 / back.nominal_rate == pytest.approx(240.0, abs=1.0)
    np.testing.assert_array_equal(back.accel, trace.accel)


def test_aggregate_constant():
    t = np.arange(150) / 50.0
    s = aggregate_1hz(t, np.full(150, 0.5))
    np.testing.assert_allclose(s.values, [0.5, 0.5, 0.5])


def test_aggregate_step():
    t = np.arange(100) / 50.0
    s = aggregate_1hz(t, np.r_[np.ones(50), np.zeros(50)])
    np.testing.assert_array_equal(s.values, [1.0, 0.0])


def test_aggregate_ramp_is_brute_force_mean():
    t = np.arange(50) / 50.0
    ramp = t.copy()
    s = aggregate_1hz(t, ramp)
    assert s.values[0] == pytest.approx(sum(ramp) / 50)
    assert s.values[0] == pytest.approx(0.49)


def test_aggregate_trailing_window_rule():
    # 2 s plus 30 samples (60 %) -> kept; 2 s plus 20 samples (40 %) -> dropped
    assert len(aggregate_1hz(np.arange(130) / 50.0, np.ones(130))) == 3
    assert len(aggregate_1hz(np.arange(120) / 50.0, np.ones(120))) == 2


def test_aggregate_masked_window():
    t = np.arange(150) / 50.0
    mask = np.zeros(150, bool)
    mask[50:100] = True
    s = aggregate_1hz(t, np.ones(150), mask)
    np.testing.assert_array_equal(s.mask, [False, True, False])
    assert s.values[1] == 0.0


def test_aggregate_rejects_empty():
    with pytest.raises(TraceFormatError):
        aggregate_1hz(np.array([]), np.array([]))


@settings(max_examples=60, deadline=None)
@given(
    rate=st.floats(10, 100),
    duration=st.floats(1.0, 30.0),
    value=st.floats(-2, 2, allow_nan=False),
)
def test_aggregate_length_and_constant_property(rate, duration, value):
    t = np.arange(int(duration * rate)) / rate
    if t.size < 2:
        return
    s = aggregate_1hz(t, np.full(t.size, value))
    span = t[-1] + 1 / rate
    assert len(s) in (int(np.floor(span)), int(np.floor(span)) + 1)
    np.testing.assert_allclose(s.values, value, atol=1e-12)


def test_single_point_gps_is_rejected(tmp_path):
    p = _write(tmp_path / "g.csv", "t,lat,lon\n0,52.2,0.1\n")
    with pytest.raises(TraceFormatError, match="at least 2"):
        parse_gps_csv(p)


def test_latitude_out_of_range(tmp_path):
    p = _write(tmp_path / "g.csv", "t,lat,lon\n0,52.2,0.1\n5,91,0.1\n")
    with pytest.raises(TraceFormatError, match="latitude") as err:
        parse_gps_csv(p)
    assert err.value.line == 3


def test_gps_non_monotone_time(tmp_path):
    p = _write(tmp_path / "g.csv", "t,lat,lon\n5,52.2,0.1\n0,52.2,0.1\n")
    with pytest.raises(TraceFormatError, match="monotone"):
        parse_gps_csv(p)


def test_grid_trajectory_round_trip(tmp_path, small_corpus):
    corpus, _ = small_corpus
    traj = corpus.gps[0]
    p = tmp_path / "g.csv"
    write_gps_csv(p, traj)
    assert parse_gps_csv(p) == traj


finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(
    gaps=st.lists(st.floats(0.001, 1.0), min_size=1, max_size=30),
    data=st.data(),
)
def test_imu_round_trip_property(tmp_path_factory, gaps, data):
    t = np.concatenate([[0.0], np.cumsum(gaps)])
    n = t.size
    accel = np.array(data.draw(st.lists(st.tuples(finite, finite, finite), min_size=n, max_size=n)))
    gyro = np.array(data.draw(st.lists(st.tuples(finite, finite, finite), min_size=n, max_size=n)))
    trace = ImuTrace(t, accel, gyro)
    p = tmp_path_factory.mktemp("rt") / "trace.csv"
    write_imu_csv(p, trace)
    back = parse_imu_csv(p)
    np.testing.assert_array_equal(back.t, trace.t)
    np.testing.assert_array_equal(back.accel, trace.accel)
    np.testing.assert_array_equal(back.gyro, trace.gyro)


def test_aligned_round_trip_with_comments(tmp_path):
    s = AngularSpeedSeries(np.array([0.1, -0.25, 0.0]), "x", np.array([False, False, True]), 3.0)
    p = tmp_path / "x.csv"
    write_aligned_csv(p, s, ["interaction,4.0,5.0"])
    assert p.read_text().splitlines()[-1] == "# interaction,4.0,5.0"
    back = parse_aligned_csv(p)
    np.testing.assert_array_equal(back.values, s.values)
    np.testing.assert_array_equal(back.mask, s.mask)
    assert back.t0 == 3.0


def test_series_invariants():
    with pytest.raises(TraceFormatError):
        AngularSpeedSeries(np.array([]))
    with pytest.raises(TraceFormatError):
        AngularSpeedSeries(np.array([0.0, np.inf]))


def test_gps_point_ranges():
    GpsPoint(0, -90, 180)
    with pytest.raises(TraceFormatError):
        GpsPoint(0, 0, 181)
