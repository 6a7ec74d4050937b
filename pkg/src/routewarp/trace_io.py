"""In-memory and on-disk representations of IMU traces, GPS trajectories and
1 Hz angular-speed series.

CSV layouts (UTF-8, ``.`` decimal separator, LF line endings):

* IMU trace: ``t,ax,ay,az,gx,gy,gz`` in s, m/s^2, rad/s
* GPS trajectory: ``t,lat,lon`` in s, degrees, degrees
* aligned series: ``t,omega_z,masked`` in s, rad/s, 0/1
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

IMU_HEADER = ("t", "ax", "ay", "az", "gx", "gy", "gz")
GPS_HEADER = ("t", "lat", "lon")
ALIGNED_HEADER = ("t", "omega_z", "masked")

#: relative deviation of an inter-sample gap from the median tolerated silently
JITTER_TOLERANCE = 0.20


class TraceFormatError(ValueError):
    """Raised when a trace file or array violates the trace invariants."""

    def __init__(self, message: str, line: int | None = None, path: str | os.PathLike | None = None):
        self.line = line
        self.path = None if path is None else str(path)
        prefix = ""
        if self.path is not None:
            prefix += f"{self.path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


@dataclass(frozen=True)
class ImuSample:
    t: float
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]

    def __post_init__(self):
        if not self.t >= 0:
            raise TraceFormatError(f"negative or NaN timestamp {self.t}")
        if not all(math.isfinite(v) for v in (*self.accel, *self.gyro)):
            raise TraceFormatError("non-finite sensor component")


@dataclass
class ImuTrace:
    """A journey's raw accelerometer and gyroscope samples.

    Stored column-wise: ``t`` has shape ``(N,)``, ``accel`` and ``gyro`` have
    shape ``(N, 3)``.
    """

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray
    nominal_rate: float = 0.0
    trace_id: str = ""
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.accel = np.asarray(self.accel, dtype=float).reshape(-1, 3)
        self.gyro = np.asarray(self.gyro, dtype=float).reshape(-1, 3)
        n = self.t.shape[0]
        if self.accel.shape[0] != n or self.gyro.shape[0] != n:
            raise TraceFormatError("t, accel and gyro lengths differ")
        if n < 2:
            raise TraceFormatError(f"trace needs at least 2 samples, got {n}")
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.accel)) and np.all(np.isfinite(self.gyro))):
            raise TraceFormatError("non-finite values in trace")
        if self.t[0] < 0:
            raise TraceFormatError("timestamps must be non-negative")
        gaps = np.diff(self.t)
        if np.any(gaps <= 0):
            k = int(np.argmax(gaps <= 0)) + 1
            raise TraceFormatError(f"timestamps not strictly increasing at sample {k}")
        if not self.nominal_rate:
            self.nominal_rate = 1.0 / float(np.median(gaps))
        if not self.nominal_rate > 0:
            raise TraceFormatError("nominal_rate must be positive")
        jitter = np.abs(gaps * self.nominal_rate - 1.0)
        if np.any(jitter > JITTER_TOLERANCE):
            self.warnings.append(
                f"sample-rate jitter above {JITTER_TOLERANCE:.0%} in {int(np.sum(jitter > JITTER_TOLERANCE))} gaps"
            )

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def samples(self) -> list[ImuSample]:
        return [
            ImuSample(float(t), tuple(map(float, a)), tuple(map(float, g)))
            for t, a, g in zip(self.t, self.accel, self.gyro)
        ]

    @classmethod
    def from_samples(cls, samples: Sequence[ImuSample], nominal_rate: float = 0.0, trace_id: str = "") -> "ImuTrace":
        return cls(
            t=[s.t for s in samples],
            accel=[s.accel for s in samples],
            gyro=[s.gyro for s in samples],
            nominal_rate=nominal_rate,
            trace_id=trace_id,
        )

    def slice_time(self, start: float, end: float) -> "ImuTrace":
        """Samples with ``start <= t < end``."""
        sel = (self.t >= start) & (self.t < end)
        return ImuTrace(self.t[sel], self.accel[sel], self.gyro[sel], self.nominal_rate, self.trace_id)


@dataclass(frozen=True)
class GpsPoint:
    t: float
    lat: float
    lon: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.lat, self.lon)):
            raise TraceFormatError("non-finite GPS field")
        if not -90.0 <= self.lat <= 90.0:
            raise TraceFormatError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise TraceFormatError(f"longitude {self.lon} outside [-180, 180]")


Trajectory = list[GpsPoint]


def trajectory_array(trajectory: Sequence[GpsPoint]) -> np.ndarray:
    """``(N, 2)`` array of ``(lat, lon)`` degrees."""
    return np.array([[p.lat, p.lon] for p in trajectory], dtype=float).reshape(-1, 2)


def validate_trajectory(points: Sequence[GpsPoint]) -> Trajectory:
    if len(points) < 2:
        raise TraceFormatError(f"trajectory needs at least 2 points, got {len(points)}")
    for k in range(1, len(points)):
        if points[k].t < points[k - 1].t:
            raise TraceFormatError(f"GPS timestamps not monotone at point {k}")
    return list(points)


@dataclass
class AngularSpeedSeries:
    """1 Hz vehicle-frame z angular speed (rad/s).

    ``mask`` flags samples that fall inside a phone-interaction interval; those
    carry value 0 and are treated as wildcards by the DTW engine.
    """

    values: np.ndarray
    origin_trace_id: str = ""
    mask: np.ndarray | None = None
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size < 1:
            raise TraceFormatError("angular speed series must have at least one value")
        if not np.all(np.isfinite(self.values)):
            raise TraceFormatError("non-finite angular speed values")
        if self.mask is None:
            self.mask = np.zeros(self.values.size, dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool).ravel()
            if self.mask.size != self.values.size:
                raise TraceFormatError("mask length differs from values")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.values.size, dtype=float)

    def head(self, n: int) -> "AngularSpeedSeries":
        return AngularSpeedSeries(self.values[:n], self.origin_trace_id, self.mask[:n], self.t0)


# -- aggregation ----------------------------------------------------------------


def aggregate_1hz(t: np.ndarray, values: np.ndarray, mask: np.ndarray | None = None, trace_id: str = "") -> AngularSpeedSeries:
    """Average per-sample angular speeds over whole-second windows ``[k, k+1)``.

    Window ``k`` covers ``[t[0] + k, t[0] + k + 1)``. The trailing window is kept
    when it holds at least half the samples a full window would hold at the
    median sample rate. Interior windows without samples (logging gaps) are
    filled by linear interpolation between neighbouring windows.

    If ``mask`` is given, a window whose samples are mostly masked becomes a
    masked 0; otherwise its value is the mean of its unmasked samples.
    """
    t = np.asarray(t, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if t.size == 0:
        raise TraceFormatError("cannot aggregate an empty series")
    if t.size != values.size:
        raise TraceFormatError("timestamps and values differ in length")
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise TraceFormatError("timestamps are not monotone")
    sample_mask = np.zeros(t.size, dtype=bool) if mask is None else np.asarray(mask, dtype=bool).ravel()

    origin = float(t[0])
    # tolerance keeps samples generated as k/rate on the correct side of a boundary
    idx = np.floor(t - origin + 1e-9).astype(np.int64)
    n_windows = int(idx[-1]) + 1
    counts = np.bincount(idx, minlength=n_windows)
    masked_counts = np.bincount(idx, weights=sample_mask.astype(float), minlength=n_windows)
    live = ~sample_mask
    sums = np.bincount(idx[live], weights=values[live], minlength=n_windows)
    live_counts = np.bincount(idx[live], minlength=n_windows)

    rate = 1.0 / float(np.median(np.diff(t))) if t.size > 1 else 1.0
    expected = max(rate, 1.0)
    if counts[-1] < 0.5 * expected and n_windows > 1:
        n_windows -= 1
        counts, masked_counts, sums, live_counts = (a[:n_windows] for a in (counts, masked_counts, sums, live_counts))

    out_mask = (counts > 0) & (masked_counts > 0.5 * counts)
    out = np.zeros(n_windows)
    have = (live_counts > 0) & ~out_mask
    out[have] = sums[have] / live_counts[have]
    gaps = (counts == 0)
    if np.any(gaps) and np.any(have):
        k = np.arange(n_windows)
        out[gaps] = np.interp(k[gaps], k[have], out[have])
    return AngularSpeedSeries(out, trace_id, out_mask, float(origin))


# -- CSV readers/writers ----------------------------------------------------------


def _fmt(x: float) -> str:
    # repr gives the shortest string that round-trips a float exactly
    return repr(float(x))


def _read_rows(path: str | os.PathLike, header: Sequence[str]) -> Iterable[tuple[int, list[float]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            first = next(reader)
        except StopIteration:
            raise TraceFormatError("empty file", line=1, path=path) from None
        if tuple(c.strip() for c in first) != tuple(header):
            raise TraceFormatError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1, path=path)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(f"expected {len(header)} fields, got {len(row)}", line=line, path=path)
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise TraceFormatError(f"non-numeric field ({exc})", line=line, path=path) from None
            if not all(math.isfinite(v) for v in vals):
                raise TraceFormatError("non-finite field", line=line, path=path)
            yield line, vals


def parse_imu_csv(path: str | os.PathLike, trace_id: str | None = None) -> ImuTrace:
    """Read an IMU CSV and return a validated :class:`ImuTrace`."""
    rows = []
    prev_t = -math.inf
    for line, vals in _read_rows(path, IMU_HEADER):
        if vals[0] < 0:
            raise TraceFormatError("negative timestamp", line=line, path=path)
        if vals[0] <= prev_t:
            raise TraceFormatError("timestamps not strictly increasing", line=line, path=path)
        prev_t = vals[0]
        rows.append(vals)
    if len(rows) < 2:
        raise TraceFormatError(f"trace needs at least 2 samples, got {len(rows)}", path=path)
    data = np.array(rows)
    tid = Path(path).stem if trace_id is None else trace_id
    return ImuTrace(data[:, 0], data[:, 1:4], data[:, 4:7], trace_id=tid)


def write_imu_csv(path: str | os.PathLike, trace: ImuTrace) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(IMU_HEADER)
        for t, a, g in zip(trace.t, trace.accel, trace.gyro):
            w.writerow([_fmt(t), *map(_fmt, a), *map(_fmt, g)])


def parse_gps_csv(path: str | os.PathLike) -> Trajectory:
    points = []
    for line, vals in _read_rows(path, GPS_HEADER):
        try:
            points.append(GpsPoint(*vals))
        except TraceFormatError as exc:
            raise TraceFormatError(str(exc), line=line, path=path) from None
        if len(points) > 1 and points[-1].t < points[-2].t:
            raise TraceFormatError("GPS timestamps not monotone", line=line, path=path)
    try:
        return validate_trajectory(points)
    except TraceFormatError as exc:
        raise TraceFormatError(str(exc), path=path) from None


def write_gps_csv(path: str | os.PathLike, trajectory: Sequence[GpsPoint]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GPS_HEADER)
        for p in trajectory:
            w.writerow([_fmt(p.t), _fmt(p.lat), _fmt(p.lon)])


def write_aligned_csv(path, series: AngularSpeedSeries, comments: Sequence[str] = ()) -> None:
    """Write ``t,omega_z,masked`` rows; ``path`` may also be an open text stream."""
    if hasattr(path, "write"):
        _write_aligned(path, series, comments)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_aligned(fh, series, comments)


def _write_aligned(fh, series: AngularSpeedSeries, comments: Sequence[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ALIGNED_HEADER)
    for t, v, m in zip(series.times, series.values, series.mask):
        w.writerow([_fmt(t), _fmt(v), int(m)])
    for c in comments:
        fh.write(f"# {c}\n")


def parse_aligned_csv(path: str | os.PathLike) -> AngularSpeedSeries:
    rows = [vals for _, vals in _read_rows(path, ALIGNED_HEADER)]
    if not rows:
        raise TraceFormatError("aligned series is empty", path=path)
    data = np.array(rows)
    return AngularSpeedSeries(data[:, 1], Path(path).stem, data[:, 2] > 0.5, float(data[0, 0]))


def sniff_header(path: str | os.PathLike) -> tuple[str, ...]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                return tuple(c.strip() for c in line.strip().split(","))
    return ()
