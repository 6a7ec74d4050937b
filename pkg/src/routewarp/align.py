"""Z-axis alignment of phone gyroscope output to the vehicle frame.

Gravity is estimated as the DC component of the accelerometer. The
shortest-arc quaternion taking the gravity direction onto ``[0, 0, 1]`` is
then applied to every gyroscope sample, and the z component is the vehicle
yaw rate regardless of how the phone sits in the car. Only the z axis is
aligned; the phone's x/y axes stay arbitrary.

Quaternions are plain ``(w, x, y, z)`` arrays with Hamilton product
convention.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .trace_io import AngularSpeedSeries, ImuTrace, aggregate_1hz

log = logging.getLogger(__name__)

GRAVITY = 9.81
Z_UP = np.array([0.0, 0.0, 1.0])

#: below ``-1 + ANTIPARALLEL_EPS`` the rotation axis of the shortest arc is undefined
ANTIPARALLEL_EPS = 1e-6
UNIT_TOL = 1e-9
RENORMALIZE_TOL = 1e-6

DEFAULT_INTERACTION_THRESHOLD = 2.0  # rad/s
DEFAULT_INTERACTION_SUSTAIN = 0.5  # s
DEFAULT_GRAVITY_WINDOW = 240.0  # s


# -- quaternion algebra -------------------------------------------------------------


def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product ``p q``; broadcasts over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate([[np.cos(angle / 2)], np.sin(angle / 2) * axis])


def random_unit_quaternion(rng: np.random.Generator) -> np.ndarray:
    """Uniformly distributed rotation (normalised 4-D Gaussian)."""
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def _rotate_unchecked(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    # q v q^-1 expanded: v + 2w (u x v) + 2 u x (u x v), u the vector part
    w = q[0]
    u = q[1:]
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def _checked_unit(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).ravel()
    if q.shape != (4,):
        raise ValueError("quaternion must have 4 components")
    n2 = float(q @ q)
    if abs(n2 - 1.0) <= UNIT_TOL:
        return q
    n = np.sqrt(n2)
    if abs(n - 1.0) <= RENORMALIZE_TOL:
        warnings.warn(f"quaternion norm {n:.12f} renormalised", RuntimeWarning, stacklevel=3)
        return q / n
    raise ValueError(f"quaternion norm {n} is not unit")


def rotate_vector(q, v) -> np.ndarray:
    """Rotate ``v`` (shape ``(3,)`` or ``(N, 3)``) by unit quaternion ``q``."""
    return _rotate_unchecked(_checked_unit(q), np.asarray(v, dtype=float))


def rotate_gyro(q, omega) -> np.ndarray:
    """Aligned angular velocity ``q omega q^-1`` via explicit Hamilton products.

    A quaternion within 1e-6 of unit norm is renormalised with a warning;
    anything further off raises :class:`ValueError`.
    """
    q = _checked_unit(q)
    omega = np.asarray(omega, dtype=float)
    pure = np.concatenate([np.zeros(omega.shape[:-1] + (1,)), omega], axis=-1)
    return quat_multiply(quat_multiply(q, pure), quat_conjugate(q))[..., 1:]


# -- gravity and the shortest arc ------------------------------------------------------


@dataclass
class GravityEstimate:
    g_p: np.ndarray
    window: float
    start: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.g_p))

    @property
    def valid(self) -> bool:
        return 0.5 * GRAVITY <= self.norm <= 1.5 * GRAVITY


def estimate_gravity(trace: ImuTrace, window: float, start: float | None = None) -> GravityEstimate:
    """Component-wise mean of the accelerometer over ``[start, start + window]``.

    ``start`` defaults to the first sample. The returned estimate carries a
    ``valid`` flag; a magnitude outside ``[0.5 g, 1.5 g]`` is returned, not
    raised, so callers decide how to react.
    """
    if window < 1.0:
        raise ValueError(f"gravity window must be at least 1 s, got {window}")
    t0 = float(trace.t[0]) if start is None else float(start)
    if t0 + window > trace.t[-1] + 1.0 / trace.nominal_rate + 1e-9:
        raise ValueError(f"gravity window [{t0}, {t0 + window}] exceeds trace ending at {trace.t[-1]}")
    sel = (trace.t >= t0) & (trace.t <= t0 + window)
    if not np.any(sel):
        raise ValueError("gravity window contains no samples")
    return GravityEstimate(trace.accel[sel].mean(axis=0), float(window), t0)


def shortest_arc_quaternion(g_p) -> np.ndarray:
    """Unit quaternion rotating the direction of ``g_p`` onto ``[0, 0, 1]``.

    ``q = cos(theta/2) + u_hat sin(theta/2)`` with ``u = g_hat_p x z``,
    ``nu = g_hat_p . z``, ``cos(theta/2) = sqrt((1 + nu)/2)`` and
    ``sin(theta/2) = sqrt((1 - nu)/2)``. For (near-)antiparallel input the
    axis is undefined and a half turn about the phone x axis is returned.
    """
    g = np.asarray(g_p, dtype=float).ravel()
    norm = np.linalg.norm(g)
    if not norm > 0 or not np.isfinite(norm):
        raise ValueError("gravity vector must have positive finite norm")
    g_hat = g / norm
    nu = float(np.clip(g_hat @ Z_UP, -1.0, 1.0))
    if nu < -1.0 + ANTIPARALLEL_EPS:
        return np.array([0.0, 1.0, 0.0, 0.0])
    u = np.cross(g_hat, Z_UP)
    u_norm = np.linalg.norm(u)
    if u_norm == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    u_hat = u / u_norm
    half_cos = np.sqrt((1.0 + nu) / 2.0)
    half_sin = np.sqrt((1.0 - nu) / 2.0)
    return np.concatenate([[half_cos], u_hat * half_sin])


# -- interaction detection ---------------------------------------------------------


def _runs(flag: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive ``(first, last)`` index pairs of True runs."""
    d = np.diff(np.concatenate([[0], flag.astype(np.int8), [0]]))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def detect_interaction(
    trace: ImuTrace,
    threshold: float = DEFAULT_INTERACTION_THRESHOLD,
    sustain: float = DEFAULT_INTERACTION_SUSTAIN,
) -> list[tuple[float, float]]:
    """Intervals where the gyro magnitude stays above ``threshold`` for at least ``sustain`` s.

    Each interval runs from the first exceeding sample to one sample period
    past the last, so a burst occupying ``[a, b)`` is reported as ``(a, b)``.
    """
    if not threshold > 0:
        raise ValueError("interaction threshold must be positive")
    dt = 1.0 / trace.nominal_rate
    above = np.linalg.norm(trace.gyro, axis=1) > threshold
    out = []
    for first, last in _runs(above):
        start = float(trace.t[first])
        end = float(trace.t[last]) + dt
        if end - start >= sustain - 1e-9:
            out.append((start, end))
    return out


# -- full pipeline -----------------------------------------------------------------


@dataclass
class AlignmentSegment:
    start: float
    end: float
    gravity: GravityEstimate | None
    quaternion: np.ndarray | None

    @property
    def dropped(self) -> bool:
        return self.quaternion is None


@dataclass
class AlignmentReport:
    series: AngularSpeedSeries
    interactions: list[tuple[float, float]]
    segments: list[AlignmentSegment] = field(default_factory=list)
    omega_z: np.ndarray | None = None  # per-sample aligned z rate
    sample_mask: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)


def _segment_bounds(t0: float, t_end: float, interactions, gravity_window: float) -> list[tuple[float, float]]:
    cuts = []
    cursor = t0
    for a, b in interactions:
        if a > cursor:
            cuts.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < t_end:
        cuts.append((cursor, t_end))
    bounds = []
    for a, b in cuts:
        n = max(1, int(np.ceil((b - a) / gravity_window - 1e-9)))
        edges = np.linspace(a, b, n + 1)
        bounds.extend(zip(edges[:-1].tolist(), edges[1:].tolist()))
    return bounds


def align_samples(
    trace: ImuTrace,
    threshold: float = DEFAULT_INTERACTION_THRESHOLD,
    sustain: float = DEFAULT_INTERACTION_SUSTAIN,
    gravity_window: float = DEFAULT_GRAVITY_WINDOW,
) -> AlignmentReport:
    """Per-sample aligned z angular speed plus the segmentation that produced it.

    Segments are the stretches between interaction intervals, split into
    equal pieces no longer than ``gravity_window``. Each gets its own gravity
    estimate and quaternion. Samples inside interactions, and samples of
    segments whose gravity estimate fails, are masked.
    """
    interactions = detect_interaction(trace, threshold, sustain)
    dt = 1.0 / trace.nominal_rate
    t_end = float(trace.t[-1]) + dt
    omega_z = np.zeros(len(trace))
    mask = np.ones(len(trace), dtype=bool)
    segments = []
    notes = []
    for a, b in _segment_bounds(float(trace.t[0]), t_end, interactions, gravity_window):
        sel = (trace.t >= a) & (trace.t < b)
        if not np.any(sel):
            continue
        span = b - a
        gravity = None
        if span >= 1.0:
            gravity = GravityEstimate(trace.accel[sel].mean(axis=0), span, a)
        if gravity is None or not gravity.valid:
            why = "shorter than 1 s" if gravity is None else f"|g| = {gravity.norm:.2f} m/s^2"
            msg = f"segment [{a:.2f}, {b:.2f}) dropped: gravity estimate unusable ({why})"
            notes.append(msg)
            log.warning(msg)
            segments.append(AlignmentSegment(a, b, gravity, None))
            continue
        q = shortest_arc_quaternion(gravity.g_p)
        omega_z[sel] = _rotate_unchecked(q, trace.gyro[sel])[:, 2]
        mask[sel] = False
        segments.append(AlignmentSegment(a, b, gravity, q))
    series = aggregate_1hz(trace.t, omega_z, mask, trace_id=trace.trace_id)
    return AlignmentReport(series, interactions, segments, omega_z, mask, notes)


def align_trace(
    trace: ImuTrace,
    threshold: float = DEFAULT_INTERACTION_THRESHOLD,
    sustain: float = DEFAULT_INTERACTION_SUSTAIN,
    gravity_window: float = DEFAULT_GRAVITY_WINDOW,
) -> AngularSpeedSeries:
    """1 Hz vehicle yaw-rate series of a raw trace; see :func:`align_samples`."""
    return align_samples(trace, threshold, sustain, gravity_window).series
