"""Synthetic vehicle journeys with known ground truth.

A route is a planar polyline (usually a path on a :class:`GridNetwork`). A
vehicle drives it under a speed profile, slowing for proper turns. The
heading changes at each vertex over a finite turn duration. From the
resulting kinematics the generator renders what a phone placed in the car
would measure:

* gyro = ``[0, 0, yaw_rate]`` in the vehicle frame (x right, y forward, z up)
* accelerometer (specific force) = ``[-v * yaw_rate, dv/dt, g]``

Both are rotated into the phone frame by the scenario's orientation
quaternion, and white noise is added. Scripted phone interactions overwrite
the gyro with large bursts and leave the phone in a new orientation.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal

from .align import GRAVITY, _rotate_unchecked, quat_conjugate, random_unit_quaternion
from .maneuvers import GridNetwork, GridRoute, grid_route, overlap_length, polyline_turn_angles
from .trace_io import (
    AngularSpeedSeries,
    GpsPoint,
    ImuTrace,
    aggregate_1hz,
    write_gps_csv,
    write_imu_csv,
)

DEFAULT_GYRO_SIGMA = 0.005  # rad/s
DEFAULT_ACCEL_SIGMA = 0.05  # m/s^2
MIN_TURN_DURATION = 1.5  # s
YAW_RAMP = 0.5  # s, edge smoothing of each yaw pulse
GPS_PERIOD = 5.0  # s
LOWPASS_HZ = 42.0
#: heading changes at least this large make the driver slow down
MAJOR_TURN_DEG = 45.0

# reference point for converting local metres to latitude/longitude
ORIGIN_LAT = 52.2053
ORIGIN_LON = 0.1218
EARTH_RADIUS_M = 6_371_000.0


@dataclass
class SpeedProfile:
    """Cruise speed over time: ``segments`` of ``(duration_s, speed_mps)``
    joined by raised-cosine ramps of ``ramp`` seconds, plus full stops
    ``(t, duration)``. After the last segment the final speed holds.
    """

    segments: list[tuple[float, float]]
    stop_events: list[tuple[float, float]] = field(default_factory=list)
    ramp: float = 6.0

    def __post_init__(self):
        if not self.segments:
            raise ValueError("speed profile needs at least one segment")
        for d, v in self.segments:
            if not d > 0 or v < 0:
                raise ValueError("segment durations must be positive and speeds non-negative")
        for t, d in self.stop_events:
            if not d > 0 or t < 0:
                raise ValueError("stop events need t >= 0 and positive duration")

    @classmethod
    def constant(cls, speed: float) -> "SpeedProfile":
        return cls([(1.0, speed)], [], ramp=1e-6)

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        horizon: float = 3600.0,
        speed_range: tuple[float, float] = (8.0, 12.0),
        segment_range: tuple[float, float] = (30.0, 120.0),
        stop_rate: float = 1 / 240.0,
        stop_range: tuple[float, float] = (5.0, 40.0),
    ) -> "SpeedProfile":
        segs = []
        total = 0.0
        while total < horizon:
            d = float(rng.uniform(*segment_range))
            segs.append((d, float(rng.uniform(*speed_range))))
            total += d
        stops = []
        t = float(rng.exponential(1 / stop_rate))
        while t < horizon:
            d = float(rng.uniform(*stop_range))
            stops.append((t, d))
            t += d + float(rng.exponential(1 / stop_rate))
        return cls(segs, stops)

    def speed(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        bounds = np.cumsum([d for d, _ in self.segments])
        speeds = np.array([v for _, v in self.segments])
        v = np.full(t.shape, speeds[0])
        for k in range(1, len(speeds)):
            v += (speeds[k] - speeds[k - 1]) * _smooth_step((t - bounds[k - 1]) / self.ramp)
        for ts, d in self.stop_events:
            down = _smooth_step((t - ts) / self.ramp + 0.5)
            up = _smooth_step((t - ts - d) / self.ramp - 0.5)
            v *= 1.0 - down + up
        return np.maximum(v, 0.0)


def _smooth_step(u):
    """0 below -1/2, 1 above 1/2, raised-sine in between."""
    u = np.clip(u, -0.5, 0.5)
    return 0.5 + 0.5 * np.sin(np.pi * u)


@dataclass
class SynthScenario:
    route: np.ndarray  # (K, 2) polyline, metres
    profile: SpeedProfile
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    gyro_noise_sigma: float = DEFAULT_GYRO_SIGMA
    accel_noise_sigma: float = DEFAULT_ACCEL_SIGMA
    interactions: list[tuple[float, float]] = field(default_factory=list)
    seed: int = 0
    corner_setback: float = 20.0  # m from the vertex to where the curve starts
    turn_speed: float | Sequence[float] | None = None  # m/s at major turns; None: no slowing
    brake: float = 2.0  # m/s^2
    accelerate: float = 1.5  # m/s^2

    def __post_init__(self):
        self.route = np.asarray(self.route, dtype=float).reshape(-1, 2)
        self.orientation = np.asarray(self.orientation, dtype=float)
        n = np.linalg.norm(self.orientation)
        if abs(n - 1.0) > 1e-9:
            raise ValueError("orientation must be a unit quaternion")
        if self.gyro_noise_sigma < 0 or self.accel_noise_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")

    def to_dict(self) -> dict:
        d = {
            "route": self.route.tolist(),
            "profile": asdict(self.profile),
            "orientation": self.orientation.tolist(),
            "gyro_noise_sigma": self.gyro_noise_sigma,
            "accel_noise_sigma": self.accel_noise_sigma,
            "interactions": [list(x) for x in self.interactions],
            "seed": self.seed,
            "corner_setback": self.corner_setback,
            "turn_speed": None if self.turn_speed is None else np.atleast_1d(self.turn_speed).tolist(),
            "brake": self.brake,
            "accelerate": self.accelerate,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthScenario":
        d = dict(d)
        p = d.pop("profile")
        profile = SpeedProfile([tuple(s) for s in p["segments"]], [tuple(s) for s in p["stop_events"]], p["ramp"])
        d["interactions"] = [tuple(x) for x in d.get("interactions", [])]
        return cls(profile=profile, **d)


@dataclass
class SynthResult:
    trace: ImuTrace
    yaw_rate: np.ndarray  # per-sample truth, rad/s
    speed: np.ndarray  # per-sample, m/s
    arc_length: np.ndarray  # per-sample, m
    gps: list[GpsPoint]
    turn_times: np.ndarray
    turn_angles: np.ndarray  # degrees at each polyline vertex
    interactions: list[tuple[float, float]]

    @property
    def yaw_1hz(self) -> AngularSpeedSeries:
        return aggregate_1hz(self.trace.t, self.yaw_rate, trace_id=self.trace.trace_id)

    @property
    def duration(self) -> float:
        return self.trace.duration


def _drive(scenario: SynthScenario, vertex_s: np.ndarray, major: np.ndarray, length: float, dt: float):
    """Forward-integrate arc length; returns sample times, arc length and speed."""
    # speed cap along the route: braking into and accelerating out of major turns
    ds = 0.5
    grid = np.arange(0.0, length + 2 * ds, ds)
    cap = np.full(grid.shape, np.inf)
    if scenario.turn_speed is not None and major.any():
        ts = np.atleast_1d(np.asarray(scenario.turn_speed, dtype=float))
        v_turn = np.resize(ts, int(major.sum()))
        for sk, vk in zip(vertex_s[major], v_turn):
            ahead = sk - grid
            rate = np.where(ahead >= 0, scenario.brake, scenario.accelerate)
            cap = np.minimum(cap, np.sqrt(vk**2 + 2 * rate * np.abs(ahead)))
    cap = cap.tolist()
    horizon = 600.0
    t_grid = np.arange(0.0, horizon, dt)
    prof = scenario.profile.speed(t_grid).tolist()
    t_list = [0.0]
    s_list = [0.0]
    v_list = []
    s = 0.0
    i = 0
    max_steps = int(24 * 3600 / dt)
    while s < length:
        if i >= len(prof):
            if i > max_steps:
                raise RuntimeError("vehicle never reaches the end of the route; check the speed profile")
            horizon *= 2
            prof += scenario.profile.speed(np.arange(len(prof), int(horizon / dt)) * dt).tolist()
        v = min(prof[i], cap[int(s / ds)])
        v_list.append(v)
        s += v * dt
        i += 1
        t_list.append(i * dt)
        s_list.append(min(s, length))
    v_list.append(v_list[-1])
    return np.array(t_list), np.array(s_list), np.array(v_list)


def corner_arc_length(delta, setback: float) -> np.ndarray:
    """Length of the circular arc tangent to both legs ``setback`` metres from the vertex.

    The radius is ``setback / tan(|delta| / 2)``, so a right-angle corner has
    radius ``setback`` and shallow bends are long, gentle curves.
    """
    half = np.abs(np.asarray(delta, dtype=float)) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        arc = np.where(half > 0, setback * 2 * half / np.tan(half), 2 * setback)
    return np.where(np.isfinite(arc), arc, 0.0)


def synth_trace(scenario: SynthScenario, rate: float = 50.0, trace_id: str = "synthetic") -> SynthResult:
    """Render a scenario into a raw IMU trace plus ground truth."""
    if not 10.0 <= rate <= 100.0:
        raise ValueError("sample rate must lie in [10, 100] Hz")
    route = scenario.route
    if route.shape[0] < 2:
        raise ValueError("route polyline needs at least two points")
    seg = np.linalg.norm(np.diff(route, axis=0), axis=1)
    if np.any(seg <= 0):
        keep = np.concatenate([[True], seg > 0])
        route = route[keep]
        seg = seg[seg > 0]
        if route.shape[0] < 2:
            raise ValueError("route polyline is degenerate")
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    length = float(cum[-1])
    angles = polyline_turn_angles(route)
    vertex_s = cum[1:-1]
    major = np.abs(angles) >= MAJOR_TURN_DEG
    rng = np.random.default_rng(scenario.seed)

    # kinematics on a coarse grid, then resampled
    t_k, s_k, v_k = _drive(scenario, vertex_s, major, length, dt=0.1)
    duration = float(t_k[-1])
    n = int(math.floor(duration * rate)) + 1
    t = np.arange(n) / rate
    s = np.interp(t, t_k, s_k)
    v = np.interp(t, t_k, v_k)
    dvdt = np.gradient(v, t)

    # yaw: one smoothed rectangular pulse per vertex, integral = heading change
    t_vertex = np.interp(vertex_s, s_k, t_k)
    v_vertex = np.maximum(np.interp(t_vertex, t_k, v_k), 1.0)
    delta = np.radians(angles)
    tau = np.maximum(corner_arc_length(delta, scenario.corner_setback) / v_vertex, MIN_TURN_DURATION)
    yaw = np.zeros(n)
    for tk, dk, tau_k in zip(t_vertex, delta, tau):
        a, b = tk - tau_k / 2, tk + tau_k / 2
        yaw += dk / tau_k * (_smooth_step((t - a) / YAW_RAMP) - _smooth_step((t - b) / YAW_RAMP))

    gyro_v = np.zeros((n, 3))
    gyro_v[:, 2] = yaw
    accel_v = np.zeros((n, 3))
    accel_v[:, 0] = -v * yaw
    accel_v[:, 1] = dvdt
    accel_v[:, 2] = GRAVITY

    # phone frame, one orientation per stretch between interactions
    gyro = np.empty_like(gyro_v)
    accel = np.empty_like(accel_v)
    orientation = scenario.orientation
    cursor = 0
    interactions = sorted(scenario.interactions)
    inter_mask = np.zeros(n, dtype=bool)
    for ti, di in interactions + [(math.inf, 0.0)]:
        stop = n if math.isinf(ti) else int(np.searchsorted(t, ti))
        sl = slice(cursor, stop)
        inv = quat_conjugate(orientation)
        gyro[sl] = _rotate_unchecked(inv, gyro_v[sl])
        accel[sl] = _rotate_unchecked(inv, accel_v[sl])
        if math.isinf(ti):
            break
        end = min(n, int(np.searchsorted(t, ti + di)))
        burst = slice(stop, end)
        m = end - stop
        if m:
            phase = rng.uniform(0, 2 * np.pi, size=3)
            tt = t[burst]
            direction = np.stack([np.sin(1.3 * tt + phase[0]), np.cos(0.9 * tt + phase[1]), np.sin(1.7 * tt + phase[2])], axis=1)
            direction += 0.1
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            magnitude = 3.5 + 1.5 * np.sin(2.1 * tt + phase[0]) ** 2
            gyro[burst] = direction * magnitude[:, None]
            accel[burst] = _rotate_unchecked(inv, accel_v[burst]) + rng.normal(0, 2.0, size=(m, 3))
            inter_mask[burst] = True
        orientation = random_unit_quaternion(rng)
        cursor = end

    gyro += rng.normal(0.0, scenario.gyro_noise_sigma, size=gyro.shape)
    accel += rng.normal(0.0, scenario.accel_noise_sigma, size=accel.shape)
    if rate > 2 * LOWPASS_HZ:
        sos = signal.butter(2, LOWPASS_HZ, fs=rate, output="sos")
        gyro = signal.sosfiltfilt(sos, gyro, axis=0)
        accel = signal.sosfiltfilt(sos, accel, axis=0)

    # noiseless GPS at a fixed period
    t_gps = np.arange(0.0, duration + 1e-9, GPS_PERIOD)
    s_gps = np.interp(t_gps, t_k, s_k)
    xy = np.stack([np.interp(s_gps, cum, route[:, 0]), np.interp(s_gps, cum, route[:, 1])], axis=1)
    lat, lon = xy_to_latlon(xy)
    gps = [GpsPoint(float(a), float(b), float(c)) for a, b, c in zip(t_gps, lat, lon)]

    trace = ImuTrace(t, accel, gyro, nominal_rate=rate, trace_id=trace_id)
    return SynthResult(trace, yaw, v, s, gps, t_vertex, angles, [(float(a), float(b)) for a, b in interactions])


def xy_to_latlon(xy: np.ndarray, lat0: float = ORIGIN_LAT, lon0: float = ORIGIN_LON):
    xy = np.asarray(xy, dtype=float)
    lat = lat0 + np.degrees(xy[..., 1] / EARTH_RADIUS_M)
    lon = lon0 + np.degrees(xy[..., 0] / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lon


# -- routes and corpora --------------------------------------------------------------


def default_network(seed: int = 0) -> GridNetwork:
    return GridNetwork(30, 30, spacing=150.0, jitter=40.0, seed=seed)


def random_route(network: GridNetwork, rng: np.random.Generator, min_hops: int | None = None) -> GridRoute:
    """Shortest-path route between two intersections at least ``min_hops`` apart."""
    if min_hops is None:
        min_hops = int(0.75 * (network.rows + network.cols - 2))
    min_hops = min(min_hops, network.rows + network.cols - 2)
    while True:
        a = (int(rng.integers(network.rows)), int(rng.integers(network.cols)))
        b = (int(rng.integers(network.rows)), int(rng.integers(network.cols)))
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) >= min_hops:
            return grid_route(network, a, b, rng)


def novel_route(
    network: GridNetwork,
    known: Sequence[GridRoute],
    rng: np.random.Generator,
    max_overlap: float = 0.15,
    min_hops: int | None = None,
    attempts: int = 1000,
) -> GridRoute:
    """Random route sharing at most ``max_overlap`` of its length with each known route."""
    for _ in range(attempts):
        r = random_route(network, rng, min_hops)
        if all(overlap_length(r, k) <= max_overlap * r.length for k in known):
            return r
    raise RuntimeError("no sufficiently novel route found; relax max_overlap")


def apply_detour(route: GridRoute, fraction: float, rng: np.random.Generator | None = None, start: int | None = None) -> GridRoute:
    """Replace ``fraction`` of the route's edges with the shortest way around them.

    A contiguous stretch of ``round(fraction * edges)`` edges is cut out and
    its end points are rejoined by the shortest lattice path that uses none
    of the route's own edges (a parallel street for straight stretches).
    """
    if fraction <= 0:
        return route
    if fraction > 1:
        raise ValueError("detour fraction must be at most 1")
    import networkx as nx

    n_edges = len(route.nodes) - 1
    k = max(1, int(round(fraction * n_edges)))
    k = min(k, n_edges - 2)
    if k < 1:
        return route
    if start is None:
        r = rng if rng is not None else np.random.default_rng(0)
        start = int(r.integers(1, n_edges - k))
    start = int(np.clip(start, 1, n_edges - k - 1))
    g = route.network.graph()
    g.remove_edges_from(zip(route.nodes, route.nodes[1:]))
    a, b = route.nodes[start], route.nodes[start + k]
    try:
        around = nx.shortest_path(g, a, b)
    except nx.NetworkXNoPath:
        return route
    nodes = route.nodes[:start] + around + route.nodes[start + k + 1 :]
    return GridRoute(route.network, nodes)


def random_scenario(
    polyline: np.ndarray,
    rng: np.random.Generator,
    orientation: np.ndarray | None = None,
    gyro_noise_sigma: float = DEFAULT_GYRO_SIGMA,
    accel_noise_sigma: float = DEFAULT_ACCEL_SIGMA,
    interactions: Sequence[tuple[float, float]] = (),
    turn_speed_range: tuple[float, float] = (5.0, 6.5),
    speed_range: tuple[float, float] = (8.0, 12.0),
) -> SynthScenario:
    """A traversal with random speeds, turn speeds and (unless given) orientation."""
    n_turns = max(1, int(np.sum(np.abs(polyline_turn_angles(polyline)) >= MAJOR_TURN_DEG)))
    return SynthScenario(
        route=polyline,
        profile=SpeedProfile.random(rng, speed_range=speed_range),
        orientation=random_unit_quaternion(rng) if orientation is None else orientation,
        gyro_noise_sigma=gyro_noise_sigma,
        accel_noise_sigma=accel_noise_sigma,
        interactions=list(interactions),
        seed=int(rng.integers(2**31)),
        turn_speed=rng.uniform(*turn_speed_range, size=n_turns).tolist(),
    )


def reroute(scenario: SynthScenario, polyline: np.ndarray, rng: np.random.Generator) -> SynthScenario:
    """Same driver and phone on a different polyline.

    Turn speeds stay attached to the intersections they were drawn for; turns
    that only exist on the new polyline get fresh draws from the old range.
    """
    new = SynthScenario.from_dict(scenario.to_dict())
    new.route = np.asarray(polyline, dtype=float).reshape(-1, 2)
    if scenario.turn_speed is None:
        return new
    old_speeds = np.atleast_1d(np.asarray(scenario.turn_speed, dtype=float))
    old_major = np.flatnonzero(np.abs(polyline_turn_angles(scenario.route)) >= MAJOR_TURN_DEG) + 1
    lookup = {tuple(np.round(scenario.route[v], 6)): old_speeds[i % old_speeds.size] for i, v in enumerate(old_major)}
    lo, hi = float(old_speeds.min()), float(old_speeds.max())
    speeds = []
    for v in np.flatnonzero(np.abs(polyline_turn_angles(new.route)) >= MAJOR_TURN_DEG) + 1:
        key = tuple(np.round(new.route[v], 6))
        speeds.append(float(lookup[key]) if key in lookup else float(rng.uniform(lo, hi)))
    new.turn_speed = speeds if speeds else None
    return new


@dataclass
class Corpus:
    network: GridNetwork
    routes: list[GridRoute]
    results: list[SynthResult]
    scenarios: list[SynthScenario]
    labels: list[int]  # 1-based route id per traversal
    ids: list[str]
    driven: list[GridRoute]  # route actually driven, detours included

    @property
    def traces(self) -> list[ImuTrace]:
        return [r.trace for r in self.results]

    @property
    def gps(self) -> list[list[GpsPoint]]:
        return [r.gps for r in self.results]

    def write(self, directory: str | os.PathLike, extra: dict | None = None) -> None:
        """``traces/<id>.csv``, ``gps/<id>.csv``, ``labels.csv`` and ``scenario.json``."""
        root = Path(directory)
        (root / "traces").mkdir(parents=True, exist_ok=True)
        (root / "gps").mkdir(parents=True, exist_ok=True)
        for tid, res in zip(self.ids, self.results):
            write_imu_csv(root / "traces" / f"{tid}.csv", res.trace)
            write_gps_csv(root / "gps" / f"{tid}.csv", res.gps)
        with open(root / "labels.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trace_id", "route_id"])
            for tid, lab in zip(self.ids, self.labels):
                w.writerow([tid, lab])
        doc = {
            "network": asdict(self.network),
            "routes": [[list(n) for n in r.nodes] for r in self.routes],
            "traversals": [
                {"trace_id": tid, "route_id": lab, "nodes": [list(n) for n in d.nodes], "scenario": sc.to_dict()}
                for tid, lab, d, sc in zip(self.ids, self.labels, self.driven, self.scenarios)
            ],
        }
        if extra:
            doc.update(extra)
        with open(root / "scenario.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)


def synth_corpus(
    routes: int,
    traversals: int,
    network: GridNetwork | None = None,
    seed: int = 0,
    rate: float = 25.0,
    detour_fraction: float = 0.0,
    detour_probability: float = 0.0,
    gyro_noise_sigma: float = DEFAULT_GYRO_SIGMA,
    accel_noise_sigma: float = DEFAULT_ACCEL_SIGMA,
    min_hops: int | None = None,
    route_list: Sequence[GridRoute] | None = None,
    turn_speed_range: tuple[float, float] = (5.0, 6.5),
    speed_range: tuple[float, float] = (8.0, 12.0),
) -> Corpus:
    """``routes x traversals`` labelled journeys with synchronized GPS.

    Every traversal draws its own speed profile, turn speeds and phone
    orientation. With ``detour_probability > 0`` a traversal replaces a
    random ``fraction <= detour_fraction`` of its edges by a detour.
    """
    if routes < 1 or traversals < 1:
        raise ValueError("need at least one route and one traversal")
    network = default_network(seed) if network is None else network
    rng = np.random.default_rng(seed)
    chosen = list(route_list) if route_list is not None else [random_route(network, rng, min_hops) for _ in range(routes)]
    results, scenarios, labels, ids, driven = [], [], [], [], []
    for r_idx, route in enumerate(chosen):
        for k in range(traversals):
            path = route
            if detour_fraction > 0 and rng.random() < detour_probability:
                path = apply_detour(route, float(rng.uniform(0.0, detour_fraction)), rng)
            sc = random_scenario(
                path.polyline,
                rng,
                gyro_noise_sigma=gyro_noise_sigma,
                accel_noise_sigma=accel_noise_sigma,
                turn_speed_range=turn_speed_range,
                speed_range=speed_range,
            )
            tid = f"r{r_idx + 1:02d}_t{k + 1:02d}"
            results.append(synth_trace(sc, rate, trace_id=tid))
            scenarios.append(sc)
            labels.append(r_idx + 1)
            ids.append(tid)
            driven.append(path)
    return Corpus(network, chosen, results, scenarios, labels, ids, driven)


# -- driving-detection corpus -----------------------------------------------------


def walking_trace(rng: np.random.Generator, duration: float, rate: float = 10.0, trace_id: str = "walk") -> ImuTrace:
    """Accelerometer of a phone carried while walking: gravity plus step impacts.

    Cadence, step amplitude and the phone orientation are drawn per trace;
    gyro carries gentle sway. Per-axis variances land around 2-3 (m/s^2)^2.
    """
    n = int(duration * rate)
    t = np.arange(n) / rate
    cadence = rng.uniform(1.5, 2.1)
    amp = rng.uniform(2.5, 3.5)
    phase = rng.uniform(0, 2 * np.pi)
    vertical = amp * np.sin(2 * np.pi * cadence * t + phase) + 0.4 * amp * np.sin(4 * np.pi * cadence * t)
    forward = 0.7 * amp * np.sin(2 * np.pi * cadence * t + phase + 1.0)
    lateral = 0.6 * amp * np.sin(np.pi * cadence * t + phase)
    f = np.stack([lateral, forward, GRAVITY + vertical], axis=1)
    f += rng.normal(0.0, 0.4, size=f.shape)
    q = random_unit_quaternion(rng)
    accel = _rotate_unchecked(quat_conjugate(q), f)
    gyro = rng.normal(0.0, 0.3, size=(n, 3))
    return ImuTrace(t, accel, gyro, nominal_rate=rate, trace_id=trace_id)


def driving_trace(
    rng: np.random.Generator,
    duration: float,
    rate: float = 10.0,
    network: GridNetwork | None = None,
    vibration_sigma: tuple[float, float] = (0.05, 0.6),
    trace_id: str = "drive",
) -> ImuTrace:
    """A ``duration``-second excerpt of a synthetic journey with road vibration added."""
    network = default_network(int(rng.integers(1000))) if network is None else network
    route = random_route(network, rng)
    sc = random_scenario(route.polyline, rng)
    res = synth_trace(sc, max(rate, 10.0), trace_id=trace_id)
    tr = res.trace
    n = min(len(tr), int(duration * rate))
    vib = rng.uniform(*vibration_sigma)
    accel = tr.accel[:n] + rng.normal(0.0, vib, size=(n, 3))
    return ImuTrace(tr.t[:n], accel, tr.gyro[:n], nominal_rate=tr.nominal_rate, trace_id=trace_id)


# -- comparison scenario sets -----------------------------------------------------

SCENARIO_KINDS = ("orientation", "noise", "detour")
DETOUR_FRACTIONS = (0.05, 0.10, 0.20)


@dataclass
class ScenarioCase:
    name: str
    trace: ImuTrace
    reference: ImuTrace  # another traversal of the same route
    control: ImuTrace  # a traversal of a different route


def scenario_set(kind: str, count: int = 10, seed: int = 0, rate: float = 25.0, network: GridNetwork | None = None) -> list[ScenarioCase]:
    """Traversals of one route under varying conditions, with a fixed reference and control.

    * ``orientation``: ``count`` random phone orientations.
    * ``noise``: ``count`` device noise levels, gyro sigma 0.002-0.02 rad/s.
    * ``detour``: detours replacing 5, 10 and 20 % of the route's edges.
    """
    if kind not in SCENARIO_KINDS:
        raise ValueError(f"unknown scenario set {kind!r}; expected one of {SCENARIO_KINDS}")
    if count < 1:
        raise ValueError("count must be positive")
    network = default_network(seed) if network is None else network
    rng = np.random.default_rng(seed)
    route = random_route(network, rng)
    other = random_route(network, rng)
    reference = synth_trace(random_scenario(route.polyline, rng), rate, trace_id="reference")
    control = synth_trace(random_scenario(other.polyline, rng), rate, trace_id="control")
    cases = []
    if kind == "orientation":
        for k in range(count):
            sc = random_scenario(route.polyline, rng)
            cases.append(ScenarioCase(f"orientation_{k + 1:02d}", synth_trace(sc, rate, f"orientation_{k + 1:02d}").trace, reference.trace, control.trace))
    elif kind == "noise":
        for sigma in np.geomspace(0.002, 0.02, count):
            sc = random_scenario(route.polyline, rng, gyro_noise_sigma=float(sigma), accel_noise_sigma=float(10 * sigma))
            name = f"gyro_sigma_{sigma:.4f}"
            cases.append(ScenarioCase(name, synth_trace(sc, rate, name).trace, reference.trace, control.trace))
    else:
        base = random_scenario(route.polyline, rng)
        n_edges = len(route.nodes) - 1
        start = int(rng.integers(1, max(2, n_edges - int(round(max(DETOUR_FRACTIONS) * n_edges)) - 1)))
        for f in DETOUR_FRACTIONS:
            driven = apply_detour(route, f, start=start)
            sc = reroute(base, driven.polyline, rng)
            name = f"detour_{int(round(100 * f)):02d}pct"
            cases.append(ScenarioCase(name, synth_trace(sc, rate, name).trace, reference.trace, control.trace))
    return cases
