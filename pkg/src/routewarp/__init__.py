"""Inertial-only route recognition with dynamic time warping."""
from .align import align_samples, align_trace, estimate_gravity, shortest_arc_quaternion
from .dtw import WarpResult, dtw, dtw_full, dtw_gps, dtw_open_both, dtw_open_ended
from .trace_io import AngularSpeedSeries, GpsPoint, ImuTrace, TraceFormatError

__version__ = "0.1.0"

__all__ = [
    "AngularSpeedSeries",
    "GpsPoint",
    "ImuTrace",
    "TraceFormatError",
    "WarpResult",
    "align_samples",
    "align_trace",
    "dtw",
    "dtw_full",
    "dtw_gps",
    "dtw_open_both",
    "dtw_open_ended",
    "estimate_gravity",
    "shortest_arc_quaternion",
]
