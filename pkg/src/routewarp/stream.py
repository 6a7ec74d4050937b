"""On-line route recognition over fixed-size batches of 1 Hz yaw rate.

Each batch is appended to the journey buffer and the whole buffer is matched
against every medoid of a :class:`RouteModel` by open-begin/open-end DTW
(a journey can join and leave a known route anywhere). The first batch whose
best distance falls under that cluster's match threshold ends the stream as
``matched``. After the fifth batch (20 minutes at the default batch size)
without a match the journey is declared a ``new_route``; against a model
with no routes that happens at the first batch.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .align import align_trace
from .dtw import dtw_open_both
from .mining import RouteModel
from .trace_io import AngularSpeedSeries, ImuTrace

BATCH_SECONDS = 240
BUDGET_SECONDS = 1200

PENDING = "pending"
MATCHED = "matched"
NEW_ROUTE = "new_route"
REPORT_HEADER = ("batch", "elapsed_s", "best_cluster", "best_distance", "verdict")


class StreamClosed(RuntimeError):
    """Raised when data arrives after the verdict was reached."""


@dataclass(frozen=True)
class StreamState:
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mask: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    batch_count: int = 0
    verdict: str = PENDING
    cluster: int | None = None
    distance: float | None = None
    batch_seconds: int = BATCH_SECONDS
    trace_id: str = ""

    @property
    def max_batches(self) -> int:
        return max(1, BUDGET_SECONDS // self.batch_seconds)

    @property
    def buffered(self) -> AngularSpeedSeries:
        return AngularSpeedSeries(self.values, self.trace_id, self.mask)

    @property
    def elapsed(self) -> int:
        return int(self.values.size)


@dataclass
class RecognitionEvent:
    at_batch: int
    elapsed_s: int
    verdict: str
    cluster: int | None
    distance: float | None
    distances: list[float]

    @property
    def best_cluster(self) -> int | None:
        return None if not self.distances else int(np.argmin(self.distances)) + 1

    @property
    def best_distance(self) -> float | None:
        return None if not self.distances else float(min(self.distances))


def medoid_distances(buffered: AngularSpeedSeries, model: RouteModel) -> list[float]:
    return [dtw_open_both(buffered, c.series).distance for c in model.clusters]


def ingest_batch(state: StreamState, batch, model: RouteModel, final: bool = False) -> tuple[StreamState, RecognitionEvent]:
    """Append one batch and re-match the whole buffer.

    ``final`` marks the end of the journey: a still-unmatched buffer is then
    declared a new route even before the batch budget is exhausted.
    """
    if state.verdict != PENDING:
        raise StreamClosed(f"stream already ended with verdict {state.verdict}")
    if isinstance(batch, AngularSpeedSeries):
        values, mask = batch.values, batch.mask
    else:
        values = np.asarray(batch, dtype=float).ravel()
        mask = np.zeros(values.size, dtype=bool)
    if values.size == 0:
        raise ValueError("batch is empty")
    if values.size > state.batch_seconds:
        raise ValueError(f"batch of {values.size} values exceeds {state.batch_seconds}")
    values = np.concatenate([state.values, values])
    mask = np.concatenate([state.mask, mask])
    count = state.batch_count + 1
    buffered = AngularSpeedSeries(values, state.trace_id, mask)
    distances = medoid_distances(buffered, model)
    verdict, cluster, distance = PENDING, None, None
    if distances:
        best = int(np.argmin(distances))
        if distances[best] < model.clusters[best].threshold_at(int(values.size)):
            verdict, cluster, distance = MATCHED, model.clusters[best].cluster, float(distances[best])
    # with no known routes there is nothing left to wait for
    if verdict == PENDING and (count >= state.max_batches or final or not distances):
        verdict = NEW_ROUTE
    new = replace(state, values=values, mask=mask, batch_count=count, verdict=verdict, cluster=cluster, distance=distance)
    return new, RecognitionEvent(count, int(values.size), verdict, cluster, distance, distances)


def replay(source: AngularSpeedSeries | ImuTrace, model: RouteModel, batch_seconds: int = BATCH_SECONDS) -> list[RecognitionEvent]:
    """Feed a journey to the recognizer batch by batch until a verdict.

    Raw traces are aligned first. A trailing partial batch is allowed, and the
    journey ending before the budget forces a verdict on its last batch.
    """
    if batch_seconds < 1:
        raise ValueError("batch_seconds must be positive")
    series = align_trace(source) if isinstance(source, ImuTrace) else source
    if len(series) == 0:
        raise ValueError("journey has no data")
    state = StreamState(batch_seconds=int(batch_seconds), trace_id=series.origin_trace_id)
    events = []
    n = len(series)
    for start in range(0, n, batch_seconds):
        stop = min(n, start + batch_seconds)
        chunk = AngularSpeedSeries(series.values[start:stop], series.origin_trace_id, series.mask[start:stop])
        state, event = ingest_batch(state, chunk, model, final=stop >= n)
        events.append(event)
        if state.verdict != PENDING:
            break
    return events


def write_report(path: str | os.PathLike, events: Sequence[RecognitionEvent]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for e in events:
            best = "" if e.best_cluster is None else e.best_cluster
            dist = "" if e.best_distance is None else f"{e.best_distance:.6f}"
            w.writerow([e.at_batch, e.elapsed_s, best, dist, e.verdict])
