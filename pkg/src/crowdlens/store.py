"""In-process time-series store.

Samples live in per-(place, metric) columns sorted by time, so range lookups
and latest-at-or-before probes are binary searches instead of scans. The
store holds base metrics only; derived metrics are computed on read, which
avoids invalidation cascades when expressions change in configuration.

Writers are serialized; a reader sees either all or none of an upsert batch.
"""

from __future__ import annotations

import csv
import math
import threading
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

from . import expr
from .model import (
    MetricDef,
    ModelError,
    Place,
    Sample,
    Timestamp,
    format_timestamp,
    parse_timestamp,
)

SNAPSHOT_HEADER = ["place_id", "timestamp", "metric_id", "value"]


class StoreError(ValueError):
    pass


class IntegrityError(StoreError):
    """A sample references an unknown place or a non-storable metric."""


class UnknownMetricError(StoreError):
    def __init__(self, metric_id: str):
        self.metric_id = metric_id
        super().__init__(f"unknown metric {metric_id!r}")


class SnapshotFormatError(StoreError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class StoreStats:
    sample_count: int
    place_count: int
    metric_count: int
    t_min: Optional[Timestamp]
    t_max: Optional[Timestamp]


class SampleStore:
    """Columnar sample storage bound to a fixed place/metric catalog."""

    def __init__(self, places: Iterable[Place], metric_defs: Iterable[MetricDef]):
        self._places: dict[str, Place] = {}
        for place in places:
            if place.id in self._places:
                raise StoreError(f"duplicate place id {place.id!r}")
            self._places[place.id] = place
        self._metrics: dict[str, MetricDef] = {}
        for mdef in metric_defs:
            if mdef.id in self._metrics:
                raise StoreError(f"duplicate metric id {mdef.id!r}")
            self._metrics[mdef.id] = mdef
        self.eval_order = expr.resolve_metric_graph(list(self._metrics.values()))
        self._base_ids = {m.id for m in self._metrics.values() if not m.is_derived}
        self._parsed: dict[str, expr.Expr] = {
            m.id: expr.parse_expression(m.expression)
            for m in self._metrics.values()
            if m.expression is not None
        }
        # (place_id, metric_id) -> parallel (timestamps, values), time-sorted
        self._series: dict[tuple[str, str], tuple[list[int], list[float]]] = {}
        self._metric_places: dict[str, dict[str, None]] = {}
        self._ts_counts: dict[str, Counter] = {}
        self._ts_sorted: dict[str, list[int]] = {}
        self._sample_total = 0
        self._t_min: Optional[int] = None
        self._t_max: Optional[int] = None
        self._lock = threading.RLock()

    # -- catalog ---------------------------------------------------------

    def places(self) -> list[Place]:
        return list(self._places.values())

    def place_ids(self) -> list[str]:
        return list(self._places)

    def place(self, place_id: str) -> Place:
        return self._places[place_id]

    def metrics(self) -> list[MetricDef]:
        return list(self._metrics.values())

    def metric(self, metric_id: str) -> MetricDef:
        try:
            return self._metrics[metric_id]
        except KeyError:
            raise UnknownMetricError(metric_id) from None

    def parsed_expression(self, metric_id: str) -> expr.Expr:
        return self._parsed[metric_id]

    def base_dependencies(self, metric_id: str) -> set[str]:
        self.metric(metric_id)
        return expr.dependency_closure(self._metrics, metric_id)

    # -- writes ----------------------------------------------------------

    def upsert(self, samples: Iterable[Sample]) -> int:
        """Insert or replace samples keyed by (place, t, metric).

        The whole batch is validated first and applied atomically; the first
        offending sample rejects the batch. Returns inserted + replaced count.
        """
        places = self._places
        metrics = self._metrics
        base_ids = self._base_ids
        isfinite = math.isfinite
        staged: dict[tuple[str, str], tuple[list[int], list[float]]] = {}
        count = 0
        for s in samples:
            pid = s.place_id
            mid = s.metric_id
            if pid not in places:
                raise IntegrityError(f"sample references unknown place {pid!r}")
            if mid not in metrics:
                raise IntegrityError(f"sample references unknown metric {mid!r}")
            if mid not in base_ids:
                raise IntegrityError(
                    f"metric {mid!r} is derived; only base metrics are storable"
                )
            if not isfinite(s.value):
                raise IntegrityError(f"non-finite value for ({pid!r}, {mid!r})")
            bucket = staged.get((pid, mid))
            if bucket is None:
                bucket = staged[(pid, mid)] = ([], [])
            bucket[0].append(s.t)
            bucket[1].append(float(s.value))
            count += 1
        if not staged:
            return 0
        with self._lock:
            for (pid, mid), (ts, vs) in staged.items():
                self._merge(pid, mid, ts, vs)
            for mid in {mid for _, mid in staged}:
                self._ts_sorted[mid] = sorted(self._ts_counts[mid])
        return count

    def _merge(self, pid: str, mid: str, ts: list[int], vs: list[float]) -> None:
        key = (pid, mid)
        existing = self._series.get(key)
        if existing is None:
            existing = self._series[key] = ([], [])
            self._metric_places.setdefault(mid, {})[pid] = None
        counts = self._ts_counts.setdefault(mid, Counter())
        ets, evs = existing
        # bulk fast path: strictly ascending batch appended after existing tail
        if (
            (not ets or ts[0] > ets[-1])
            and ts == sorted(ts)
            and len(set(ts)) == len(ts)
        ):
            ets.extend(ts)
            evs.extend(vs)
            counts.update(ts)
            self._sample_total += len(ts)
            self._track_bounds(ts[0], ts[-1])
            return
        for t, v in zip(ts, vs):
            i = bisect_left(ets, t)
            if i < len(ets) and ets[i] == t:
                evs[i] = v
            else:
                ets.insert(i, t)
                evs.insert(i, v)
                counts[t] += 1
                self._sample_total += 1
            self._track_bounds(t, t)

    def _track_bounds(self, lo: int, hi: int) -> None:
        if self._t_min is None or lo < self._t_min:
            self._t_min = lo
        if self._t_max is None or hi > self._t_max:
            self._t_max = hi

    # -- reads -----------------------------------------------------------

    def query_range(
        self,
        metric_id: str,
        t_from: Timestamp,
        t_to: Timestamp,
        place_filter: Optional[set[str]] = None,
    ) -> list[Sample]:
        """All samples of the metric in [t_from, t_to], sorted by (t, place_id)."""
        self.metric(metric_id)
        if t_from > t_to:
            raise StoreError("t_from must not exceed t_to")
        out: list[Sample] = []
        with self._lock:
            for pid in self._metric_places.get(metric_id, ()):
                if place_filter is not None and pid not in place_filter:
                    continue
                ts, vs = self._series[(pid, metric_id)]
                lo = bisect_left(ts, t_from)
                hi = bisect_right(ts, t_to)
                for i in range(lo, hi):
                    out.append(Sample(pid, ts[i], metric_id, vs[i]))
        out.sort(key=lambda s: (s.t, s.place_id))
        return out

    def series_slice(
        self, place_id: str, metric_id: str, t_from: Timestamp, t_to: Timestamp
    ) -> tuple[list[int], list[float]]:
        """Copy of the (timestamps, values) columns inside [t_from, t_to]."""
        with self._lock:
            cols = self._series.get((place_id, metric_id))
            if cols is None:
                return [], []
            ts, vs = cols
            lo = bisect_left(ts, t_from)
            hi = bisect_right(ts, t_to)
            return ts[lo:hi], vs[lo:hi]

    def value_at(self, place_id: str, metric_id: str, t: Timestamp) -> Optional[float]:
        cols = self._series.get((place_id, metric_id))
        if cols is None:
            return None
        ts, vs = cols
        i = bisect_left(ts, t)
        if i < len(ts) and ts[i] == t:
            return vs[i]
        return None

    def latest_at_or_before(
        self, place_id: str, metric_id: str, t: Timestamp, staleness: int
    ) -> Optional[float]:
        """Newest value at or before t, unless older than the staleness window."""
        cols = self._series.get((place_id, metric_id))
        if cols is None:
            return None
        ts, vs = cols
        i = bisect_right(ts, t) - 1
        if i >= 0 and t - ts[i] <= staleness:
            return vs[i]
        return None

    def distinct_timestamps(
        self, metric_id: str, t_from: Timestamp, t_to: Timestamp
    ) -> list[int]:
        """Sorted distinct sample timestamps of the metric inside the range."""
        self.metric(metric_id)
        with self._lock:
            ordered = self._ts_sorted.get(metric_id, [])
            lo = bisect_left(ordered, t_from)
            hi = bisect_right(ordered, t_to)
            return ordered[lo:hi]

    def stats(self) -> StoreStats:
        with self._lock:
            stored_places = {pid for (pid, mid), (ts, _) in self._series.items() if ts}
            stored_metrics = {mid for mid, counts in self._ts_counts.items() if counts}
            return StoreStats(
                sample_count=self._sample_total,
                place_count=len(stored_places),
                metric_count=len(stored_metrics),
                t_min=self._t_min,
                t_max=self._t_max,
            )

    # -- snapshots ---------------------------------------------------------

    def snapshot_save(self, path: str) -> StoreStats:
        """Write every sample as CSV, sorted by (place_id, timestamp, metric_id)."""
        with self._lock:
            rows: list[tuple[str, int, str, float]] = []
            for (pid, mid), (ts, vs) in self._series.items():
                for i in range(len(ts)):
                    rows.append((pid, ts[i], mid, vs[i]))
        rows.sort()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SNAPSHOT_HEADER)
            for pid, t, mid, v in rows:
                writer.writerow([pid, format_timestamp(t), mid, repr(v)])
        return self.stats()

    def snapshot_load(self, path: str) -> StoreStats:
        """Merge a snapshot CSV into the store; malformed rows name their line."""
        samples = list(read_sample_csv(path))
        self.upsert(samples)
        return self.stats()


def read_sample_csv(path: str) -> Iterable[Sample]:
    """Parse the sample CSV schema, reporting the line number of any bad row."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SnapshotFormatError(1, "missing header") from None
        if header != SNAPSHOT_HEADER:
            raise SnapshotFormatError(1, f"unexpected header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SnapshotFormatError(line_no, f"expected 4 fields, got {len(row)}")
            pid, ts_text, mid, value_text = row
            try:
                t = parse_timestamp(ts_text)
            except ModelError as exc:
                raise SnapshotFormatError(line_no, str(exc)) from None
            try:
                value = float(value_text)
            except ValueError:
                raise SnapshotFormatError(line_no, f"bad value {value_text!r}") from None
            if not math.isfinite(value):
                raise SnapshotFormatError(line_no, f"non-finite value {value_text!r}")
            yield Sample(pid, t, mid, value)


def write_sample_csv(path: str, samples: Iterable[Sample]) -> int:
    """Write samples in the snapshot CSV schema, in the order given."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SNAPSHOT_HEADER)
        for s in samples:
            writer.writerow([s.place_id, format_timestamp(s.t), s.metric_id, repr(s.value)])
            n += 1
    return n
