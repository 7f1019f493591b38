"""Authenticated HTTP API plus a live push channel.

The API is a pure view over the store and the analytics functions: identical
store state and parameters produce identical responses. Real-time sources feed
the store through the runtime, which fans complete frames out to stream
subscribers per metric.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import threading
from dataclasses import dataclass
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import analytics, connectors
from .auth import KeyStore
from .connectors import AppConfig, SampleBatch, realtime_subscribe
from .model import (
    ModelError,
    Region,
    Series,
    format_timestamp,
    parse_timestamp,
    places_to_geojson,
    region_from_rings,
)
from .store import SampleStore, UnknownMetricError

logger = logging.getLogger(__name__)

_CLOSE = None  # queue sentinel: explicit disconnect
_UNAUTHORIZED_BODY = {"code": "unauthorized", "message": "missing or invalid API key"}


def api_error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


@dataclass
class Subscription:
    metric_id: str
    queue: "queue.Queue[Optional[bytes]]"
    closed: bool = False


class FrameHub:
    """Per-metric fan-out of serialized frame events.

    Subscriber queues are bounded; a subscriber that falls behind is
    disconnected explicitly (its queue is drained and a close sentinel is
    pushed) rather than silently skipping frames.
    """

    def __init__(self, buffer_size: int):
        self._buffer_size = buffer_size
        self._subs: dict[str, list[Subscription]] = {}
        self._last_t: dict[str, int] = {}
        self._lock = threading.Lock()

    def subscribe(self, metric_id: str) -> Subscription:
        sub = Subscription(metric_id=metric_id, queue=queue.Queue(self._buffer_size))
        with self._lock:
            self._subs.setdefault(metric_id, []).append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            subs = self._subs.get(sub.metric_id, [])
            if sub in subs:
                subs.remove(sub)

    def publish(self, metric_id: str, t: int, event: bytes) -> None:
        """Deliver one frame event; frames older than the newest published
        timestamp for the metric are dropped to keep per-subscriber order."""
        with self._lock:
            if t < self._last_t.get(metric_id, t):
                return
            self._last_t[metric_id] = t
            subs = list(self._subs.get(metric_id, []))
        for sub in subs:
            if sub.closed:
                continue
            try:
                sub.queue.put_nowait(event)
            except queue.Full:
                sub.closed = True
                try:
                    while True:
                        sub.queue.get_nowait()
                except queue.Empty:
                    pass
                sub.queue.put_nowait(_CLOSE)
                logger.warning("dropping slow subscriber on metric %s", metric_id)


class ServiceRuntime:
    """Store, keystore, hub, and ingestion threads behind the HTTP app."""

    def __init__(self, config: AppConfig, store: SampleStore):
        self.config = config
        self.store = store
        self.keystore = (
            KeyStore(config.service.auth_store) if config.service.auth_store else None
        )
        self.hub = FrameHub(config.service.stream_buffer)
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()
        # base metric -> every metric whose frames change when it arrives
        self._dependents: dict[str, list[str]] = {}
        for mdef in store.metrics():
            for dep in store.base_dependencies(mdef.id):
                self._dependents.setdefault(dep, []).append(mdef.id)

    @classmethod
    def from_config(cls, config: AppConfig) -> "ServiceRuntime":
        places = []
        for source in config.sources:
            if source.kind == connectors.KIND_PLACES:
                places.extend(connectors.places_fetch(source))
        store = SampleStore(places, config.metric_defs)
        data_path = config.service.data_path
        if data_path and os.path.exists(data_path):
            stats = store.snapshot_load(data_path)
            logger.info("loaded %d samples from %s", stats.sample_count, data_path)
        return cls(config, store)

    def ingest_batch(self, batch: SampleBatch) -> None:
        self.store.upsert(list(batch.samples))
        arrived = {s.metric_id for s in batch.samples}
        affected: list[str] = []
        for mid in arrived:
            for dependent in self._dependents.get(mid, ()):
                if dependent not in affected:
                    affected.append(dependent)
        for mid in affected:
            frame = analytics.frame_at(
                self.store, mid, batch.t, self.config.staleness_for(mid)
            )
            payload = {
                "t": format_timestamp(frame.t),
                "metric": mid,
                "values": frame.values,
            }
            event = b"event: frame\ndata: " + json.dumps(payload).encode() + b"\n\n"
            self.hub.publish(mid, batch.t, event)

    def _run_source(self, source) -> None:
        try:
            for batch in realtime_subscribe(source):
                if self._stop.is_set():
                    return
                self.ingest_batch(batch)
            logger.info("realtime source %s ended", source.name)
        except Exception:
            logger.exception("realtime source %s failed", source.name)

    def start_realtime(self) -> None:
        for source in self.config.sources:
            if source.kind != connectors.KIND_REALTIME:
                continue
            thread = threading.Thread(
                target=self._run_source,
                args=(source,),
                name=f"ingest-{source.name}",
                daemon=True,
            )
            thread.start()
            self._threads.append(thread)

    def stop(self) -> None:
        self._stop.set()


def _parse_instant(raw: str, name: str) -> int:
    try:
        return parse_timestamp(raw)
    except ModelError:
        raise api_error(400, "bad_param", f"{name} must be an ISO-8601 timestamp")


def _parse_region(raw: Optional[str]) -> Optional[Region]:
    """Region query parameter: a "lon,lat;lon,lat;..." ring, auto-closed."""
    if not raw:
        return None
    points = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise api_error(400, "bad_region", f"bad ring vertex {chunk!r}")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise api_error(400, "bad_region", f"bad ring vertex {chunk!r}")
    try:
        return region_from_rings([points])
    except ModelError as exc:
        raise api_error(400, "bad_region", str(exc))


def _series_points(series: Series) -> list[dict]:
    return [{"t": format_timestamp(t), "value": v} for t, v in series.points]


def create_app(runtime: ServiceRuntime) -> FastAPI:
    app = FastAPI(title="crowdlens", docs_url=None, redoc_url=None)
    store = runtime.store
    config = runtime.config

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        if exc.status_code == 401:
            # one indistinguishable body for every rejection cause
            return JSONResponse(status_code=401, content=_UNAUTHORIZED_BODY)
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return JSONResponse(
            status_code=400,
            content={"code": "bad_param", "message": f"invalid parameter {where}"},
        )

    def require_key(x_api_key: Optional[str] = Header(default=None)) -> str:
        if runtime.keystore is None:
            raise api_error(503, "no_auth_store", "service has no auth store configured")
        key_id = runtime.keystore.verify(x_api_key)
        if key_id is None:
            raise HTTPException(status_code=401, detail="unauthorized")
        logger.info("authorized key %s", key_id)
        return key_id

    def _checked_metric(metric: str) -> str:
        try:
            store.metric(metric)
        except UnknownMetricError:
            raise api_error(400, "unknown_metric", f"unknown metric {metric!r}")
        return metric

    def _window(raw_from: str, raw_to: str) -> tuple[int, int]:
        t_from = _parse_instant(raw_from, "from")
        t_to = _parse_instant(raw_to, "to")
        if t_from > t_to:
            raise api_error(400, "bad_range", "'from' must not be after 'to'")
        return t_from, t_to

    @app.get("/api/places")
    def get_places(key_id: str = Depends(require_key)):
        return places_to_geojson(store.places())

    @app.get("/api/metrics")
    def get_metrics(key_id: str = Depends(require_key)):
        payload = []
        for m in store.metrics():
            entry = {"id": m.id, "label": m.label, "unit": m.unit, "cap": m.cap, "kind": m.kind}
            if m.expression is not None:
                entry["expression"] = m.expression
            payload.append(entry)
        return {"metrics": payload}

    @app.get("/api/frames")
    def get_frames(
        metric: str,
        step: int,
        t_from: str = Query(alias="from"),
        t_to: str = Query(alias="to"),
        key_id: str = Depends(require_key),
    ):
        _checked_metric(metric)
        lo, hi = _window(t_from, t_to)
        if step <= 0:
            raise api_error(400, "bad_param", "step must be positive")
        count = (hi - lo) // step + 1
        if count > 5000:
            raise api_error(400, "too_many_frames", f"{count} frames requested, limit 5000")
        staleness = config.staleness_for(metric)
        frames = []
        for t in range(lo, hi + 1, step):
            frame = analytics.frame_at(store, metric, t, staleness)
            frames.append({"t": format_timestamp(t), "values": frame.values})
        return {"metric": metric, "staleness_s": staleness, "frames": frames}

    @app.get("/api/series")
    def get_series(
        metrics: str,
        t_from: str = Query(alias="from"),
        t_to: str = Query(alias="to"),
        region: Optional[str] = None,
        agg: str = "sum",
        key_id: str = Depends(require_key),
    ):
        metric_ids = [m for m in (s.strip() for s in metrics.split(",")) if m]
        if not metric_ids:
            raise api_error(400, "bad_param", "metrics is required")
        if len(metric_ids) > 2:
            raise api_error(400, "too_many_metrics", "at most two metrics per chart")
        if agg not in ("sum", "mean"):
            raise api_error(400, "bad_param", "agg must be sum or mean")
        lo, hi = _window(t_from, t_to)
        region_obj = _parse_region(region)
        payload = []
        for metric in metric_ids:
            _checked_metric(metric)
            series = analytics.sum_series(store, metric, lo, hi, region=region_obj, agg=agg)
            payload.append({"metric": metric, "points": _series_points(series)})
        return {"series": payload}

    @app.get("/api/timeline")
    def get_timeline(
        metric: str,
        t_from: str = Query(alias="from"),
        t_to: str = Query(alias="to"),
        region: Optional[str] = None,
        key_id: str = Depends(require_key),
    ):
        _checked_metric(metric)
        lo, hi = _window(t_from, t_to)
        series = analytics.sum_series(store, metric, lo, hi, region=_parse_region(region))
        try:
            stops = analytics.timeline_hues(series)
        except analytics.EmptySeriesError:
            stops = []
        return {
            "metric": metric,
            "points": _series_points(series),
            "hues": [
                {"t": format_timestamp(s.t), "hue": s.hue, "sum": s.sum} for s in stops
            ],
        }

    @app.get("/api/peak")
    def get_peak(
        metric: str,
        t_from: str = Query(alias="from"),
        t_to: str = Query(alias="to"),
        region: Optional[str] = None,
        key_id: str = Depends(require_key),
    ):
        _checked_metric(metric)
        lo, hi = _window(t_from, t_to)
        series = analytics.sum_series(store, metric, lo, hi, region=_parse_region(region))
        try:
            t, value = analytics.peak(series)
        except analytics.EmptySeriesError:
            raise api_error(400, "empty_series", "no non-missing points in range")
        return {"metric": metric, "t": format_timestamp(t), "value": value}

    @app.get("/api/stream")
    def get_stream(metric: str, key_id: str = Depends(require_key)):
        _checked_metric(metric)
        sub = runtime.hub.subscribe(metric)
        heartbeat = config.service.heartbeat_s

        def events():
            try:
                while True:
                    if runtime.keystore is not None and runtime.keystore.is_revoked(key_id):
                        return
                    try:
                        item = sub.queue.get(timeout=heartbeat)
                    except queue.Empty:
                        yield b"event: ping\ndata: {}\n\n"
                        continue
                    if item is _CLOSE:
                        return
                    yield item
            finally:
                runtime.hub.unsubscribe(sub)

        return StreamingResponse(events(), media_type="text/event-stream")

    ui_path = config.service.ui_path
    if ui_path and os.path.isdir(ui_path):
        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")

    return app
