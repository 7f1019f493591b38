"""Built-in drivers: csv-file, http-json, replay, synthetic, geojson-file.

The csv-file driver stands in for a time-series database, replay/synthetic
for an event stream, and http-json for an open-data portal, so every scenario
runs offline and deterministically.
"""

from __future__ import annotations

import json
import logging
import math
import random
import time
import zlib
from typing import Iterator, Optional

import requests

from ..model import (
    Place,
    Sample,
    Timestamp,
    format_timestamp,
    parse_timestamp,
    validate_places,
)
from ..store import read_sample_csv
from .base import (
    KIND_HISTORICAL,
    KIND_PLACES,
    KIND_REALTIME,
    Connector,
    ConnectorError,
    SampleBatch,
    SchemaError,
    redact_params,
    register,
)

logger = logging.getLogger(__name__)


def _group_batches(samples: list[Sample]) -> list[SampleBatch]:
    by_t: dict[int, list[Sample]] = {}
    for s in samples:
        by_t.setdefault(s.t, []).append(s)
    return [SampleBatch(t=t, samples=tuple(by_t[t])) for t in sorted(by_t)]


@register("csv-file")
class CsvFileConnector(Connector):
    """Historical samples from a CSV file in the store snapshot schema."""

    KINDS = frozenset({KIND_HISTORICAL})
    REQUIRED_PARAMS = ("path",)

    def load_history(self, metric_ids, t_from, t_to):
        path = self.source.params["path"]
        wanted = set(metric_ids)
        try:
            return [
                s
                for s in read_sample_csv(path)
                if s.metric_id in wanted and t_from <= s.t <= t_to
            ]
        except OSError as exc:
            raise ConnectorError(f"cannot read {path!r}: {exc.strerror}") from exc


@register("http-json")
class HttpJsonConnector(Connector):
    """Paged JSON records over GET, with configured field-name mapping.

    Requests carry ``from``/``to``/``page`` query parameters; paging stops at
    the first empty page. For the places kind, the URL must return a GeoJSON
    FeatureCollection.
    """

    KINDS = frozenset({KIND_HISTORICAL, KIND_PLACES})
    REQUIRED_PARAMS = ("url",)
    MAX_PAGES = 10_000

    def _get(self, params: Optional[dict] = None):
        url = self.source.params["url"]
        headers = {}
        token = self.source.param("bearer_token")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            response = requests.get(url, params=params, headers=headers, timeout=30)
            response.raise_for_status()
            return response.json()
        except requests.RequestException as exc:
            safe = redact_params(self.source.params)
            raise ConnectorError(
                f"source {self.source.name!r} request failed ({safe.get('url')}): "
                f"{exc.__class__.__name__}"
            ) from exc

    def _field(self, record: dict, field_name: str):
        if field_name not in record:
            raise SchemaError(
                f"source {self.source.name!r}: record is missing field {field_name!r}"
            )
        return record[field_name]

    def load_history(self, metric_ids, t_from, t_to):
        src = self.source
        field_place = src.param("field_place", "place_id")
        field_time = src.param("field_time", "timestamp")
        field_value = src.param("field_value", "value")
        field_metric = src.param("field_metric")
        if field_metric is None and len(src.metrics) != 1:
            raise ConnectorError(
                f"source {src.name!r} needs field_metric or exactly one declared metric"
            )
        wanted = set(metric_ids)
        out: list[Sample] = []
        for page in range(1, self.MAX_PAGES + 1):
            records = self._get(
                {
                    "from": format_timestamp(t_from),
                    "to": format_timestamp(t_to),
                    "page": page,
                }
            )
            if not isinstance(records, list):
                raise SchemaError(f"source {src.name!r}: expected a JSON array page")
            if not records:
                break
            for record in records:
                metric_id = (
                    str(self._field(record, field_metric))
                    if field_metric
                    else src.metrics[0]
                )
                if metric_id not in wanted:
                    continue
                t = parse_timestamp(str(self._field(record, field_time)))
                if not t_from <= t <= t_to:
                    continue
                value = float(self._field(record, field_value))
                out.append(Sample(str(self._field(record, field_place)), t, metric_id, value))
        return out

    def fetch_places(self):
        return validate_places(self._get())


@register("geojson-file")
class GeoJsonFileConnector(Connector):
    """Places catalog from a GeoJSON FeatureCollection file."""

    KINDS = frozenset({KIND_PLACES})
    REQUIRED_PARAMS = ("path",)

    def fetch_places(self):
        path = self.source.params["path"]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConnectorError(f"cannot read {path!r}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConnectorError(f"{path!r} is not valid JSON: {exc}") from exc
        return validate_places(doc)


@register("replay")
class ReplayConnector(Connector):
    """Re-emits a historical CSV as a live stream at a speed factor.

    Batches group rows by timestamp; the gap between consecutive batches is
    the original gap divided by ``speed``. The stream ends with the file.
    """

    KINDS = frozenset({KIND_REALTIME})
    REQUIRED_PARAMS = ("path",)

    def stream(self) -> Iterator[SampleBatch]:
        path = self.source.params["path"]
        speed = float(self.source.param("speed", "60"))
        if speed <= 0:
            raise ConnectorError("replay speed must be positive")
        try:
            samples = list(read_sample_csv(path))
        except OSError as exc:
            raise ConnectorError(f"cannot read {path!r}: {exc.strerror}") from exc
        if self.source.metrics:
            declared = set(self.source.metrics)
            samples = [s for s in samples if s.metric_id in declared]
        batches = _group_batches(samples)
        previous_t: Optional[int] = None
        for batch in batches:
            if previous_t is not None:
                delay = (batch.t - previous_t) / speed
                if delay > 0:
                    time.sleep(delay)
            previous_t = batch.t
            yield batch


def _phase(place_id: str) -> float:
    # stable across processes, unlike hash()
    return (zlib.crc32(place_id.encode("utf-8")) % 1000) / 1000.0 * 2.0 * math.pi


def parse_spikes(text: str) -> dict[tuple[str, int], float]:
    """Parse "place@ISO=magnitude;..." spike overrides."""
    spikes: dict[tuple[str, int], float] = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            target, magnitude = chunk.rsplit("=", 1)
            place_id, iso = target.split("@", 1)
            spikes[(place_id.strip(), parse_timestamp(iso.strip()))] = float(magnitude)
        except ValueError as exc:
            raise ConnectorError(f"bad spike spec {chunk!r}: {exc}") from exc
    return spikes


def synthetic_value(
    rng: random.Random,
    place_id: str,
    t: Timestamp,
    base: float,
    amplitude: float,
    noise: float,
) -> float:
    """Per-place daily sinusoid plus seeded noise, floored at zero.

    Draws exactly one RNG value per call, so the sample sequence is a pure
    function of (seed, params).
    """
    day_angle = 2.0 * math.pi * ((t % 86_400) / 86_400.0)
    wave = base + amplitude * math.sin(day_angle + _phase(place_id))
    wave += noise * rng.uniform(-1.0, 1.0)
    return float(max(0.0, round(wave)))


@register("synthetic")
class SyntheticConnector(Connector):
    """Seeded deterministic waveform with explicit event spikes.

    params: seed, places (comma list), start (ISO), steps, cadence_s, base,
    amplitude, noise, spikes ("place@ISO=magnitude;..."), interval_s (wall
    pacing between batches; 0 emits as fast as possible).
    """

    KINDS = frozenset({KIND_REALTIME})
    REQUIRED_PARAMS = ("seed", "places", "start", "steps")

    def stream(self) -> Iterator[SampleBatch]:
        src = self.source
        if len(src.metrics) != 1:
            raise ConnectorError(
                f"synthetic source {src.name!r} must declare exactly one metric"
            )
        metric_id = src.metrics[0]
        seed = int(src.params["seed"])
        place_ids = [p.strip() for p in src.params["places"].split(",") if p.strip()]
        if not place_ids:
            raise ConnectorError(f"synthetic source {src.name!r} has no places")
        start = parse_timestamp(src.params["start"])
        steps = int(src.params["steps"])
        cadence = int(src.param("cadence_s", "600"))
        base = float(src.param("base", "100"))
        amplitude = float(src.param("amplitude", "50"))
        noise = float(src.param("noise", "10"))
        interval = float(src.param("interval_s", "1"))
        spikes = parse_spikes(src.param("spikes", ""))
        rng = random.Random(seed)
        for step in range(steps):
            t = start + step * cadence
            samples = []
            for pid in place_ids:
                value = synthetic_value(rng, pid, t, base, amplitude, noise)
                override = spikes.get((pid, t))
                if override is not None:
                    value = override
                samples.append(Sample(pid, t, metric_id, value))
            yield SampleBatch(t=t, samples=tuple(samples))
            if interval > 0 and step + 1 < steps:
                time.sleep(interval)
