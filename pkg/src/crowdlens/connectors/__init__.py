"""Pluggable source framework: historical load, real-time stream, places catalog."""

from __future__ import annotations

from typing import Iterator

from ..model import Place, Sample, Timestamp
from . import drivers  # noqa: F401  (driver registration side effect)
from .base import (
    KIND_HISTORICAL,
    KIND_PLACES,
    KIND_REALTIME,
    Connector,
    ConnectorError,
    SampleBatch,
    SchemaError,
    SourceDescriptor,
    create_connector,
    known_drivers,
    redact_params,
)
from .config import AppConfig, ConfigError, ServiceConfig, load_config

__all__ = [
    "AppConfig",
    "ConfigError",
    "Connector",
    "ConnectorError",
    "SampleBatch",
    "SchemaError",
    "ServiceConfig",
    "SourceDescriptor",
    "create_connector",
    "historical_load",
    "known_drivers",
    "load_config",
    "places_fetch",
    "realtime_subscribe",
    "redact_params",
]


def historical_load(
    source: SourceDescriptor,
    metric_ids: set[str],
    t_from: Timestamp,
    t_to: Timestamp,
) -> list[Sample]:
    """Samples within [t_from, t_to] for the requested metrics."""
    if source.kind != KIND_HISTORICAL:
        raise ConnectorError(f"source {source.name!r} is not a historical source")
    return create_connector(source).load_history(metric_ids, t_from, t_to)


def realtime_subscribe(source: SourceDescriptor) -> Iterator[SampleBatch]:
    """Ordered stream of timestamped sample batches from a realtime source."""
    if source.kind != KIND_REALTIME:
        raise ConnectorError(f"source {source.name!r} is not a realtime source")
    return create_connector(source).stream()


def places_fetch(source: SourceDescriptor) -> list[Place]:
    """Validated places from a catalog source."""
    if source.kind != KIND_PLACES:
        raise ConnectorError(f"source {source.name!r} is not a places source")
    return create_connector(source).fetch_places()
