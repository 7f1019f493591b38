"""Connector framework: source descriptors, driver registry, batch type.

A connector implements one or more of the three endpoint kinds — historical
load, real-time stream, places catalog. Adding a new source type means
registering one driver class; nothing downstream changes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Optional, Type

from ..model import Place, Sample, Timestamp

logger = logging.getLogger(__name__)

KIND_HISTORICAL = "historical"
KIND_REALTIME = "realtime"
KIND_PLACES = "places"
SOURCE_KINDS = (KIND_HISTORICAL, KIND_REALTIME, KIND_PLACES)

# param names whose values never appear in logs or error text
SENSITIVE_PARAM_MARKERS = ("password", "secret", "token", "key", "credential")


def redact_params(params: dict[str, str]) -> dict[str, str]:
    out = {}
    for name, value in params.items():
        lowered = name.lower()
        if any(marker in lowered for marker in SENSITIVE_PARAM_MARKERS):
            out[name] = "***"
        else:
            out[name] = value
    return out


@dataclass(frozen=True)
class SourceDescriptor:
    name: str
    kind: str
    driver: str
    params: dict[str, str] = field(default_factory=dict)
    metrics: tuple[str, ...] = ()
    staleness_s: Optional[int] = None
    cadence_s: Optional[int] = None

    def param(self, name: str, default: Optional[str] = None) -> Optional[str]:
        return self.params.get(name, default)


@dataclass(frozen=True)
class SampleBatch:
    """One delivery from a realtime source; samples share the batch instant."""

    t: Timestamp
    samples: tuple[Sample, ...]


class ConnectorError(Exception):
    pass


class SchemaError(ConnectorError):
    """A fetched record is missing a configured field."""


class Connector:
    """Driver base class. Subclasses set KINDS/REQUIRED_PARAMS and implement
    the methods for the kinds they support."""

    KINDS: frozenset[str] = frozenset()
    REQUIRED_PARAMS: tuple[str, ...] = ()

    def __init__(self, source: SourceDescriptor):
        self.source = source

    def load_history(
        self, metric_ids: set[str], t_from: Timestamp, t_to: Timestamp
    ) -> list[Sample]:
        raise ConnectorError(f"driver {self.source.driver!r} cannot load history")

    def stream(self) -> Iterator[SampleBatch]:
        raise ConnectorError(f"driver {self.source.driver!r} cannot stream")

    def fetch_places(self) -> list[Place]:
        raise ConnectorError(f"driver {self.source.driver!r} cannot fetch places")


_REGISTRY: dict[str, Type[Connector]] = {}


def register(name: str):
    def wrap(cls: Type[Connector]) -> Type[Connector]:
        _REGISTRY[name] = cls
        return cls

    return wrap


def known_drivers() -> list[str]:
    return sorted(_REGISTRY)


def driver_class(name: str) -> Type[Connector]:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ConnectorError(
            f"unknown driver {name!r} (known: {', '.join(known_drivers())})"
        ) from None


def create_connector(source: SourceDescriptor) -> Connector:
    cls = driver_class(source.driver)
    if source.kind not in cls.KINDS:
        raise ConnectorError(
            f"driver {source.driver!r} does not support kind {source.kind!r}"
        )
    missing = [p for p in cls.REQUIRED_PARAMS if p not in source.params]
    if missing:
        raise ConnectorError(
            f"source {source.name!r} is missing required params: {', '.join(missing)}"
        )
    return cls(source)
