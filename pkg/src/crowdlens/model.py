"""Domain types shared by every other module.

Timestamps are UTC with second resolution, held internally as integer epoch
seconds and serialized externally as ISO-8601 strings ("2022-12-31T22:00:00Z").
Missing measurements are represented as ``None``, never as 0: summing absent
cells as zero would corrupt region aggregates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional, Union

Timestamp = int  # epoch seconds, UTC

LON_MIN, LON_MAX = -180.0, 180.0
LAT_MIN, LAT_MAX = -90.0, 90.0


class ModelError(ValueError):
    """Invalid domain value."""


def parse_timestamp(text: str) -> Timestamp:
    """Parse an ISO-8601 instant to epoch seconds (UTC, second resolution)."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ModelError(f"invalid timestamp {text!r}: {exc}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_timestamp(ts: Timestamp) -> str:
    """Epoch seconds to canonical ISO-8601 UTC string."""
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class PointGeom:
    lon: float
    lat: float


@dataclass(frozen=True)
class PolygonGeom:
    """Closed ring of lon/lat vertices; first vertex equals the last."""

    ring: tuple[tuple[float, float], ...]


Geometry = Union[PointGeom, PolygonGeom]


@dataclass(frozen=True)
class Place:
    """A measurement location: point sensor or grid-cell polygon.

    ``capacity`` is the carrying capacity of the zone (persons), accepted as
    a precomputed input attribute; it is the denominator of density metrics.
    """

    id: str
    name: str
    geometry: Geometry
    capacity: Optional[float] = None


@dataclass(frozen=True)
class MetricDef:
    """A base or derived metric.

    ``cap`` is the configured "very high value" for this metric, used to
    normalize column height and color. ``expression`` is None for base
    metrics and the derived-metric expression text otherwise.
    """

    id: str
    label: str
    unit: str
    cap: float
    expression: Optional[str] = None

    @property
    def is_derived(self) -> bool:
        return self.expression is not None

    @property
    def kind(self) -> str:
        return "derived" if self.is_derived else "base"


@dataclass(frozen=True, slots=True)
class Sample:
    """One (place, timestamp, metric, value) observation.

    (place_id, t, metric_id) is the upsert key; value must be finite.
    """

    place_id: str
    t: Timestamp
    metric_id: str
    value: float


@dataclass(frozen=True)
class Frame:
    """Map state for one metric at one instant; one entry per known place."""

    t: Timestamp
    metric_id: str
    values: dict[str, Optional[float]]


@dataclass(frozen=True)
class Region:
    """One or more closed polygon rings; membership is the union of rings."""

    rings: tuple[tuple[tuple[float, float], ...], ...]


@dataclass(frozen=True)
class Series:
    """Timestamped aggregate values for one metric; timestamps strictly increasing."""

    metric_id: str
    points: tuple[tuple[Timestamp, Optional[float]], ...]


@dataclass
class ValidationFinding:
    feature_index: int
    message: str

    def __str__(self) -> str:
        return f"feature[{self.feature_index}]: {self.message}"


class PlacesValidationError(ModelError):
    """GeoJSON places document failed validation; carries all findings."""

    def __init__(self, findings: list[ValidationFinding]):
        self.findings = findings
        super().__init__("; ".join(str(f) for f in findings))


def _check_lon_lat(lon: float, lat: float) -> Optional[str]:
    if not (isinstance(lon, (int, float)) and isinstance(lat, (int, float))):
        return "coordinates must be numbers"
    if not (LON_MIN <= lon <= LON_MAX):
        return f"longitude {lon} out of range [-180, 180]"
    if not (LAT_MIN <= lat <= LAT_MAX):
        return f"latitude {lat} out of range [-90, 90]"
    return None


def validate_ring(coords: Iterable) -> tuple[tuple[float, float], ...]:
    """Validate one polygon ring: >= 3 distinct vertices, closed, in range.

    Accepts an open ring and closes it; raises ModelError otherwise.
    """
    pts = [tuple(float(c) for c in p) for p in coords]
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(set(pts)) < 3:
        raise ModelError("polygon ring needs at least 3 distinct vertices")
    for lon, lat in pts:
        problem = _check_lon_lat(lon, lat)
        if problem:
            raise ModelError(problem)
    return tuple(pts) + (pts[0],)


def region_from_rings(rings: Iterable[Iterable]) -> Region:
    return Region(rings=tuple(validate_ring(r) for r in rings))


def region_from_geojson(doc: dict) -> Region:
    """Region from a GeoJSON Polygon/MultiPolygon geometry or Feature.

    Polygon holes are unsupported and rejected; MultiPolygon outer rings
    union together.
    """
    if doc.get("type") == "Feature":
        doc = doc.get("geometry") or {}
    gtype = doc.get("type")
    coords = doc.get("coordinates")
    if gtype == "Polygon":
        if coords is None or len(coords) == 0:
            raise ModelError("Polygon has no coordinates")
        if len(coords) > 1:
            raise ModelError("polygon holes are not supported")
        return region_from_rings([coords[0]])
    if gtype == "MultiPolygon":
        outers = []
        for poly in coords or []:
            if len(poly) > 1:
                raise ModelError("polygon holes are not supported")
            outers.append(poly[0])
        if not outers:
            raise ModelError("MultiPolygon has no rings")
        return region_from_rings(outers)
    raise ModelError(f"unsupported region geometry type {gtype!r}")


def validate_places(doc: dict) -> list[Place]:
    """Validate a GeoJSON FeatureCollection into Places.

    Deterministic and order-preserving. Every problem is reported with the
    offending feature index; all findings raise together.
    """
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise PlacesValidationError(
            [ValidationFinding(-1, "document is not a GeoJSON FeatureCollection")]
        )
    findings: list[ValidationFinding] = []
    places: list[Place] = []
    seen_ids: set[str] = set()
    for idx, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        pid = props.get("id")
        if pid is None or pid == "":
            findings.append(ValidationFinding(idx, "missing required property 'id'"))
            continue
        pid = str(pid)
        if pid in seen_ids:
            findings.append(ValidationFinding(idx, f"duplicate id {pid!r}"))
            continue
        name = props.get("name")
        if name is None:
            findings.append(ValidationFinding(idx, "missing required property 'name'"))
            continue
        capacity = props.get("capacity")
        if capacity is not None:
            if not isinstance(capacity, (int, float)) or isinstance(capacity, bool):
                findings.append(ValidationFinding(idx, "capacity must be a number"))
                continue
            if not math.isfinite(capacity) or capacity <= 0:
                findings.append(ValidationFinding(idx, "capacity must be positive"))
                continue
            capacity = float(capacity)
        geom = feature.get("geometry") or {}
        gtype = geom.get("type")
        try:
            if gtype == "Point":
                lon, lat = geom["coordinates"][:2]
                problem = _check_lon_lat(lon, lat)
                if problem:
                    raise ModelError(problem)
                geometry: Geometry = PointGeom(float(lon), float(lat))
            elif gtype == "Polygon":
                coords = geom.get("coordinates") or []
                if len(coords) != 1:
                    raise ModelError("polygon must have exactly one ring (no holes)")
                geometry = PolygonGeom(validate_ring(coords[0]))
            else:
                raise ModelError(f"unsupported geometry type {gtype!r}")
        except (ModelError, KeyError, TypeError, IndexError) as exc:
            findings.append(ValidationFinding(idx, f"invalid geometry: {exc}"))
            continue
        seen_ids.add(pid)
        places.append(Place(id=pid, name=str(name), geometry=geometry, capacity=capacity))
    if findings:
        raise PlacesValidationError(findings)
    return places


def place_to_feature(place: Place) -> dict:
    props: dict = {"id": place.id, "name": place.name}
    if place.capacity is not None:
        props["capacity"] = place.capacity
    if isinstance(place.geometry, PointGeom):
        geometry = {"type": "Point", "coordinates": [place.geometry.lon, place.geometry.lat]}
    else:
        geometry = {
            "type": "Polygon",
            "coordinates": [[list(p) for p in place.geometry.ring]],
        }
    return {"type": "Feature", "geometry": geometry, "properties": props}


def places_to_geojson(places: Iterable[Place]) -> dict:
    return {"type": "FeatureCollection", "features": [place_to_feature(p) for p in places]}


def representative_point(place: Place) -> tuple[float, float]:
    """Point geometry: the point itself; polygon: the ring's vertex centroid.

    Grid cells are small and near-square, so the vertex centroid is an
    adequate stand-in for the area centroid.
    """
    if isinstance(place.geometry, PointGeom):
        return (place.geometry.lon, place.geometry.lat)
    verts = place.geometry.ring[:-1]
    n = len(verts)
    return (sum(p[0] for p in verts) / n, sum(p[1] for p in verts) / n)
