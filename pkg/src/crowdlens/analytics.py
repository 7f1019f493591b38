"""Numeric mappings behind the visualization.

Frame extraction, region filtering, aggregation series, the timeline hue
gradient, cap normalization, density, and peak finding. Everything here is a
pure function over the store and immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import expr
from .model import Place, Region, Series, Timestamp, Frame, representative_point
from .store import SampleStore

HUE_MIN_SUM = 120.0  # pure green, assigned to the lowest sum
HUE_MAX_SUM = 0.0  # pure red, assigned to the highest sum
HUE_SATURATION = 100.0
HUE_LIGHTNESS = 50.0

_EDGE_EPS = 1e-9


class EmptySeriesError(ValueError):
    """Every point of the series is missing."""


@dataclass(frozen=True)
class HueStop:
    """Timeline gradient stop: hue in [0, 120] for this instant's sum."""

    t: Timestamp
    hue: float
    sum: float


def point_on_segment(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    scale = max(abs(bx - ax), abs(by - ay), 1.0)
    if abs(cross) > _EDGE_EPS * scale:
        return False
    return (
        min(ax, bx) - _EDGE_EPS <= px <= max(ax, bx) + _EDGE_EPS
        and min(ay, by) - _EDGE_EPS <= py <= max(ay, by) + _EDGE_EPS
    )


def point_in_ring(lon: float, lat: float, ring: Sequence[tuple[float, float]]) -> bool:
    """Ray casting over a closed ring; points on an edge count as inside."""
    inside = False
    for i in range(len(ring) - 1):
        ax, ay = ring[i]
        bx, by = ring[i + 1]
        if point_on_segment(lon, lat, ax, ay, bx, by):
            return True
        if (ay > lat) != (by > lat):
            x_cross = ax + (bx - ax) * (lat - ay) / (by - ay)
            if lon < x_cross:
                inside = not inside
    return inside


def point_in_region(lon: float, lat: float, region: Region) -> bool:
    return any(point_in_ring(lon, lat, ring) for ring in region.rings)


def region_filter(places: Sequence[Place], region: Region) -> list[Place]:
    """Places whose representative point falls inside any region ring."""
    out = []
    for place in places:
        lon, lat = representative_point(place)
        if point_in_region(lon, lat, region):
            out.append(place)
    return out


def normalize_to_cap(value: float, cap: float) -> float:
    """clamp(value / cap, 0, 1); cap is the metric's configured high-water mark."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    ratio = value / cap
    if ratio < 0.0:
        return 0.0
    if ratio > 1.0:
        return 1.0
    return ratio


def density(value: float, capacity: Optional[float]) -> Optional[float]:
    """value / carrying capacity; missing when no (positive) capacity is known."""
    if capacity is None or capacity <= 0:
        return None
    return value / capacity


def _evaluation_chain(store: SampleStore, metric_id: str) -> list[str]:
    """Metric ids to evaluate, in order, ending at metric_id (derived only)."""
    needed: set[str] = set()
    stack = [metric_id]
    defs = {m.id: m for m in store.metrics()}
    while stack:
        mid = stack.pop()
        if mid in needed:
            continue
        needed.add(mid)
        mdef = defs[mid]
        if mdef.expression is not None:
            for ref in expr.references(store.parsed_expression(mid)):
                if ref != expr.CAPACITY_BUILTIN and ref in defs:
                    stack.append(ref)
    return [mid for mid in store.eval_order if mid in needed]


def frame_at(
    store: SampleStore, metric_id: str, t: Timestamp, staleness: int
) -> Frame:
    """Map state at one instant: per place, the latest base value at-or-before
    t within the staleness window; derived metrics evaluated per place with
    ``capacity`` bound."""
    if staleness <= 0:
        raise ValueError("staleness must be positive")
    mdef = store.metric(metric_id)
    values: dict[str, Optional[float]] = {}
    if not mdef.is_derived:
        for pid in store.place_ids():
            values[pid] = store.latest_at_or_before(pid, metric_id, t, staleness)
        return Frame(t=t, metric_id=metric_id, values=values)
    chain = _evaluation_chain(store, metric_id)
    for place in store.places():
        bindings: dict[str, Optional[float]] = {expr.CAPACITY_BUILTIN: place.capacity}
        for mid in chain:
            level = store.metric(mid)
            if level.is_derived:
                bindings[mid] = expr.evaluate(store.parsed_expression(mid), bindings)
            else:
                bindings[mid] = store.latest_at_or_before(place.id, mid, t, staleness)
        values[place.id] = bindings[metric_id]
    return Frame(t=t, metric_id=metric_id, values=values)


def sum_series(
    store: SampleStore,
    metric_id: str,
    t_from: Timestamp,
    t_to: Timestamp,
    region: Optional[Region] = None,
    agg: str = "sum",
) -> Series:
    """Aggregate the metric across places, one point per distinct sample
    timestamp in [t_from, t_to].

    The aggregate covers non-missing values of region-filtered places (all
    places when region is None); an instant where every place is missing
    yields a missing point. ``agg`` is "sum" (the instantaneous map total) or
    "mean" (plain mean over non-missing places, for intensity-like metrics
    such as average dwell time).
    """
    if t_from > t_to:
        raise ValueError("t_from must not exceed t_to")
    if agg not in ("sum", "mean"):
        raise ValueError(f"unsupported aggregation {agg!r}")
    mdef = store.metric(metric_id)
    if region is None:
        place_ids = store.place_ids()
    else:
        place_ids = [p.id for p in region_filter(store.places(), region)]

    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    if not mdef.is_derived:
        timeline = store.distinct_timestamps(metric_id, t_from, t_to)
        for pid in place_ids:
            ts, vs = store.series_slice(pid, metric_id, t_from, t_to)
            for t, v in zip(ts, vs):
                if t in sums:
                    sums[t] += v
                    counts[t] += 1
                else:
                    sums[t] = v
                    counts[t] = 1
    else:
        deps = sorted(store.base_dependencies(metric_id))
        merged: set[int] = set()
        for dep in deps:
            merged.update(store.distinct_timestamps(dep, t_from, t_to))
        timeline = sorted(merged)
        chain = _evaluation_chain(store, metric_id)
        places = {p.id: p for p in store.places()}
        parsed = {mid: store.parsed_expression(mid) for mid in chain if store.metric(mid).is_derived}
        for t in timeline:
            for pid in place_ids:
                bindings: dict[str, Optional[float]] = {
                    expr.CAPACITY_BUILTIN: places[pid].capacity
                }
                for mid in chain:
                    if mid in parsed:
                        bindings[mid] = expr.evaluate(parsed[mid], bindings)
                    else:
                        bindings[mid] = store.value_at(pid, mid, t)
                v = bindings[metric_id]
                if v is not None:
                    if t in sums:
                        sums[t] += v
                        counts[t] += 1
                    else:
                        sums[t] = v
                        counts[t] = 1

    points: list[tuple[int, Optional[float]]] = []
    for t in timeline:
        n = counts.get(t, 0)
        if n == 0:
            points.append((t, None))
        elif agg == "mean":
            points.append((t, sums[t] / n))
        else:
            points.append((t, sums[t]))
    return Series(metric_id=metric_id, points=tuple(points))


def timeline_hues(series: Series) -> list[HueStop]:
    """Hue per non-missing point: 120 at the series minimum sum, 0 at the
    maximum, linear in between; a constant series is all 120."""
    present = [(t, v) for t, v in series.points if v is not None]
    if not present:
        raise EmptySeriesError("series has no non-missing points")
    lo = min(v for _, v in present)
    hi = max(v for _, v in present)
    stops = []
    if hi == lo:
        for t, v in present:
            stops.append(HueStop(t=t, hue=HUE_MIN_SUM, sum=v))
        return stops
    span = hi - lo
    for t, v in present:
        hue = HUE_MIN_SUM * (1.0 - (v - lo) / span)
        stops.append(HueStop(t=t, hue=hue, sum=v))
    return stops


def hue_to_hsl(hue: float) -> tuple[float, float, float]:
    """Full-saturation, mid-lightness HSL triple for a timeline hue."""
    return (hue, HUE_SATURATION, HUE_LIGHTNESS)


def peak(series: Series) -> tuple[Timestamp, float]:
    """Earliest timestamp attaining the maximum non-missing value."""
    best_t: Optional[int] = None
    best_v: Optional[float] = None
    for t, v in series.points:
        if v is None:
            continue
        if best_v is None or v > best_v:
            best_t, best_v = t, v
    if best_t is None or best_v is None:
        raise EmptySeriesError("series has no non-missing points")
    return best_t, best_v
