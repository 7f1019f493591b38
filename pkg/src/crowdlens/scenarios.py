"""Deterministic scenario generators for demos and verification.

Three presets model well-known high-crowding events as parameterized
generators rather than bundled datasets (the real feeds are proprietary or
external); a preset is a pure function of its seed.

Every generated value is an integer-valued float, so place sums are exact in
floating point regardless of summation order. A preset's headline spike pins
the aggregate total at the event instant: the designated "hero" place absorbs
the difference between the target total and the sum of the other baselines.
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import yaml

from .model import (
    MetricDef,
    Place,
    PointGeom,
    PolygonGeom,
    Sample,
    Timestamp,
    format_timestamp,
    parse_timestamp,
    places_to_geojson,
)
from .store import write_sample_csv

PRESETS = ("lisbon-festival", "rir-weekend", "melbourne-nye")

PLACES_FILE = "places.geojson"
SAMPLES_FILE = "samples.csv"
CONFIG_FILE = "config.yaml"
TRUTH_FILE = "scenario.json"
REGION_FILE = "region.geojson"


@dataclass
class Scenario:
    preset: str
    seed: int
    places: list[Place]
    metric_defs: list[MetricDef]
    samples: list[Sample]
    truth: dict = field(default_factory=dict)


def _bell(hour: float, peak: float, sigma: float) -> float:
    """Gaussian bump over the hour-of-day, circular in 24 h."""
    d = abs(hour - peak)
    d = min(d, 24.0 - d)
    return math.exp(-(d * d) / (2.0 * sigma * sigma))


def _hour_of(t: Timestamp) -> float:
    return (t % 86_400) / 3600.0


def _date_of(t: Timestamp) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%d")


def _grid_places(
    rng: random.Random,
    rows: int,
    cols: int,
    lon0: float,
    lat0: float,
    cell_deg: float,
    prefix: str,
    capacity_range: tuple[int, int],
) -> list[Place]:
    places = []
    for r in range(rows):
        for c in range(cols):
            x0 = lon0 + c * cell_deg
            y0 = lat0 + r * cell_deg
            ring = (
                (x0, y0),
                (x0 + cell_deg, y0),
                (x0 + cell_deg, y0 + cell_deg),
                (x0, y0 + cell_deg),
                (x0, y0),
            )
            pid = f"{prefix}_{r:02d}_{c:02d}"
            places.append(
                Place(
                    id=pid,
                    name=f"Cell {r},{c}",
                    geometry=PolygonGeom(ring),
                    capacity=float(rng.randint(*capacity_range)),
                )
            )
    return places


def _point_places(
    rng: random.Random,
    count: int,
    lon0: float,
    lat0: float,
    spread: float,
    prefix: str,
    capacity_range: tuple[int, int],
) -> list[Place]:
    places = []
    for i in range(count):
        lon = lon0 + rng.uniform(-spread, spread)
        lat = lat0 + rng.uniform(-spread, spread)
        places.append(
            Place(
                id=f"{prefix}_{i:02d}",
                name=f"{prefix.capitalize()} {i}",
                geometry=PointGeom(round(lon, 6), round(lat, 6)),
                capacity=float(rng.randint(*capacity_range)),
            )
        )
    return places


def _steps(t_from: Timestamp, t_to: Timestamp, cadence_s: int) -> list[int]:
    return list(range(t_from, t_to + 1, cadence_s))


def _melbourne(seed: int) -> Scenario:
    """93 pedestrian sensors, 10-minute cadence, New Year's Eve spike.

    The map-wide total is pinned to 75000 at 22:00 on Dec 31; the following
    day's peak stays below 30000 by construction (93 places never exceed
    ~280 each).
    """
    rng = random.Random(seed)
    places = _point_places(rng, 93, 144.9631, -37.8136, 0.02, "sensor", (500, 2000))
    metric_defs = [
        MetricDef(id="pedestrians", label="Pedestrians", unit="count", cap=3000.0),
        MetricDef(
            id="crowding",
            label="Crowding vs capacity",
            unit="ratio",
            cap=2.0,
            expression="pedestrians / capacity",
        ),
    ]
    t_from = parse_timestamp("2022-12-31T00:00:00Z")
    t_to = parse_timestamp("2023-01-02T00:00:00Z")
    cadence = 600
    spike_t = parse_timestamp("2022-12-31T22:00:00Z")
    spike_total = 75_000.0
    hero = places[0].id

    base = {p.id: rng.randint(40, 120) for p in places}
    amp = {p.id: rng.randint(50, 150) for p in places}

    samples: list[Sample] = []
    next_day_max = 0.0
    jan1 = parse_timestamp("2023-01-01T00:00:00Z")
    for t in _steps(t_from, t_to, cadence):
        hour = _hour_of(t)
        envelope = _bell(hour, 21.0, 3.5)
        values: dict[str, float] = {}
        for p in places:
            raw = base[p.id] + amp[p.id] * envelope + 10.0 * rng.uniform(-1, 1)
            values[p.id] = float(max(0, round(raw)))
        if t == spike_t:
            others = sum(v for pid, v in values.items() if pid != hero)
            values[hero] = spike_total - others
        total = sum(values.values())
        if t >= jan1:
            next_day_max = max(next_day_max, total)
        for p in places:
            samples.append(Sample(p.id, t, "pedestrians", values[p.id]))
    truth = {
        "preset": "melbourne-nye",
        "seed": seed,
        "metric": "pedestrians",
        "window": {"from": format_timestamp(t_from), "to": format_timestamp(t_to)},
        "cadence_s": cadence,
        "peak": {"t": format_timestamp(spike_t), "value": spike_total},
        "region": None,
        "next_day_max": next_day_max,
        "spike_place": hero,
    }
    return Scenario("melbourne-nye", seed, places, metric_defs, samples, truth)


def _rir(seed: int) -> Scenario:
    """Two festival weekends in a 4x4 grid; the inner 2x2 cells are the park.

    Event-evening humps on Jun 18/19 and (higher) Jun 25/26; the park total
    is pinned to 42000 at 23:30 on Jun 26, the generator-defined maximum.
    """
    rng = random.Random(seed)
    cell = 0.0023  # ~200 m of longitude at Lisbon's latitude
    places = _grid_places(rng, 4, 4, -9.122, 38.755, cell, "bv", (300, 1500))
    park_ids = {f"bv_{r:02d}_{c:02d}" for r in (1, 2) for c in (1, 2)}
    hero = "bv_01_01"
    metric_defs = [
        MetricDef(id="total", label="Total devices", unit="devices", cap=8000.0),
        MetricDef(id="roaming", label="Roaming devices", unit="devices", cap=3000.0),
        MetricDef(id="dwell", label="Average dwell time", unit="minutes", cap=60.0),
        MetricDef(
            id="density",
            label="Roaming density",
            unit="ratio",
            cap=3.0,
            expression="roaming / capacity",
        ),
    ]
    t_from = parse_timestamp("2022-06-17T00:00:00Z")
    t_to = parse_timestamp("2022-06-27T00:00:00Z")
    cadence = 300
    pin_t = parse_timestamp("2022-06-26T23:30:00Z")
    pin_total = 42_000.0
    weekend1 = {"2022-06-18", "2022-06-19"}
    weekend2 = {"2022-06-25", "2022-06-26"}

    base = {p.id: rng.randint(150, 350) for p in places}
    amp = {p.id: rng.randint(100, 300) for p in places}

    samples: list[Sample] = []
    weekend_max = {1: 0.0, 2: 0.0}
    for t in _steps(t_from, t_to, cadence):
        hour = _hour_of(t)
        day = _date_of(t)
        daily = _bell(hour, 14.0, 5.0)
        event_amp = 0.0
        weekend = 0
        if day in weekend1:
            event_amp, weekend = 5000.0, 1
        elif day in weekend2:
            event_amp, weekend = 6750.0, 2
        event = event_amp * _bell(hour, 22.5, 2.0)
        totals: dict[str, float] = {}
        for p in places:
            raw = base[p.id] + amp[p.id] * daily + 15.0 * rng.uniform(-1, 1)
            if p.id in park_ids:
                raw += event
            totals[p.id] = float(max(0, round(raw)))
        if t == pin_t:
            others = sum(v for pid, v in totals.items() if pid in park_ids and pid != hero)
            totals[hero] = pin_total - others
        park_sum = sum(v for pid, v in totals.items() if pid in park_ids)
        if weekend:
            weekend_max[weekend] = max(weekend_max[weekend], park_sum)
        for p in places:
            total_v = totals[p.id]
            roaming_v = float(max(0, round(0.35 * total_v + 5.0 * rng.uniform(-1, 1))))
            in_event = p.id in park_ids and event_amp > 0 and _bell(hour, 22.5, 2.0) > 0.3
            dwell_v = float(
                max(1, round(9 + 1.5 * rng.uniform(-1, 1)))
                if in_event
                else max(1, round(20 + 5.0 * rng.uniform(-1, 1)))
            )
            samples.append(Sample(p.id, t, "total", total_v))
            samples.append(Sample(p.id, t, "roaming", roaming_v))
            samples.append(Sample(p.id, t, "dwell", dwell_v))
    margin = cell * 0.2
    region_ring = [
        [-9.122 + cell - margin, 38.755 + cell - margin],
        [-9.122 + 3 * cell + margin, 38.755 + cell - margin],
        [-9.122 + 3 * cell + margin, 38.755 + 3 * cell + margin],
        [-9.122 + cell - margin, 38.755 + 3 * cell + margin],
        [-9.122 + cell - margin, 38.755 + cell - margin],
    ]
    truth = {
        "preset": "rir-weekend",
        "seed": seed,
        "metric": "total",
        "window": {"from": format_timestamp(t_from), "to": format_timestamp(t_to)},
        "cadence_s": cadence,
        "peak": {"t": format_timestamp(pin_t), "value": pin_total},
        "region": region_ring,
        "weekend1_max": weekend_max[1],
        "weekend2_max": weekend_max[2],
        "spike_place": hero,
    }
    return Scenario("rir-weekend", seed, places, metric_defs, samples, truth)


def _lisbon(seed: int) -> Scenario:
    """Festival week over an 8x8 grid of 200 m cells, 5-minute cadence.

    Office-zone activity peaks on Jun 9 (pinned map total 52000 at 18:00);
    nightlife cells carry the late-night humps of Jun 12-13.
    """
    rng = random.Random(seed)
    cell = 0.0023
    places = _grid_places(rng, 8, 8, -9.16, 38.71, cell, "lx", (300, 1500))
    office_ids = {p.id for p in places[:8]}
    nightlife_ids = {p.id for p in places[40:46]}
    hero = places[0].id
    metric_defs = [
        MetricDef(id="total", label="Total devices", unit="devices", cap=6000.0),
        MetricDef(id="roaming", label="Roaming devices", unit="devices", cap=2000.0),
        MetricDef(
            id="density",
            label="Roaming density",
            unit="ratio",
            cap=3.0,
            expression="roaming / capacity",
        ),
    ]
    t_from = parse_timestamp("2022-06-08T00:00:00Z")
    t_to = parse_timestamp("2022-06-14T00:00:00Z")
    cadence = 300
    pin_t = parse_timestamp("2022-06-09T18:00:00Z")
    pin_total = 52_000.0
    workdays = {"2022-06-08", "2022-06-09"}
    festival_nights = {"2022-06-12", "2022-06-13"}

    base = {p.id: rng.randint(100, 250) for p in places}
    amp = {p.id: rng.randint(100, 300) for p in places}

    samples: list[Sample] = []
    for t in _steps(t_from, t_to, cadence):
        hour = _hour_of(t)
        day = _date_of(t)
        daily = _bell(hour, 15.0, 5.0)
        values: dict[str, float] = {}
        for p in places:
            raw = base[p.id] + amp[p.id] * daily + 12.0 * rng.uniform(-1, 1)
            if p.id in office_ids and day in workdays:
                raw += 900.0 * _bell(hour, 15.0, 4.0)
            if p.id in nightlife_ids and day in festival_nights:
                raw += 1400.0 * _bell(hour, 23.0, 2.0)
            values[p.id] = float(max(0, round(raw)))
        if t == pin_t:
            others = sum(v for pid, v in values.items() if pid != hero)
            values[hero] = pin_total - others
        for p in places:
            total_v = values[p.id]
            roaming_v = float(max(0, round(0.3 * total_v + 4.0 * rng.uniform(-1, 1))))
            samples.append(Sample(p.id, t, "total", total_v))
            samples.append(Sample(p.id, t, "roaming", roaming_v))
    truth = {
        "preset": "lisbon-festival",
        "seed": seed,
        "metric": "total",
        "window": {"from": format_timestamp(t_from), "to": format_timestamp(t_to)},
        "cadence_s": cadence,
        "peak": {"t": format_timestamp(pin_t), "value": pin_total},
        "region": None,
        "spike_place": hero,
    }
    return Scenario("lisbon-festival", seed, places, metric_defs, samples, truth)


_BUILDERS = {
    "melbourne-nye": _melbourne,
    "rir-weekend": _rir,
    "lisbon-festival": _lisbon,
}


def build_scenario(preset: str, seed: int) -> Scenario:
    try:
        builder = _BUILDERS[preset]
    except KeyError:
        raise ValueError(
            f"unknown preset {preset!r} (choose from {', '.join(PRESETS)})"
        ) from None
    return builder(seed)


def _config_document(scenario: Scenario) -> dict:
    base_metrics = [m.id for m in scenario.metric_defs if not m.is_derived]
    metrics = []
    for m in scenario.metric_defs:
        entry: dict = {"id": m.id, "label": m.label, "unit": m.unit, "cap": m.cap}
        if m.expression is not None:
            entry["expression"] = m.expression
        metrics.append(entry)
    return {
        "service": {
            "bind": "127.0.0.1:8040",
            "auth_store": "keys.db",
            "data_path": SAMPLES_FILE,
        },
        "metrics": metrics,
        "sources": [
            {
                "name": "history",
                "kind": "historical",
                "driver": "csv-file",
                "params": {"path": SAMPLES_FILE},
                "metrics": base_metrics,
                "cadence_s": scenario.truth["cadence_s"],
            },
            {
                "name": "catalog",
                "kind": "places",
                "driver": "geojson-file",
                "params": {"path": PLACES_FILE},
            },
            {
                "name": "live",
                "kind": "realtime",
                "driver": "replay",
                "params": {"path": SAMPLES_FILE, "speed": "600"},
                "metrics": base_metrics,
                "cadence_s": scenario.truth["cadence_s"],
            },
        ],
    }


def write_scenario(scenario: Scenario, out_dir: str) -> dict[str, str]:
    """Write places GeoJSON, samples CSV, config, and ground truth.

    All content is produced before anything is written, and each file goes
    through a temp-then-rename step, so a failure leaves no partial output.
    """
    os.makedirs(out_dir, exist_ok=True)
    documents: dict[str, str] = {
        PLACES_FILE: json.dumps(places_to_geojson(scenario.places), indent=2) + "\n",
        CONFIG_FILE: yaml.safe_dump(_config_document(scenario), sort_keys=False),
        TRUTH_FILE: json.dumps(scenario.truth, indent=2, sort_keys=True) + "\n",
    }
    if scenario.truth.get("region"):
        documents[REGION_FILE] = (
            json.dumps(
                {
                    "type": "Feature",
                    "geometry": {"type": "Polygon", "coordinates": [scenario.truth["region"]]},
                    "properties": {"name": "region of interest"},
                },
                indent=2,
            )
            + "\n"
        )
    written: dict[str, str] = {}
    for name, content in documents.items():
        target = os.path.join(out_dir, name)
        tmp = target + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        os.replace(tmp, target)
        written[name] = target
    samples_target = os.path.join(out_dir, SAMPLES_FILE)
    tmp = samples_target + ".tmp"
    write_sample_csv(tmp, scenario.samples)
    os.replace(tmp, samples_target)
    written[SAMPLES_FILE] = samples_target
    return written
