import pytest

from crowdlens.model import (
    ModelError,
    PlacesValidationError,
    PointGeom,
    PolygonGeom,
    format_timestamp,
    parse_timestamp,
    places_to_geojson,
    region_from_geojson,
    representative_point,
    validate_places,
)


def _point_feature(pid, lon=0.0, lat=0.0, **props):
    properties = {"id": pid, "name": f"Place {pid}", **props}
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [lon, lat]},
        "properties": properties,
    }


def _collection(*features):
    return {"type": "FeatureCollection", "features": list(features)}


def test_timestamp_round_trip():
    ts = parse_timestamp("2022-12-31T22:00:00Z")
    assert format_timestamp(ts) == "2022-12-31T22:00:00Z"


def test_timestamp_offset_normalized_to_utc():
    assert parse_timestamp("2022-06-26T23:30:00+01:00") == parse_timestamp("2022-06-26T22:30:00Z")


def test_timestamp_rejects_garbage():
    with pytest.raises(ModelError):
        parse_timestamp("not-a-time")


def test_validate_places_two_points():
    places = validate_places(_collection(_point_feature("s1", 144.9, -37.8), _point_feature("s2")))
    assert [p.id for p in places] == ["s1", "s2"]
    assert isinstance(places[0].geometry, PointGeom)


def test_validate_places_zero_capacity_rejected():
    with pytest.raises(PlacesValidationError) as exc:
        validate_places(_collection(_point_feature("s1", capacity=0)))
    assert "capacity must be positive" in str(exc.value)
    assert exc.value.findings[0].feature_index == 0


def test_validate_places_duplicate_id():
    with pytest.raises(PlacesValidationError) as exc:
        validate_places(_collection(_point_feature("cell_001"), _point_feature("cell_001")))
    assert "cell_001" in str(exc.value)


def test_validate_places_missing_id_and_geometry_type():
    bad_geom = {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": [[0, 0], [1, 1]]},
        "properties": {"id": "l1", "name": "line"},
    }
    no_id = {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [0, 0]},
        "properties": {"name": "anon"},
    }
    with pytest.raises(PlacesValidationError) as exc:
        validate_places(_collection(bad_geom, no_id))
    indices = [f.feature_index for f in exc.value.findings]
    assert indices == [0, 1]


def test_validate_places_polygon_closed_and_capacity():
    ring = [[0, 0], [0.002, 0], [0.002, 0.002], [0, 0.002], [0, 0]]
    feature = {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [ring]},
        "properties": {"id": "cell_1", "name": "Cell 1", "capacity": 450},
    }
    (place,) = validate_places(_collection(feature))
    assert isinstance(place.geometry, PolygonGeom)
    assert place.geometry.ring[0] == place.geometry.ring[-1]
    assert place.capacity == 450.0


def test_validate_places_coordinate_bounds():
    with pytest.raises(PlacesValidationError) as exc:
        validate_places(_collection(_point_feature("s1", lon=181.0)))
    assert "longitude" in str(exc.value)


def test_round_trip_is_fixed_point():
    ring = [[9.1, 38.7], [9.102, 38.7], [9.102, 38.702], [9.1, 38.702], [9.1, 38.7]]
    doc = _collection(
        _point_feature("s1", 144.9, -37.8, capacity=1200),
        {
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"id": "c1", "name": "Cell"},
        },
    )
    once = validate_places(doc)
    assert validate_places(places_to_geojson(once)) == once


def test_representative_point_polygon_vertex_centroid():
    ring = [[0, 0], [2, 0], [2, 2], [0, 2], [0, 0]]
    feature = {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [ring]},
        "properties": {"id": "c", "name": "c"},
    }
    (place,) = validate_places(_collection(feature))
    assert representative_point(place) == (1.0, 1.0)


def test_region_from_geojson_rejects_holes():
    doc = {
        "type": "Polygon",
        "coordinates": [
            [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]],
            [[4, 4], [6, 4], [6, 6], [4, 6], [4, 4]],
        ],
    }
    with pytest.raises(ModelError):
        region_from_geojson(doc)


def test_region_auto_closes_open_ring():
    region = region_from_geojson({"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [1, 1]]]})
    assert region.rings[0][0] == region.rings[0][-1]


def test_region_needs_three_distinct_vertices():
    with pytest.raises(ModelError):
        region_from_geojson({"type": "Polygon", "coordinates": [[[0, 0], [1, 1], [0, 0]]]})
