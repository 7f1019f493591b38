import pytest

from crowdlens.analytics import peak, region_filter, sum_series, timeline_hues
from crowdlens.connectors import load_config
from crowdlens.model import parse_timestamp, region_from_rings
from crowdlens.scenarios import PRESETS, build_scenario, write_scenario
from crowdlens.store import SampleStore


def store_for(scenario) -> SampleStore:
    store = SampleStore(scenario.places, scenario.metric_defs)
    store.upsert(scenario.samples)
    return store


@pytest.mark.parametrize("preset", PRESETS)
def test_presets_are_deterministic(preset, tmp_path):
    a = write_scenario(build_scenario(preset, 7), str(tmp_path / "a"))
    b = write_scenario(build_scenario(preset, 7), str(tmp_path / "b"))
    for name in a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_melbourne_shape():
    scenario = build_scenario("melbourne-nye", 7)
    assert len(scenario.places) == 93
    timestamps = sorted({s.t for s in scenario.samples})
    assert timestamps[1] - timestamps[0] == 600


def test_melbourne_peak_recovered_exactly():
    scenario = build_scenario("melbourne-nye", 7)
    store = store_for(scenario)
    t_from = parse_timestamp(scenario.truth["window"]["from"])
    t_to = parse_timestamp(scenario.truth["window"]["to"])
    series = sum_series(store, "pedestrians", t_from, t_to)
    t, value = peak(series)
    assert t == parse_timestamp(scenario.truth["peak"]["t"])
    assert value == scenario.truth["peak"]["value"] == 75000.0
    assert scenario.truth["next_day_max"] < 30000.0
    # the hue gradient pins red (0) at the spike instant
    stops = {s.t: s.hue for s in timeline_hues(series)}
    assert stops[t] == 0.0


def test_rir_region_peak_on_second_weekend():
    scenario = build_scenario("rir-weekend", 11)
    store = store_for(scenario)
    region = region_from_rings([scenario.truth["region"]])
    inside = region_filter(store.places(), region)
    assert len(inside) == 4
    t_from = parse_timestamp(scenario.truth["window"]["from"])
    t_to = parse_timestamp(scenario.truth["window"]["to"])
    series = sum_series(store, "total", t_from, t_to, region=region)
    t, value = peak(series)
    assert t == parse_timestamp(scenario.truth["peak"]["t"])
    assert value == scenario.truth["peak"]["value"]
    assert scenario.truth["weekend2_max"] > scenario.truth["weekend1_max"]


def test_rir_dwell_stays_low_in_park_during_peak():
    scenario = build_scenario("rir-weekend", 11)
    store = store_for(scenario)
    region = region_from_rings([scenario.truth["region"]])
    pin_t = parse_timestamp(scenario.truth["peak"]["t"])
    series = sum_series(store, "dwell", pin_t, pin_t, region=region, agg="mean")
    ((_, mean_dwell),) = series.points
    assert 7.0 <= mean_dwell <= 11.0


def test_lisbon_peak_and_cadence():
    scenario = build_scenario("lisbon-festival", 3)
    store = store_for(scenario)
    t_from = parse_timestamp(scenario.truth["window"]["from"])
    t_to = parse_timestamp(scenario.truth["window"]["to"])
    series = sum_series(store, "total", t_from, t_to)
    t, value = peak(series)
    assert t == parse_timestamp("2022-06-09T18:00:00Z")
    assert value == 52000.0
    timestamps = sorted({s.t for s in scenario.samples})
    assert timestamps[1] - timestamps[0] == 300
    assert len(scenario.places) == 64


def test_generated_config_loads_and_ingests(tmp_path):
    scenario = build_scenario("melbourne-nye", 5)
    files = write_scenario(scenario, str(tmp_path))
    cfg = load_config(files["config.yaml"])
    assert cfg.service.data_path == str(tmp_path / "samples.csv")
    store = SampleStore(scenario.places, cfg.metric_defs)
    stats = store.snapshot_load(cfg.service.data_path)
    assert stats.sample_count == len(scenario.samples)


def test_unknown_preset_rejected():
    with pytest.raises(ValueError):
        build_scenario("venice-carnival", 1)
