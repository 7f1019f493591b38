import random
import threading

import pytest

from crowdlens.model import MetricDef, Place, PointGeom, Sample
from crowdlens.store import (
    IntegrityError,
    SampleStore,
    SnapshotFormatError,
    StoreError,
    UnknownMetricError,
)

from .oracles import linear_query_range

T0 = 1_660_000_000  # arbitrary aligned epoch base


def make_store(n_places=3, metrics=None):
    places = [
        Place(id=f"p{i}", name=f"Place {i}", geometry=PointGeom(float(i), float(i)))
        for i in range(n_places)
    ]
    if metrics is None:
        metrics = [MetricDef(id="total", label="Total", unit="devices", cap=100.0)]
    return SampleStore(places, metrics)


def test_upsert_counts_and_idempotence(tmp_path):
    store = make_store()
    batch = [
        Sample(f"p{i % 3}", T0 + 300 * (i // 3), "total", float(i)) for i in range(100)
    ]
    assert store.upsert(batch) == 100
    first = tmp_path / "a.csv"
    store.snapshot_save(str(first))
    assert store.upsert(batch) == 100
    second = tmp_path / "b.csv"
    store.snapshot_save(str(second))
    assert first.read_bytes() == second.read_bytes()


def test_upsert_replaces_value():
    store = make_store()
    store.upsert([Sample("p0", T0, "total", 1.0)])
    store.upsert([Sample("p0", T0, "total", 2.0)])
    assert store.value_at("p0", "total", T0) == 2.0
    assert store.stats().sample_count == 1


def test_upsert_rejects_unknown_place():
    store = make_store()
    with pytest.raises(IntegrityError) as exc:
        store.upsert([Sample("nowhere", T0, "total", 1.0)])
    assert "nowhere" in str(exc.value)


def test_upsert_rejects_unknown_metric_and_derived():
    metrics = [
        MetricDef(id="total", label="t", unit="u", cap=10.0),
        MetricDef(id="dens", label="d", unit="u", cap=1.0, expression="total / capacity"),
    ]
    store = make_store(metrics=metrics)
    with pytest.raises(IntegrityError):
        store.upsert([Sample("p0", T0, "ghost", 1.0)])
    with pytest.raises(IntegrityError):
        store.upsert([Sample("p0", T0, "dens", 1.0)])


def test_upsert_rejects_non_finite():
    store = make_store()
    with pytest.raises(IntegrityError):
        store.upsert([Sample("p0", T0, "total", float("nan"))])


def test_batch_is_atomic_on_failure():
    store = make_store()
    batch = [Sample("p0", T0, "total", 1.0), Sample("nowhere", T0, "total", 2.0)]
    with pytest.raises(IntegrityError):
        store.upsert(batch)
    assert store.stats().sample_count == 0


def test_query_range_inclusive_bounds_and_order():
    store = make_store()
    store.upsert(
        [
            Sample("p1", T0 + 60, "total", 2.0),
            Sample("p0", T0 + 60, "total", 1.0),
            Sample("p0", T0, "total", 0.5),
            Sample("p2", T0 + 120, "total", 3.0),
        ]
    )
    hits = store.query_range("total", T0, T0 + 60)
    assert [(s.place_id, s.t) for s in hits] == [("p0", T0), ("p0", T0 + 60), ("p1", T0 + 60)]


def test_query_range_empty_gap():
    store = make_store()
    store.upsert([Sample("p0", T0, "total", 1.0), Sample("p0", T0 + 600, "total", 2.0)])
    assert store.query_range("total", T0 + 1, T0 + 599) == []


def test_query_range_unknown_metric():
    store = make_store()
    with pytest.raises(UnknownMetricError):
        store.query_range("ghost", T0, T0 + 1)


def test_query_range_rejects_inverted_range():
    store = make_store()
    with pytest.raises(StoreError):
        store.query_range("total", T0 + 1, T0)


def test_query_range_matches_linear_oracle():
    rng = random.Random(42)
    store = make_store(n_places=20)
    samples = []
    for _ in range(10_000):
        pid = f"p{rng.randrange(20)}"
        t = T0 + 60 * rng.randrange(2000)
        samples.append(Sample(pid, t, "total", float(rng.randrange(1000))))
    # deduplicate on the upsert key: the oracle list has no replace semantics
    dedup = {(s.place_id, s.t, s.metric_id): s for s in samples}
    samples = list(dedup.values())
    store.upsert(samples)
    for _ in range(25):
        a = T0 + 60 * rng.randrange(2000)
        b = a + 60 * rng.randrange(400)
        place_filter = None
        if rng.random() < 0.5:
            place_filter = {f"p{rng.randrange(20)}" for _ in range(5)}
        got = store.query_range("total", a, b, place_filter)
        expected = linear_query_range(samples, "total", a, b, place_filter)
        assert got == expected


def test_latest_at_or_before_staleness():
    store = make_store()
    store.upsert(
        [Sample("p0", T0, "total", 1.0), Sample("p0", T0 + 300, "total", 2.0)]
    )
    assert store.latest_at_or_before("p0", "total", T0 + 420, 300) == 2.0
    assert store.latest_at_or_before("p0", "total", T0 + 1200, 300) is None
    assert store.latest_at_or_before("p0", "total", T0 - 1, 300) is None


def test_snapshot_round_trip(tmp_path):
    store = make_store()
    rng = random.Random(7)
    store.upsert(
        [
            Sample(f"p{rng.randrange(3)}", T0 + 300 * i, "total", rng.random() * 50)
            for i in range(500)
        ]
    )
    path = tmp_path / "snap.csv"
    saved_stats = store.snapshot_save(str(path))
    fresh = make_store()
    loaded_stats = fresh.snapshot_load(str(path))
    assert loaded_stats == saved_stats
    assert fresh.query_range("total", T0, T0 + 300 * 500) == store.query_range(
        "total", T0, T0 + 300 * 500
    )


def test_snapshot_empty_round_trip(tmp_path):
    store = make_store()
    path = tmp_path / "empty.csv"
    store.snapshot_save(str(path))
    fresh = make_store()
    stats = fresh.snapshot_load(str(path))
    assert stats.sample_count == 0
    assert stats.t_min is None


def test_snapshot_truncated_row_reports_line(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text(
        "place_id,timestamp,metric_id,value\n"
        "p0,2022-06-01T00:00:00Z,total,1.0\n"
        "p0,2022-06-01T00:05:00Z\n",
        encoding="utf-8",
    )
    store = make_store()
    with pytest.raises(SnapshotFormatError) as exc:
        store.snapshot_load(str(path))
    assert exc.value.line == 3


def test_snapshot_bad_timestamp_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "place_id,timestamp,metric_id,value\np0,yesterday,total,1.0\n", encoding="utf-8"
    )
    store = make_store()
    with pytest.raises(SnapshotFormatError) as exc:
        store.snapshot_load(str(path))
    assert exc.value.line == 2


def test_concurrent_readers_see_whole_batches():
    store = make_store(n_places=1)
    batch_size = 500
    stop = threading.Event()
    failures = []

    def reader():
        while not stop.is_set():
            n = len(store.query_range("total", 0, 2_000_000_000))
            if n % batch_size != 0:
                failures.append(n)
                return

    t = threading.Thread(target=reader)
    t.start()
    try:
        for b in range(20):
            batch = [
                Sample("p0", T0 + b * batch_size + i, "total", 1.0)
                for i in range(batch_size)
            ]
            store.upsert(batch)
    finally:
        stop.set()
        t.join()
    assert failures == []


def test_distinct_timestamps_sorted_range():
    store = make_store()
    store.upsert(
        [
            Sample("p0", T0 + 600, "total", 1.0),
            Sample("p1", T0 + 600, "total", 2.0),
            Sample("p0", T0, "total", 3.0),
            Sample("p2", T0 + 1200, "total", 4.0),
        ]
    )
    assert store.distinct_timestamps("total", T0, T0 + 1200) == [T0, T0 + 600, T0 + 1200]
    assert store.distinct_timestamps("total", T0 + 1, T0 + 601) == [T0 + 600]
