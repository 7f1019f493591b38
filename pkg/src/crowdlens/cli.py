"""Operator command line: serve, validate, ingest, replay, generate, query, keys.

Every subcommand is scriptable: machine-readable output modes and
deterministic exit codes (0 success, 1 failure, 2 usage).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from typing import Optional

from . import analytics, connectors
from .auth import KeyStore, UnknownKeyError
from .connectors import AppConfig, ConfigError, load_config
from .model import (
    ModelError,
    Region,
    format_timestamp,
    parse_timestamp,
    region_from_geojson,
)
from .scenarios import PRESETS, build_scenario, write_scenario
from .store import SampleStore

logger = logging.getLogger(__name__)

CONFIG_ENV = "CROWDLENS_CONFIG"


class CliError(Exception):
    pass


def _require_config(args) -> AppConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if not path:
        raise CliError(f"no config file: pass --config or set {CONFIG_ENV}")
    return load_config(path)


def _instant(raw: str, name: str) -> int:
    try:
        return parse_timestamp(raw)
    except ModelError as exc:
        raise CliError(f"bad {name}: {exc}")


def _load_store(config: AppConfig) -> SampleStore:
    places = []
    for source in config.sources:
        if source.kind == connectors.KIND_PLACES:
            places.extend(connectors.places_fetch(source))
    store = SampleStore(places, config.metric_defs)
    data_path = config.service.data_path
    if data_path and os.path.exists(data_path):
        store.snapshot_load(data_path)
    return store


def _load_region(path: Optional[str]) -> Optional[Region]:
    if not path:
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return region_from_geojson(json.load(fh))
    except (OSError, json.JSONDecodeError, ModelError) as exc:
        raise CliError(f"bad region file {path!r}: {exc}")


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceRuntime, create_app

    config = _require_config(args)
    if args.ui:
        if not os.path.isdir(args.ui):
            raise CliError(f"--ui directory not found: {args.ui}")
        config = dataclasses.replace(
            config, service=dataclasses.replace(config.service, ui_path=os.path.abspath(args.ui))
        )
    if not config.service.auth_store:
        raise CliError("config has no service.auth_store; the API requires one")
    runtime = ServiceRuntime.from_config(config)
    runtime.start_realtime()
    app = create_app(runtime)
    host = args.host or config.service.host
    port = args.port or config.service.port
    print(f"serving on http://{host}:{port} (api under /api)", file=sys.stderr)
    uvicorn.run(app, host=host, port=port, log_level="info")
    runtime.stop()
    return 0


def cmd_validate_config(args) -> int:
    try:
        config = load_config(args.path)
    except ConfigError as exc:
        for finding in exc.findings:
            print(f"FAIL: {finding}")
        return 1
    print(
        f"OK: {len(config.metric_defs)} metrics, {len(config.sources)} sources, "
        f"bind {config.service.host}:{config.service.port}"
    )
    return 0


def cmd_ingest(args) -> int:
    config = _require_config(args)
    source = config.source(args.source)
    if source.kind != connectors.KIND_HISTORICAL:
        raise CliError(f"source {args.source!r} is not a historical source")
    if not config.service.data_path:
        raise CliError("config has no service.data_path to ingest into")
    t_from = _instant(args.t_from, "--from")
    t_to = _instant(args.t_to, "--to")
    samples = connectors.historical_load(source, set(source.metrics), t_from, t_to)
    store = _load_store(config)
    inserted = store.upsert(samples)
    stats = store.snapshot_save(config.service.data_path)
    print(
        f"ingested {inserted} samples from {args.source}; "
        f"store now holds {stats.sample_count}"
    )
    return 0


def cmd_replay(args) -> int:
    config = _require_config(args)
    source = config.source(args.source)
    if source.kind != connectors.KIND_REALTIME:
        raise CliError(f"source {args.source!r} is not a realtime source")
    if args.speed:
        source = dataclasses.replace(
            source, params={**source.params, "speed": str(args.speed)}
        )
    out = sys.stdout
    for batch in connectors.realtime_subscribe(source):
        for s in batch.samples:
            if args.format == "jsonl":
                out.write(
                    json.dumps(
                        {
                            "place_id": s.place_id,
                            "t": format_timestamp(s.t),
                            "metric_id": s.metric_id,
                            "value": s.value,
                        }
                    )
                    + "\n"
                )
            else:
                out.write(f"{s.place_id},{format_timestamp(s.t)},{s.metric_id},{s.value!r}\n")
        out.flush()
    return 0


def cmd_gen_scenario(args) -> int:
    scenario = build_scenario(args.preset, args.seed)
    written = write_scenario(scenario, args.out)
    for name in sorted(written):
        print(written[name])
    return 0


def _query_series(args):
    config = _require_config(args)
    store = _load_store(config)
    t_from = _instant(args.t_from, "--from")
    t_to = _instant(args.t_to, "--to")
    region = _load_region(args.region_file)
    return analytics.sum_series(
        store, args.metric, t_from, t_to, region=region, agg=args.agg
    )


def cmd_query_peak(args) -> int:
    series = _query_series(args)
    try:
        t, value = analytics.peak(series)
    except analytics.EmptySeriesError:
        raise CliError("no non-missing points in range")
    if args.format == "csv":
        print("t,value")
        print(f"{format_timestamp(t)},{value!r}")
    else:
        print(json.dumps({"metric": args.metric, "t": format_timestamp(t), "value": value}))
    return 0


def cmd_query_series(args) -> int:
    series = _query_series(args)
    if args.format == "csv":
        print("t,value")
        for t, v in series.points:
            print(f"{format_timestamp(t)},{'' if v is None else repr(v)}")
    else:
        print(
            json.dumps(
                {
                    "metric": args.metric,
                    "points": [
                        {"t": format_timestamp(t), "value": v} for t, v in series.points
                    ],
                }
            )
        )
    return 0


def _keystore(args) -> KeyStore:
    path = args.auth_store
    if not path:
        config = _require_config(args)
        path = config.service.auth_store
    if not path:
        raise CliError("no auth store: pass --auth-store or set service.auth_store")
    return KeyStore(path)


def cmd_keys_add(args) -> int:
    keystore = _keystore(args)
    key_id, secret = keystore.add(args.label)
    # the only time the secret is ever shown; it is not stored
    print(f"{key_id}.{secret}")
    return 0


def cmd_keys_revoke(args) -> int:
    keystore = _keystore(args)
    try:
        keystore.revoke(args.key_id)
    except UnknownKeyError:
        raise CliError(f"unknown key id {args.key_id!r}")
    print(f"revoked {args.key_id}")
    return 0


def cmd_keys_list(args) -> int:
    keystore = _keystore(args)
    for record in keystore.list_keys():
        state = "revoked" if record.revoked else "active"
        print(f"{record.key_id}\t{state}\t{record.created_at}\t{record.label}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdlens",
        description="Geo-temporal crowding analytics service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help=f"config file (or {CONFIG_ENV} env var)")

    p = sub.add_parser("serve", help="run the HTTP service")
    add_config(p)
    p.add_argument("--host", help="override bind host")
    p.add_argument("--port", type=int, help="override bind port")
    p.add_argument("--ui", help="serve a static UI build from this directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate-config", help="check a config file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate_config)

    p = sub.add_parser("ingest", help="pull a historical source into the data snapshot")
    add_config(p)
    p.add_argument("--source", required=True)
    p.add_argument("--from", dest="t_from", required=True)
    p.add_argument("--to", dest="t_to", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("replay", help="emit a realtime source to stdout")
    add_config(p)
    p.add_argument("--source", required=True)
    p.add_argument("--speed", type=float, help="override replay speed factor")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("gen-scenario", help="write a synthetic scenario dataset")
    p.add_argument("--preset", choices=PRESETS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("query", help="offline analytics over the configured data")
    query_sub = p.add_subparsers(dest="query_command", required=True)
    for name, func in (("peak", cmd_query_peak), ("series", cmd_query_series)):
        q = query_sub.add_parser(name)
        add_config(q)
        q.add_argument("--metric", required=True)
        q.add_argument("--from", dest="t_from", required=True)
        q.add_argument("--to", dest="t_to", required=True)
        q.add_argument("--region-file", help="GeoJSON polygon restricting the aggregation")
        q.add_argument("--agg", choices=("sum", "mean"), default="sum")
        q.add_argument("--format", choices=("json", "csv"), default="json")
        q.set_defaults(func=func)

    p = sub.add_parser("keys", help="manage API keys")
    keys_sub = p.add_subparsers(dest="keys_command", required=True)
    q = keys_sub.add_parser("add")
    add_config(q)
    q.add_argument("--auth-store")
    q.add_argument("label")
    q.set_defaults(func=cmd_keys_add)
    q = keys_sub.add_parser("revoke")
    add_config(q)
    q.add_argument("--auth-store")
    q.add_argument("key_id")
    q.set_defaults(func=cmd_keys_revoke)
    q = keys_sub.add_parser("list")
    add_config(q)
    q.add_argument("--auth-store")
    q.set_defaults(func=cmd_keys_list)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, connectors.ConnectorError, ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
