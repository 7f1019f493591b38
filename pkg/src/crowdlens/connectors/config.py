"""Service configuration: a YAML document instantiating sources and metrics.

Validation is all-or-nothing: every finding is collected with its location
before the load fails, so one pass fixes the whole file.

Layout::

    service:
      bind: "127.0.0.1:8040"
      auth_store: keys.db        # single-file key database
      data_path: samples.csv     # optional snapshot loaded at boot
    metrics:
      - {id: roaming, label: Roaming devices, unit: devices, cap: 1200}
      - {id: density, label: Density, unit: ratio, cap: 3,
         expression: "roaming / capacity"}
    sources:
      - name: history
        kind: historical
        driver: csv-file
        params: {path: samples.csv}
        metrics: [roaming]

Relative paths (params.path, auth_store, data_path) resolve against the
directory containing the config file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .. import expr
from ..model import MetricDef
from .base import SOURCE_KINDS, ConnectorError, SourceDescriptor, driver_class

DEFAULT_BIND = "127.0.0.1:8040"
DEFAULT_STALENESS_S = 600
DEFAULT_HEARTBEAT_S = 15
DEFAULT_STREAM_BUFFER = 256

_PATH_PARAMS = ("path",)


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8040
    auth_store: Optional[str] = None
    data_path: Optional[str] = None
    ui_path: Optional[str] = None
    heartbeat_s: int = DEFAULT_HEARTBEAT_S
    stream_buffer: int = DEFAULT_STREAM_BUFFER


@dataclass(frozen=True)
class AppConfig:
    base_dir: str
    sources: tuple[SourceDescriptor, ...]
    metric_defs: tuple[MetricDef, ...]
    service: ServiceConfig
    eval_order: tuple[str, ...]

    def source(self, name: str) -> SourceDescriptor:
        for src in self.sources:
            if src.name == name:
                return src
        raise ConfigError([f"unknown source {name!r}"])

    def metric(self, metric_id: str) -> MetricDef:
        for mdef in self.metric_defs:
            if mdef.id == metric_id:
                return mdef
        raise ConfigError([f"unknown metric {metric_id!r}"])

    def staleness_for(self, metric_id: str) -> int:
        """Staleness window for frame extraction of a metric.

        Per-source staleness_s wins; otherwise twice the source cadence;
        otherwise the global default. Derived metrics take the widest window
        of their base dependencies.
        """
        mdef = self.metric(metric_id)
        if mdef.is_derived:
            deps = expr.dependency_closure({m.id: m for m in self.metric_defs}, metric_id)
            windows = [self.staleness_for(dep) for dep in sorted(deps)]
            return max(windows) if windows else DEFAULT_STALENESS_S
        candidates = []
        for src in self.sources:
            if metric_id in src.metrics:
                if src.staleness_s is not None:
                    candidates.append(src.staleness_s)
                elif src.cadence_s is not None:
                    candidates.append(2 * src.cadence_s)
        return max(candidates) if candidates else DEFAULT_STALENESS_S


class ConfigError(ValueError):
    def __init__(self, findings: list[str]):
        self.findings = findings
        super().__init__("; ".join(findings))


def _as_str_map(raw, where: str, findings: list[str]) -> dict[str, str]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        findings.append(f"{where}: params must be a mapping")
        return {}
    return {str(k): str(v) for k, v in raw.items()}


def _positive_int(raw, where: str, findings: list[str]) -> Optional[int]:
    if raw is None:
        return None
    try:
        value = int(raw)
    except (TypeError, ValueError):
        findings.append(f"{where}: must be an integer")
        return None
    if value <= 0:
        findings.append(f"{where}: must be positive")
        return None
    return value


def _parse_metrics(raw, findings: list[str]) -> list[MetricDef]:
    defs: list[MetricDef] = []
    if not isinstance(raw, list) or not raw:
        findings.append("metrics: at least one metric must be defined")
        return defs
    seen = set()
    for i, entry in enumerate(raw):
        where = f"metrics[{i}]"
        if not isinstance(entry, dict):
            findings.append(f"{where}: must be a mapping")
            continue
        mid = entry.get("id")
        if not mid or not isinstance(mid, str):
            findings.append(f"{where}: missing id")
            continue
        if mid == expr.CAPACITY_BUILTIN:
            findings.append(f"{where}: id {mid!r} is a reserved identifier")
            continue
        if mid in seen:
            findings.append(f"{where}: duplicate metric id {mid!r}")
            continue
        seen.add(mid)
        cap = entry.get("cap")
        if not isinstance(cap, (int, float)) or isinstance(cap, bool) or cap <= 0:
            findings.append(f"{where}.cap: must be a positive number")
            continue
        expression = entry.get("expression")
        if expression is not None:
            try:
                expr.parse_expression(str(expression))
            except expr.ExprSyntaxError as exc:
                findings.append(f"{where}.expression: {exc}")
                continue
            expression = str(expression)
        defs.append(
            MetricDef(
                id=mid,
                label=str(entry.get("label", mid)),
                unit=str(entry.get("unit", "")),
                cap=float(cap),
                expression=expression,
            )
        )
    return defs


def _parse_sources(
    raw, metric_ids: dict[str, MetricDef], base_dir: str, findings: list[str]
) -> list[SourceDescriptor]:
    sources: list[SourceDescriptor] = []
    if raw is None:
        return sources
    if not isinstance(raw, list):
        findings.append("sources: must be a list")
        return sources
    seen = set()
    for i, entry in enumerate(raw):
        where = f"sources[{i}]"
        if not isinstance(entry, dict):
            findings.append(f"{where}: must be a mapping")
            continue
        name = entry.get("name")
        if not name or not isinstance(name, str):
            findings.append(f"{where}: missing name")
            continue
        where = f"sources[{i}] ({name})"
        if name in seen:
            findings.append(f"{where}: duplicate source name")
            continue
        seen.add(name)
        kind = entry.get("kind")
        if kind not in SOURCE_KINDS:
            findings.append(f"{where}.kind: must be one of {', '.join(SOURCE_KINDS)}")
            continue
        driver = entry.get("driver")
        if not driver or not isinstance(driver, str):
            findings.append(f"{where}.driver: missing driver")
            continue
        try:
            cls = driver_class(driver)
        except ConnectorError as exc:
            findings.append(f"{where}.driver: {exc}")
            continue
        if kind not in cls.KINDS:
            findings.append(f"{where}: driver {driver!r} does not support kind {kind!r}")
            continue
        params = _as_str_map(entry.get("params"), where, findings)
        for pname in _PATH_PARAMS:
            if pname in params:
                params[pname] = os.path.normpath(os.path.join(base_dir, params[pname]))
        missing = [p for p in cls.REQUIRED_PARAMS if p not in params]
        if missing:
            findings.append(f"{where}: missing required params: {', '.join(missing)}")
            continue
        metrics_raw = entry.get("metrics") or []
        metrics = tuple(str(m) for m in metrics_raw)
        if kind == "places":
            if metrics:
                findings.append(f"{where}: places sources do not declare metrics")
                continue
        else:
            if not metrics:
                findings.append(f"{where}: must declare at least one metric")
                continue
            bad = [m for m in metrics if m not in metric_ids]
            if bad:
                findings.append(f"{where}.metrics: undeclared metric ids: {', '.join(bad)}")
                continue
            derived = [m for m in metrics if metric_ids[m].is_derived]
            if derived:
                findings.append(
                    f"{where}.metrics: derived metrics are computed, not sourced: "
                    + ", ".join(derived)
                )
                continue
        staleness = _positive_int(entry.get("staleness_s"), f"{where}.staleness_s", findings)
        cadence = _positive_int(entry.get("cadence_s"), f"{where}.cadence_s", findings)
        sources.append(
            SourceDescriptor(
                name=name,
                kind=kind,
                driver=driver,
                params=params,
                metrics=metrics,
                staleness_s=staleness,
                cadence_s=cadence,
            )
        )
    return sources


def _parse_service(raw, base_dir: str, findings: list[str]) -> ServiceConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        findings.append("service: must be a mapping")
        return ServiceConfig()
    bind = str(raw.get("bind", DEFAULT_BIND))
    host, _, port_text = bind.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        findings.append(f"service.bind: invalid bind address {bind!r}")
        host, port = "127.0.0.1", 8040
    if not host:
        findings.append(f"service.bind: invalid bind address {bind!r}")
        host = "127.0.0.1"

    def resolve(value):
        if value is None:
            return None
        return os.path.normpath(os.path.join(base_dir, str(value)))

    heartbeat = _positive_int(raw.get("heartbeat_s"), "service.heartbeat_s", findings)
    buffer_size = _positive_int(raw.get("stream_buffer"), "service.stream_buffer", findings)
    return ServiceConfig(
        host=host,
        port=port,
        auth_store=resolve(raw.get("auth_store")),
        data_path=resolve(raw.get("data_path")),
        ui_path=resolve(raw.get("ui_path")),
        heartbeat_s=heartbeat or DEFAULT_HEARTBEAT_S,
        stream_buffer=buffer_size or DEFAULT_STREAM_BUFFER,
    )


def load_config(path: str) -> AppConfig:
    """Load and fully validate a config file; raises ConfigError with every
    finding when anything is wrong."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read {path!r}: {exc.strerror}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"config parse error: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a mapping"])
    base_dir = os.path.dirname(os.path.abspath(path))
    findings: list[str] = []
    metric_defs = _parse_metrics(raw.get("metrics"), findings)
    eval_order: tuple[str, ...] = ()
    if metric_defs:
        try:
            eval_order = tuple(expr.resolve_metric_graph(metric_defs))
        except expr.MetricGraphError as exc:
            findings.append(f"metrics: {exc}")
    by_id = {m.id: m for m in metric_defs}
    sources = _parse_sources(raw.get("sources"), by_id, base_dir, findings)
    service = _parse_service(raw.get("service"), base_dir, findings)
    if findings:
        raise ConfigError(findings)
    return AppConfig(
        base_dir=base_dir,
        sources=tuple(sources),
        metric_defs=tuple(metric_defs),
        service=service,
        eval_order=eval_order,
    )
