"""Scenario configuration: a single versioned JSON file.

The file names every trace, site, link, and job in one document; all
cross-references are checked up front and every randomness source derives
from the one top-level seed.  See the README for the full schema.
"""

from __future__ import annotations

import json
import os
import zlib
from dataclasses import dataclass, field

from .errors import ConfigError, CyclicDependency, OppsimError
from .forecast import ForecastMethod
from .network import FabricSpec, InterSiteLink
from .scheduler import PolicyKnobs
from .sites import (
    DEFAULT_OVERHEAD_FRACTION,
    DEFAULT_SPILL_GBPS_PER_SERVER,
    SiteSpec,
)
from .fleet import DEFAULT_AMORTIZATION_HOURS, ServerRole, ServerSpec
from .traces import (
    PowerSample,
    PowerTrace,
    parse_trace_csv,
    synth_solar,
    synth_wind,
)
from .workload import JobSpec, JobTier, SloSpec, TaskSpec

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    duration_s: float
    forecast_method: ForecastMethod
    policy: PolicyKnobs
    traces: dict[str, PowerTrace]
    sites: list[SiteSpec]
    links: dict[tuple[str, str], InterSiteLink]
    jobs: list[JobSpec]
    raw: dict = field(default_factory=dict)

    @property
    def start_epoch_s(self) -> float:
        return next(iter(self.traces.values())).start_epoch_s

    @property
    def step_s(self) -> float:
        return next(iter(self.traces.values())).step_s

    def trace_for(self, site: SiteSpec) -> PowerTrace:
        return self.traces[site.trace_ref]


def _need(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return obj[key]


def _num(obj: dict, key: str, path: str, default=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = obj[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    return v


def _wind_seed(top_seed: int, trace_id: str) -> int:
    """Per-trace generator seed derived stably from the scenario seed."""
    return (top_seed * 1000003 + zlib.crc32(trace_id.encode("utf-8"))) & 0x7FFFFFFF


def _parse_trace(entry: dict, path: str, base_dir: str, seed: int) -> tuple[str, PowerTrace]:
    trace_id = _need(entry, "trace_id", path)
    sources = [k for k in ("inline", "synth", "csv_path") if k in entry]
    if len(sources) != 1:
        raise ConfigError(path, "need exactly one of inline / synth / csv_path")
    try:
        if "csv_path" in entry:
            csv_path = entry["csv_path"]
            if not os.path.isabs(csv_path):
                csv_path = os.path.join(base_dir, csv_path)
            with open(csv_path, "rb") as fh:
                return trace_id, parse_trace_csv(fh.read())
        if "synth" in entry:
            sy = entry["synth"]
            kind = _need(sy, "kind", f"{path}.synth")
            if kind == "solar":
                return trace_id, synth_solar(
                    peak_mw=_num(sy, "peak_mw", f"{path}.synth"),
                    sunrise_s=_num(sy, "sunrise_s", f"{path}.synth", 21600.0),
                    sunset_s=_num(sy, "sunset_s", f"{path}.synth", 64800.0),
                    step_s=_num(sy, "step_s", f"{path}.synth", 300.0),
                    days=int(_num(sy, "days", f"{path}.synth", 1)),
                    site_id=trace_id,
                    start_epoch_s=_num(sy, "start_epoch_s", f"{path}.synth", 0.0),
                    night_price=_num(sy, "night_price", f"{path}.synth", 35.0),
                    night_carbon=_num(sy, "night_carbon", f"{path}.synth", 450.0),
                )
            if kind == "wind":
                return trace_id, synth_wind(
                    mean_mw=_num(sy, "mean_mw", f"{path}.synth"),
                    volatility_mw=_num(sy, "volatility_mw", f"{path}.synth", 0.0),
                    seed=int(sy.get("seed", _wind_seed(seed, trace_id))),
                    reversion=_num(sy, "reversion", f"{path}.synth", 0.1),
                    step_s=_num(sy, "step_s", f"{path}.synth", 300.0),
                    days=int(_num(sy, "days", f"{path}.synth", 1)),
                    site_id=trace_id,
                    start_epoch_s=_num(sy, "start_epoch_s", f"{path}.synth", 0.0),
                )
            raise ConfigError(f"{path}.synth.kind", f"unknown kind {kind!r}")
        inline = entry["inline"]
        samples = tuple(
            PowerSample(float(row[0]), float(row[1]), float(row[2]), bool(row[3]))
            for row in _need(inline, "samples", f"{path}.inline")
        )
        return trace_id, PowerTrace(
            site_id=inline.get("site_id", trace_id),
            start_epoch_s=_num(inline, "start_epoch_s", f"{path}.inline", 0.0),
            step_s=_num(inline, "step_s", f"{path}.inline"),
            samples=samples,
        )
    except ConfigError:
        raise
    except (OSError, OppsimError, ValueError, TypeError, IndexError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_server(obj: dict, path: str) -> ServerSpec:
    try:
        return ServerSpec(
            server_id=_need(obj, "server_id", path),
            vintage_year=int(_num(obj, "vintage_year", path, 2012)),
            role=ServerRole(_need(obj, "role", path)),
            core_count=int(_num(obj, "core_count", path)),
            ram_gb=_num(obj, "ram_gb", path, 0.0),
            idle_watts=_num(obj, "idle_watts", path),
            per_core_watts=_num(obj, "per_core_watts", path),
            nic_gbps=tuple(obj.get("nic_gbps", ())),
            embodied_kgco2e=_num(obj, "embodied_kgco2e", path, 0.0),
            amortization_hours=_num(obj, "amortization_hours", path, DEFAULT_AMORTIZATION_HOURS),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_site(obj: dict, path: str) -> SiteSpec:
    fab = _need(obj, "fabric", path)
    try:
        fabric = FabricSpec(
            switch_count=int(_num(fab, "switch_count", f"{path}.fabric")),
            watts_per_switch=_num(fab, "watts_per_switch", f"{path}.fabric"),
            gbps_per_switch=_num(fab, "gbps_per_switch", f"{path}.fabric"),
            always_on_core_switches=int(_num(fab, "always_on_core_switches", f"{path}.fabric", 1)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}.fabric", str(exc)) from exc
    servers = tuple(
        _parse_server(s, f"{path}.servers[{i}]")
        for i, s in enumerate(_need(obj, "servers", path))
    )
    try:
        return SiteSpec(
            site_id=_need(obj, "site_id", path),
            iso_id=_need(obj, "iso_id", path),
            servers=servers,
            fabric=fabric,
            cold_storage_gb=_num(obj, "cold_storage_gb", path, 0.0),
            trace_ref=_need(obj, "trace_ref", path),
            overhead_fraction=_num(obj, "overhead_fraction", path, DEFAULT_OVERHEAD_FRACTION),
            spill_gbps_per_server=_num(
                obj, "spill_gbps_per_server", path, DEFAULT_SPILL_GBPS_PER_SERVER
            ),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_job(obj: dict, path: str) -> JobSpec:
    slo_obj = obj.get("slo", {})
    try:
        slo = SloSpec(
            min_renewable_fraction=_num(slo_obj, "min_renewable_fraction", f"{path}.slo", 0.0),
            max_kgco2e=slo_obj.get("max_kgco2e"),
        )
        tasks = tuple(
            TaskSpec(
                task_id=_need(t, "task_id", f"{path}.tasks[{i}]"),
                cpu_core_seconds=_num(t, "cpu_core_seconds", f"{path}.tasks[{i}]"),
                ram_gb=_num(t, "ram_gb", f"{path}.tasks[{i}]", 0.0),
                state_gb=_num(t, "state_gb", f"{path}.tasks[{i}]", 0.0),
                max_parallelism=int(_num(t, "max_parallelism", f"{path}.tasks[{i}]", 1)),
            )
            for i, t in enumerate(_need(obj, "tasks", path))
        )
        return JobSpec(
            job_id=_need(obj, "job_id", path),
            tasks=tasks,
            edges=tuple((a, b) for a, b in obj.get("edges", ())),
            arrival_s=_num(obj, "arrival_s", path, 0.0),
            deadline_s=_num(obj, "deadline_s", path, float("inf")),
            slo=slo,
            tier=JobTier(obj.get("tier", "standard")),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_scenario(data: dict, base_dir: str = ".") -> ScenarioConfig:
    """Validate a parsed JSON document into a ScenarioConfig."""
    if not isinstance(data, dict):
        raise ConfigError("$", "scenario must be a JSON object")
    version = _need(data, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed", f"expected a non-negative integer, got {seed!r}")
    duration_s = _num(data, "duration_s", "$")
    if duration_s <= 0:
        raise ConfigError("duration_s", "must be > 0")
    try:
        method = ForecastMethod(data.get("forecast_method", "persistence"))
    except ValueError as exc:
        raise ConfigError("forecast_method", str(exc)) from exc
    pol = data.get("policy", {})
    try:
        policy = PolicyKnobs(
            lead_window_steps=int(_num(pol, "lead_window_steps", "policy", 2)),
            safety_margin_s=pol.get("safety_margin_s"),
            progress_loss_on_blackout=bool(pol.get("progress_loss_on_blackout", False)),
        )
    except ValueError as exc:
        raise ConfigError("policy", str(exc)) from exc

    traces: dict[str, PowerTrace] = {}
    for i, entry in enumerate(data.get("traces", [])):
        trace_id, trace = _parse_trace(entry, f"traces[{i}]", base_dir, seed)
        if trace_id in traces:
            raise ConfigError(f"traces[{i}].trace_id", f"duplicate trace id {trace_id!r}")
        traces[trace_id] = trace
    if not traces:
        raise ConfigError("traces", "at least one trace is required")

    sites: list[SiteSpec] = []
    for i, entry in enumerate(data.get("sites", [])):
        site = _parse_site(entry, f"sites[{i}]")
        if any(s.site_id == site.site_id for s in sites):
            raise ConfigError(f"sites[{i}].site_id", f"duplicate site id {site.site_id!r}")
        if site.trace_ref not in traces:
            raise ConfigError(
                f"sites[{i}].trace_ref", f"unknown trace {site.trace_ref!r}"
            )
        sites.append(site)
    if not sites:
        raise ConfigError("sites", "at least one site is required")

    referenced = [traces[s.trace_ref] for s in sites]
    first = referenced[0]
    for s, tr in zip(sites, referenced):
        if (
            tr.start_epoch_s != first.start_epoch_s
            or tr.step_s != first.step_s
            or len(tr.samples) != len(first.samples)
        ):
            raise ConfigError(
                f"sites[{sites.index(s)}].trace_ref",
                "all referenced traces must share start, step, and length",
            )
    if duration_s > first.duration_s:
        raise ConfigError(
            "duration_s",
            f"{duration_s} exceeds trace coverage {first.duration_s}",
        )

    site_ids = {s.site_id for s in sites}
    links: dict[tuple[str, str], InterSiteLink] = {}
    for i, entry in enumerate(data.get("links", [])):
        path = f"links[{i}]"
        try:
            link = InterSiteLink(
                from_site=_need(entry, "from_site", path),
                to_site=_need(entry, "to_site", path),
                gbps=_num(entry, "gbps", path),
                latency_s=_num(entry, "latency_s", path, 0.0),
                per_vm_overhead_s=_num(entry, "per_vm_overhead_s", path, 0.05),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from exc
        for end, name in ((link.from_site, "from_site"), (link.to_site, "to_site")):
            if end not in site_ids:
                raise ConfigError(f"{path}.{name}", f"unknown site {end!r}")
        key = (link.from_site, link.to_site)
        if key in links:
            raise ConfigError(path, f"duplicate link {key}")
        links[key] = link

    jobs: list[JobSpec] = []
    start = first.start_epoch_s
    for i, entry in enumerate(data.get("jobs", [])):
        path = f"jobs[{i}]"
        job = _parse_job(entry, path)
        if any(j.job_id == job.job_id for j in jobs):
            raise ConfigError(f"{path}.job_id", f"duplicate job id {job.job_id!r}")
        if job.arrival_s < start:
            raise ConfigError(f"{path}.arrival_s", f"before trace start {start}")
        try:
            from .workload import validate_dag

            validate_dag(job)
        except CyclicDependency as exc:
            raise ConfigError(f"{path}.edges", str(exc)) from exc
        jobs.append(job)

    return ScenarioConfig(
        seed=seed,
        duration_s=duration_s,
        forecast_method=method,
        policy=policy,
        traces=traces,
        sites=sites,
        links=links,
        jobs=jobs,
        raw=data,
    )


def load_scenario(path: str, seed_override: int | None = None) -> ScenarioConfig:
    """Read and validate a scenario file; optionally override its seed."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    if seed_override is not None:
        data = dict(data)
        data["seed"] = seed_override
    return parse_scenario(data, base_dir=os.path.dirname(os.path.abspath(path)))
