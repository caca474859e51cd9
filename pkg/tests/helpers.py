"""Shared builders for scenario dicts used across the test suite.

Every helper returns plain dicts in the scenario JSON schema so tests can
tweak any field before handing the config to parse_scenario / the CLI.
"""

import csv
import io


def make_server(
    server_id="srv0",
    role="legacy_compute",
    core_count=4,
    idle_watts=100.0,
    per_core_watts=10.0,
    ram_gb=64.0,
    **extra,
):
    server = {
        "server_id": server_id,
        "role": role,
        "core_count": core_count,
        "idle_watts": idle_watts,
        "per_core_watts": per_core_watts,
        "ram_gb": ram_gb,
    }
    server.update(extra)
    return server


def make_fabric(
    switch_count=1, watts_per_switch=0.0, gbps_per_switch=100.0, always_on=1
):
    return {
        "switch_count": switch_count,
        "watts_per_switch": watts_per_switch,
        "gbps_per_switch": gbps_per_switch,
        "always_on_core_switches": always_on,
    }


def make_site(
    site_id="s0",
    trace_ref="t0",
    servers=None,
    fabric=None,
    cold_storage_gb=1000.0,
    spill_gbps_per_server=1.0,
    overhead_fraction=0.0,
    iso_id="ISO-A",
):
    return {
        "site_id": site_id,
        "iso_id": iso_id,
        "trace_ref": trace_ref,
        "servers": servers if servers is not None else [make_server()],
        "fabric": fabric if fabric is not None else make_fabric(),
        "cold_storage_gb": cold_storage_gb,
        "spill_gbps_per_server": spill_gbps_per_server,
        "overhead_fraction": overhead_fraction,
    }


def make_trace(trace_id="t0", samples=None, step_s=300.0, start_epoch_s=0.0, site_id=None):
    """samples: list of [available_mw, price, carbon, curtailed] rows."""
    if samples is None:
        samples = [[0.001, -5.0, 100.0, False]] * 2
    return {
        "trace_id": trace_id,
        "inline": {
            "site_id": site_id or trace_id,
            "start_epoch_s": start_epoch_s,
            "step_s": step_s,
            "samples": samples,
        },
    }


def make_job(
    job_id="j0",
    arrival_s=0.0,
    deadline_s=None,
    cpu_core_seconds=600.0,
    ram_gb=0.0,
    state_gb=1.0,
    max_parallelism=1,
    n_tasks=1,
    tier="standard",
    min_renewable_fraction=0.0,
    max_kgco2e=None,
):
    """A chain of n identical tasks splitting cpu_core_seconds evenly."""
    tasks = [
        {
            "task_id": f"{job_id}-t{i}",
            "cpu_core_seconds": cpu_core_seconds / n_tasks,
            "ram_gb": ram_gb,
            "state_gb": state_gb,
            "max_parallelism": max_parallelism,
        }
        for i in range(n_tasks)
    ]
    edges = [[f"{job_id}-t{i}", f"{job_id}-t{i+1}"] for i in range(n_tasks - 1)]
    job = {
        "job_id": job_id,
        "arrival_s": arrival_s,
        "tier": tier,
        "slo": {"min_renewable_fraction": min_renewable_fraction},
        "tasks": tasks,
        "edges": edges,
    }
    if deadline_s is not None:
        job["deadline_s"] = deadline_s
    if max_kgco2e is not None:
        job["slo"]["max_kgco2e"] = max_kgco2e
    return job


def make_config(
    traces,
    sites,
    jobs,
    links=(),
    duration_s=None,
    seed=42,
    policy=None,
    forecast_method="persistence",
):
    if duration_s is None:
        inline = traces[0]["inline"]
        duration_s = inline["step_s"] * len(inline["samples"])
    cfg = {
        "schema_version": 1,
        "seed": seed,
        "duration_s": duration_s,
        "forecast_method": forecast_method,
        "traces": list(traces),
        "sites": list(sites),
        "links": list(links),
        "jobs": list(jobs),
    }
    if policy is not None:
        cfg["policy"] = policy
    return cfg


def single_site_config(samples=None, jobs=None, **kw):
    """One site, one 4-core server, negative-price power by default."""
    traces = [make_trace(samples=samples)]
    sites = [make_site()]
    if jobs is None:
        jobs = [make_job()]
    return make_config(traces, sites, jobs, **kw)


def read_csv_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def random_scenario(rng, n_steps=None, oracle=False, ample_cold=True, lead=None):
    """A randomized but always-valid scenario exercising the whole engine.

    Traces mix dark steps, negative prices, and curtailment; fleets mix
    server shapes and occasionally a RAM-dense infrastructure node; jobs
    mix chains, tiers, strict-renewable SLOs, and mid-run arrivals.
    Transfer times stay well under one step so migrations planned one
    step ahead always land in time.
    """
    step = 300.0
    if n_steps is None:
        n_steps = rng.randint(8, 18)
    n_sites = rng.randint(1, 3)
    duration = step * n_steps
    traces, sites = [], []
    for si in range(n_sites):
        samples = []
        for _ in range(n_steps):
            if rng.random() < 0.25:
                samples.append([0.0, 40.0, 300.0, False])
            else:
                mw = rng.uniform(0.0006, 0.004)
                price = rng.choice([-8.0, -2.0, 0.0, 25.0, 60.0])
                carbon = rng.choice([0.0, 120.0, 450.0])
                curtailed = rng.random() < 0.4
                samples.append([mw, price, carbon, curtailed])
        traces.append(make_trace(f"t{si}", samples, step_s=step))
        servers = [
            make_server(
                f"site{si}-srv{j}",
                core_count=rng.randint(2, 8),
                idle_watts=rng.uniform(20.0, 120.0),
                per_core_watts=rng.uniform(5.0, 25.0),
                ram_gb=rng.choice([8.0, 32.0, 64.0]),
            )
            for j in range(rng.randint(1, 2))
        ]
        if rng.random() < 0.3:
            servers.append(
                make_server(
                    f"site{si}-ram",
                    role="ram_dense",
                    core_count=1,
                    idle_watts=rng.uniform(10.0, 60.0),
                    per_core_watts=5.0,
                    ram_gb=256.0,
                    embodied_kgco2e=1000.0,
                    vintage_year=2022,
                )
            )
        fabric = make_fabric(
            switch_count=rng.randint(1, 3),
            watts_per_switch=rng.choice([0.0, 40.0, 100.0]),
        )
        sites.append(
            make_site(
                f"site{si}",
                f"t{si}",
                servers,
                fabric,
                cold_storage_gb=1000.0 if ample_cold else rng.uniform(2.0, 30.0),
                spill_gbps_per_server=rng.choice([1.0, 10.0]),
                overhead_fraction=rng.choice([0.0, 0.1]),
                iso_id=rng.choice(["ISO-A", "ISO-B"]),
            )
        )
    links = []
    for a in range(n_sites):
        for b in range(n_sites):
            if a != b and rng.random() < 0.8:
                links.append(
                    {
                        "from_site": f"site{a}",
                        "to_site": f"site{b}",
                        "gbps": rng.choice([10.0, 40.0]),
                        "latency_s": 0.05,
                        "per_vm_overhead_s": 0.05,
                    }
                )
    jobs = []
    for ji in range(rng.randint(1, 4)):
        arrival = step * rng.randint(0, max(0, n_steps // 2))
        deadline = rng.choice(
            [None, duration, step * rng.randint(n_steps // 2 + 1, n_steps)]
        )
        jobs.append(
            make_job(
                f"job{ji}",
                arrival_s=arrival,
                deadline_s=deadline,
                cpu_core_seconds=step * rng.randint(1, 6),
                ram_gb=rng.choice([0.0, 1.0, 4.0]),
                state_gb=rng.uniform(0.5, 15.0),
                max_parallelism=rng.randint(1, 4),
                n_tasks=rng.randint(1, 3),
                tier=rng.choice(["standard", "premium"]),
                min_renewable_fraction=1.0 if rng.random() < 0.2 else 0.0,
            )
        )
    policy = {
        "lead_window_steps": lead if lead is not None else rng.randint(2, 4),
        "progress_loss_on_blackout": True,
    }
    return make_config(
        traces,
        sites,
        jobs,
        links=links,
        duration_s=duration,
        seed=rng.randint(0, 10**6),
        policy=policy,
        forecast_method="oracle" if oracle else rng.choice(["persistence", "diurnal"]),
    )
