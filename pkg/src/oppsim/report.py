"""Result assembly and the four output files.

A finished run emits:

* ``report.json``  -- per-job summaries, per-site energy totals, platform
  totals, the audit counters, modeling assumptions, and the exact input
  config (with the effective seed), rendered with sorted keys so reruns
  are byte-identical;
* ``series.csv``   -- one row per site per trace step with power, price,
  carbon, and occupancy columns;
* ``ledger.csv``   -- every attributed (job, task, interval) energy row;
* ``events.csv``   -- the processed event log.

Assembly re-checks energy conservation: the sum of job-attributed,
overhead, and fabric energy must equal the metered site total.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict

from . import __version__
from .accounting import LEDGER_HEADER, summarize
from .engine import EVENTS_HEADER, SERIES_HEADER, Engine

CONSERVATION_RTOL = 1e-9


def _finite_or_none(v: float | None) -> float | None:
    if v is None or math.isinf(v) or math.isnan(v):
        return None
    return v


def build_report(eng: Engine) -> dict:
    """Roll an engine's meters and ledger up into the report document."""
    cfg = eng.cfg
    by_site_op: dict[str, list[float]] = {s: [] for s in eng.sites}
    for e in eng.ledger:
        by_site_op[e.site_id].append(e.op_energy_j)

    sites_out = []
    for site_id in sorted(eng.sites):
        st = eng.sites[site_id]
        metered = math.fsum(st.metered_j)
        job_energy = math.fsum(by_site_op[site_id])
        overhead = math.fsum(st.overhead_j)
        fabric = math.fsum(st.fabric_j)
        drift = abs(metered - (job_energy + overhead + fabric))
        if drift > CONSERVATION_RTOL * max(1.0, metered):
            raise RuntimeError(
                f"{site_id}: energy books do not balance "
                f"(metered {metered} J vs attributed {job_energy + overhead + fabric} J)"
            )
        sites_out.append(
            {
                "site_id": site_id,
                "iso_id": st.spec.iso_id,
                "metered_energy_j": metered,
                "job_energy_j": job_energy,
                "overhead_energy_j": overhead,
                "fabric_energy_j": fabric,
                "opportunity_energy_j": math.fsum(st.opportunity_j),
                "overhead_grid_kgco2e": math.fsum(st.overhead_kg),
                "overhead_cost_usd": math.fsum(st.overhead_cost),
                "overhead_embodied_kgco2e": math.fsum(st.overhead_embodied),
            }
        )

    jobs_out = []
    for jid in sorted(eng.jobs):
        job = eng.jobs[jid]
        summary = summarize(
            job.spec,
            eng.ledger,
            completion_s=job.completion_s,
            status=job.status.value,
        )
        d = asdict(summary)
        d["site_id"] = job.site_id
        d["tier"] = job.spec.tier.value
        d["arrival_s"] = job.spec.arrival_s
        d["deadline_s"] = _finite_or_none(job.spec.deadline_s)
        d["killed_reason"] = job.killed_reason
        jobs_out.append(d)

    total_metered = math.fsum(s["metered_energy_j"] for s in sites_out)
    total_opp = math.fsum(s["opportunity_energy_j"] for s in sites_out)
    totals = {
        "metered_energy_j": total_metered,
        "job_energy_j": math.fsum(s["job_energy_j"] for s in sites_out),
        "overhead_energy_j": math.fsum(s["overhead_energy_j"] for s in sites_out),
        "fabric_energy_j": math.fsum(s["fabric_energy_j"] for s in sites_out),
        "opportunity_energy_j": total_opp,
        "renewable_share": (total_opp / total_metered) if total_metered > 0 else None,
        "grid_carbon_kgco2e": math.fsum(j["grid_carbon_kgco2e"] for j in jobs_out)
        + math.fsum(s["overhead_grid_kgco2e"] for s in sites_out),
        "embodied_kgco2e": math.fsum(j["embodied_kgco2e"] for j in jobs_out)
        + math.fsum(s["overhead_embodied_kgco2e"] for s in sites_out),
        "cost_usd": math.fsum(j["cost_usd"] for j in jobs_out)
        + math.fsum(s["overhead_cost_usd"] for s in sites_out),
        "jobs_total": len(jobs_out),
        "jobs_done": sum(1 for j in jobs_out if j["status"] == "done"),
        "jobs_deadline_met": sum(1 for j in jobs_out if j["deadline_met"] is True),
        "jobs_slo_pass": sum(1 for j in jobs_out if j["slo_pass"] is True),
        "jobs_killed": sum(1 for j in jobs_out if j["status"] == "killed"),
        "jobs_rejected": sum(1 for j in jobs_out if j["status"] == "rejected"),
    }

    assumptions = {
        "opportunity_power": "a sample is opportunity when curtailed or priced <= 0 $/MWh",
        "grid_carbon": "only non-opportunity energy carries grid carbon",
        "idle_attribution": "server idle draw split across tasks by their share of assigned cores",
        "infra_embodied": "infrastructure embodied carbon split across tasks by width share",
        "dark_site": "infrastructure and fabric draw are metered only while jobs are resident",
        "cost": "all energy is billed at the step price, negative prices credit the platform",
        "step_hold": "trace samples hold constant across each step",
    }

    return {
        "schema_version": 1,
        "tool": {"name": "oppsim", "version": __version__},
        "seed": cfg.seed,
        "forecast_method": cfg.forecast_method.value,
        "start_epoch_s": cfg.start_epoch_s,
        "duration_s": cfg.duration_s,
        "step_s": cfg.step_s,
        "policy": {
            "lead_window_steps": cfg.policy.lead_window_steps,
            "safety_margin_s": cfg.policy.safety_margin_s,
            "progress_loss_on_blackout": cfg.policy.progress_loss_on_blackout,
        },
        "jobs": jobs_out,
        "sites": sites_out,
        "totals": totals,
        "audit": dict(eng.audit),
        "assumptions": assumptions,
        "config": cfg.raw,
    }


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_outputs(eng: Engine, outdir: str) -> dict:
    """Write report.json, series.csv, ledger.csv, and events.csv."""
    os.makedirs(outdir, exist_ok=True)
    report = build_report(eng)
    with open(os.path.join(outdir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(render_report(report))
    with open(os.path.join(outdir, "series.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_HEADER)
        w.writerows(eng.series_rows)
    with open(os.path.join(outdir, "ledger.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LEDGER_HEADER)
        for e in eng.ledger:
            w.writerow([getattr(e, name) for name in LEDGER_HEADER])
    with open(os.path.join(outdir, "events.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENTS_HEADER)
        for t, seq, kind, payload in eng.events_log:
            w.writerow([t, seq, kind, json.dumps(payload, sort_keys=True, separators=(",", ":"))])
    return report
