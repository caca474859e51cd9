"""Per-task energy attribution and per-job carbon/cost rollups.

Attribution rule for one server over one interval: a task is billed its
own cores' draw plus a share of the server's idle draw proportional to
its cores among all cores assigned on that server.  Energy drawn during
opportunity samples counts as renewable and carries zero grid carbon;
everything else is multiplied by the grid's carbon intensity.  Cost
applies to all energy at the interval's price, so negative prices pay
the platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fleet import ServerSpec, embodied_rate
from .traces import PowerSample
from .workload import JobSpec

JOULES_PER_KWH = 3.6e6
JOULES_PER_MWH = 3.6e9


@dataclass(frozen=True)
class LedgerEntry:
    job_id: str
    task_id: str
    site_id: str
    t0_s: float
    t1_s: float
    active_cores: int
    op_energy_j: float
    opportunity_energy_j: float
    grid_carbon_kgco2e: float
    embodied_kgco2e: float
    cost_usd: float

    def __post_init__(self):
        if not (self.t1_s > self.t0_s):
            raise ValueError(f"interval [{self.t0_s}, {self.t1_s}) is empty")
        if not (self.op_energy_j >= self.opportunity_energy_j >= 0.0):
            raise ValueError(
                f"need op_energy >= opportunity_energy >= 0, got "
                f"{self.op_energy_j} / {self.opportunity_energy_j}"
            )


LEDGER_HEADER = [
    "job_id",
    "task_id",
    "site_id",
    "t0_s",
    "t1_s",
    "active_cores",
    "op_energy_j",
    "opportunity_energy_j",
    "grid_carbon_kgco2e",
    "embodied_kgco2e",
    "cost_usd",
]


def attribute(
    job_id: str,
    task_id: str,
    site_id: str,
    t0_s: float,
    t1_s: float,
    cores_on_server: int,
    server_active_cores: int,
    server: ServerSpec,
    sample: PowerSample,
    extra_embodied_kgco2e: float = 0.0,
) -> LedgerEntry:
    """Bill one task's share of one server for one constant-power interval.

    ``server_active_cores`` is everything assigned on the server, so the
    idle share is cores_on_server / server_active_cores of the idle draw.
    ``extra_embodied_kgco2e`` carries this task's share of any shared
    infrastructure nodes' amortized manufacturing carbon.
    """
    dt = t1_s - t0_s
    if dt <= 0:
        raise ValueError("interval must have positive length")
    if not (0 < cores_on_server <= server_active_cores):
        raise ValueError("need 0 < cores_on_server <= server_active_cores")
    share = cores_on_server / server_active_cores
    op_j = (cores_on_server * server.per_core_watts + server.idle_watts * share) * dt
    opportunity_j = op_j if sample.is_opportunity else 0.0
    grid_j = op_j - opportunity_j
    grid_kg = grid_j * sample.carbon_gco2_per_kwh / JOULES_PER_KWH / 1000.0
    embodied = embodied_rate(server) * (dt / 3600.0) * share + extra_embodied_kgco2e
    cost = op_j * sample.price_usd_per_mwh / JOULES_PER_MWH
    return LedgerEntry(
        job_id=job_id,
        task_id=task_id,
        site_id=site_id,
        t0_s=t0_s,
        t1_s=t1_s,
        active_cores=cores_on_server,
        op_energy_j=op_j,
        opportunity_energy_j=opportunity_j,
        grid_carbon_kgco2e=grid_kg,
        embodied_kgco2e=embodied,
        cost_usd=cost,
    )


def merge_entries(entries: list[LedgerEntry]) -> LedgerEntry:
    """Sum same-task entries spanning several servers into one row."""
    first = entries[0]
    if len(entries) == 1:
        return first
    return LedgerEntry(
        job_id=first.job_id,
        task_id=first.task_id,
        site_id=first.site_id,
        t0_s=first.t0_s,
        t1_s=first.t1_s,
        active_cores=sum(e.active_cores for e in entries),
        op_energy_j=math.fsum(e.op_energy_j for e in entries),
        opportunity_energy_j=math.fsum(e.opportunity_energy_j for e in entries),
        grid_carbon_kgco2e=math.fsum(e.grid_carbon_kgco2e for e in entries),
        embodied_kgco2e=math.fsum(e.embodied_kgco2e for e in entries),
        cost_usd=math.fsum(e.cost_usd for e in entries),
    )


@dataclass(frozen=True)
class JobSummary:
    job_id: str
    total_energy_j: float
    opportunity_energy_j: float
    renewable_fraction: float | None
    grid_carbon_kgco2e: float
    embodied_kgco2e: float
    cost_usd: float
    completion_s: float | None
    deadline_met: bool | None
    slo_pass: bool | None
    status: str


def summarize(
    job: JobSpec,
    entries: list[LedgerEntry],
    completion_s: float | None = None,
    status: str = "done",
) -> JobSummary:
    """Roll a job's ledger up to totals and an SLO verdict.

    A job that never completed has no SLO verdict (``slo_pass`` None):
    an unfinished job can never count as a compliant one.
    """
    mine = [e for e in entries if e.job_id == job.job_id]
    total = math.fsum(e.op_energy_j for e in mine)
    opp = math.fsum(e.opportunity_energy_j for e in mine)
    grid_kg = math.fsum(e.grid_carbon_kgco2e for e in mine)
    embodied = math.fsum(e.embodied_kgco2e for e in mine)
    cost = math.fsum(e.cost_usd for e in mine)
    fraction = (opp / total) if total > 0 else None
    if completion_s is None:
        deadline_met = None
        slo_pass = None
    else:
        deadline_met = completion_s <= job.deadline_s
        frac_ok = (fraction if fraction is not None else 1.0) >= job.slo.min_renewable_fraction
        carbon_ok = job.slo.max_kgco2e is None or grid_kg <= job.slo.max_kgco2e
        slo_pass = frac_ok and carbon_ok
    return JobSummary(
        job_id=job.job_id,
        total_energy_j=total,
        opportunity_energy_j=opp,
        renewable_fraction=fraction,
        grid_carbon_kgco2e=grid_kg,
        embodied_kgco2e=embodied,
        cost_usd=cost,
        completion_s=completion_s,
        deadline_met=deadline_met,
        slo_pass=slo_pass,
        status=status,
    )
