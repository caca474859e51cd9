"""A site: fleet + fabric + cold storage behind one power trace.

Power flows through a fixed pipeline: raw trace power, minus the
cooling/misc overhead fraction, minus fabric draw, is the budget for
servers.  Infrastructure nodes (RAM-dense and flash-dense) power up first
whenever any workload is present -- they serve spill and images -- and
compute cores are then activated on the legacy fleet with what remains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fleet import ActivationPlan, ServerRole, ServerSpec, activate_for_budget
from .network import FabricSpec
from .traces import PowerTrace, power_at

DEFAULT_OVERHEAD_FRACTION = 0.1
# Aggregate fabric demand charged per powered compute server.
DEFAULT_SPILL_GBPS_PER_SERVER = 10.0


@dataclass(frozen=True)
class SiteSpec:
    site_id: str
    iso_id: str
    servers: tuple[ServerSpec, ...]
    fabric: FabricSpec
    cold_storage_gb: float = 0.0
    trace_ref: str = ""
    overhead_fraction: float = DEFAULT_OVERHEAD_FRACTION
    spill_gbps_per_server: float = DEFAULT_SPILL_GBPS_PER_SERVER

    def __post_init__(self):
        if not self.site_id or not self.iso_id:
            raise ValueError("site_id and iso_id must be non-empty")
        if not self.servers:
            raise ValueError(f"site {self.site_id} needs at least one server")
        ids = [s.server_id for s in self.servers]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate server ids at site {self.site_id}")
        if not (0.0 <= self.overhead_fraction < 1.0):
            raise ValueError("overhead_fraction must be in [0, 1)")
        if self.cold_storage_gb < 0:
            raise ValueError("cold_storage_gb must be >= 0")
        if self.spill_gbps_per_server < 0:
            raise ValueError("spill_gbps_per_server must be >= 0")

    @property
    def compute_servers(self) -> tuple[ServerSpec, ...]:
        return tuple(s for s in self.servers if s.role == ServerRole.LEGACY_COMPUTE)

    @property
    def infra_servers(self) -> tuple[ServerSpec, ...]:
        return tuple(s for s in self.servers if s.role != ServerRole.LEGACY_COMPUTE)

    @property
    def infra_idle_watts(self) -> float:
        return sum(s.idle_watts for s in self.infra_servers)


@dataclass(frozen=True)
class SiteCapacity:
    """What a site can host at an instant, given its power."""

    active_cores: int
    ram_gb: float
    watts_used: float
    plan: ActivationPlan = field(default_factory=ActivationPlan)
    infra_powered: bool = False


def usable_budget(
    site: SiteSpec, trace: PowerTrace, t_s: float, fabric_watts: float = 0.0
) -> float:
    """Watts left for servers after overhead and fabric, floored at zero."""
    raw = power_at(trace, t_s) * 1e6
    return max(0.0, raw * (1.0 - site.overhead_fraction) - fabric_watts)


def capacity_at(
    site: SiteSpec,
    trace: PowerTrace,
    t_s: float,
    fabric_watts: float = 0.0,
    workload_present: bool = True,
) -> SiteCapacity:
    """Cores/RAM the site can offer at time t under its power pipeline.

    Infrastructure nodes take their idle draw off the top when a workload
    is present; if the budget cannot even cover that, the site offers
    nothing.  RAM counts servers holding at least one active core plus
    powered RAM-dense nodes.
    """
    budget = usable_budget(site, trace, t_s, fabric_watts)
    return capacity_for_budget(site, budget, workload_present)


def capacity_for_budget(
    site: SiteSpec, budget_watts: float, workload_present: bool = True
) -> SiteCapacity:
    """capacity_at with the power pipeline already applied."""
    infra_idle = site.infra_idle_watts if workload_present else 0.0
    if workload_present and budget_watts < infra_idle:
        return SiteCapacity(0, 0.0, 0.0, ActivationPlan(), False)
    plan = activate_for_budget(list(site.compute_servers), budget_watts - infra_idle)
    ram = sum(
        s.ram_gb for s in site.compute_servers if plan.cores_by_server.get(s.server_id, 0) > 0
    )
    infra_powered = workload_present
    if infra_powered:
        ram += sum(s.ram_gb for s in site.infra_servers if s.role == ServerRole.RAM_DENSE)
    return SiteCapacity(
        active_cores=plan.total_active_cores,
        ram_gb=ram,
        watts_used=plan.total_watts + infra_idle,
        plan=plan,
        infra_powered=infra_powered,
    )
