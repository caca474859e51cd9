"""Server fleet: power curves, budgeted activation, embodied carbon.

A server draws ``idle_watts + active_cores * per_core_watts`` when powered
on and nothing when fully off, so watts-per-core falls as more cores are
loaded onto the same box -- the reason mid-life hardware is worth reviving
when energy is free.  Second-hand ("legacy") servers carry zero embodied
carbon: their manufacturing footprint was paid off in their first life.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import CoreOverflow


class ServerRole(str, enum.Enum):
    LEGACY_COMPUTE = "legacy_compute"
    RAM_DENSE = "ram_dense"
    FLASH_DENSE = "flash_dense"


# Default amortization horizon for new hardware: 5 years of hours.
DEFAULT_AMORTIZATION_HOURS = 43800.0


@dataclass(frozen=True)
class ServerSpec:
    server_id: str
    vintage_year: int
    role: ServerRole
    core_count: int
    ram_gb: float
    idle_watts: float
    per_core_watts: float
    nic_gbps: tuple[float, ...] = ()
    embodied_kgco2e: float = 0.0
    amortization_hours: float = DEFAULT_AMORTIZATION_HOURS

    def __post_init__(self):
        if not self.server_id:
            raise ValueError("server_id must be non-empty")
        if self.core_count < 1:
            raise ValueError(f"core_count must be >= 1, got {self.core_count}")
        if self.ram_gb < 0:
            raise ValueError("ram_gb must be >= 0")
        if self.idle_watts < 0:
            raise ValueError("idle_watts must be >= 0")
        if self.per_core_watts <= 0:
            raise ValueError("per_core_watts must be > 0")
        if self.embodied_kgco2e < 0:
            raise ValueError("embodied_kgco2e must be >= 0")
        if self.amortization_hours <= 0:
            raise ValueError("amortization_hours must be > 0")
        if any(g <= 0 for g in self.nic_gbps):
            raise ValueError("nic_gbps entries must be > 0")
        if self.role == ServerRole.LEGACY_COMPUTE and self.embodied_kgco2e != 0:
            raise ValueError(
                "legacy compute servers carry zero embodied carbon "
                f"(got {self.embodied_kgco2e} kg for {self.server_id})"
            )


@dataclass(frozen=True)
class ActivationPlan:
    """Active core counts per server under a power budget."""

    cores_by_server: dict[str, int] = field(default_factory=dict)
    total_watts: float = 0.0
    total_active_cores: int = 0


def power_draw(server: ServerSpec, active_cores: int, powered_on: bool = True) -> float:
    """Instantaneous draw of one server in watts."""
    if active_cores < 0:
        raise ValueError(f"active_cores must be >= 0, got {active_cores}")
    if active_cores > server.core_count:
        raise CoreOverflow(
            f"{server.server_id}: {active_cores} cores > {server.core_count}"
        )
    if not powered_on:
        if active_cores > 0:
            raise ValueError("a powered-off server cannot run cores")
        return 0.0
    return server.idle_watts + active_cores * server.per_core_watts


def _core_cost(server: ServerSpec, n: int) -> float:
    return 0.0 if n == 0 else server.idle_watts + n * server.per_core_watts


def activate_for_budget(servers: list[ServerSpec], budget_watts: float) -> ActivationPlan:
    """Choose active core counts maximizing total cores within a power budget.

    Exact dynamic program over (server, core-count) choices: for each
    achievable total core count it keeps the cheapest wattage, then picks
    the largest affordable count.  Servers are considered in ascending
    server_id order and ties resolve to the fewest cores on the
    later-considered server, so the plan is deterministic.
    """
    if budget_watts < 0:
        raise ValueError(f"budget_watts must be >= 0, got {budget_watts}")
    order = sorted(servers, key=lambda s: s.server_id)
    if len({s.server_id for s in order}) != len(order):
        raise ValueError("duplicate server_id in fleet")
    total_cores = sum(s.core_count for s in order)
    inf = float("inf")
    best = [0.0] + [inf] * total_cores
    # choose[i][k]: cores put on order[i] in the cheapest plan reaching k.
    choose: list[list[int]] = []
    for srv in order:
        prev = best
        cur = [inf] * (total_cores + 1)
        pick = [0] * (total_cores + 1)
        for k in range(total_cores + 1):
            for n in range(0, min(srv.core_count, k) + 1):
                if prev[k - n] == inf:
                    continue
                w = prev[k - n] + _core_cost(srv, n)
                if w < cur[k]:
                    cur[k] = w
                    pick[k] = n
        best = cur
        choose.append(pick)

    k = max((c for c in range(total_cores + 1) if best[c] <= budget_watts), default=0)
    cores: dict[str, int] = {}
    rem = k
    for i in range(len(order) - 1, -1, -1):
        n = choose[i][rem]
        cores[order[i].server_id] = n
        rem -= n
    plan_cores = {srv.server_id: cores[srv.server_id] for srv in order}
    watts = 0.0
    for srv in order:
        watts += _core_cost(srv, plan_cores[srv.server_id])
    return ActivationPlan(plan_cores, watts, k)


def embodied_rate(server: ServerSpec) -> float:
    """Amortized manufacturing carbon in kgCO2e per powered hour."""
    if server.role == ServerRole.LEGACY_COMPUTE:
        return 0.0
    return server.embodied_kgco2e / server.amortization_hours


def ram_spill_feasible(
    ram_node: ServerSpec, attached_count: int, per_server_gbps: float
) -> bool:
    """Can one RAM node absorb spill traffic from N attached servers?"""
    if attached_count < 0:
        raise ValueError("attached_count must be >= 0")
    if per_server_gbps < 0:
        raise ValueError("per_server_gbps must be >= 0")
    return attached_count * per_server_gbps <= sum(ram_node.nic_gbps)
