"""Elastic site fabric and inter-site transfer timing.

The in-site fabric is an aggregate pool of identical switches that can be
powered up and down with demand, subject to an always-on core set.  Links
between sites are fixed-capacity pipes with a latency and a small
per-VM handoff overhead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapacityExceeded

# Per-VM migration handoff cost: tens of milliseconds.
DEFAULT_PER_VM_OVERHEAD_S = 0.05


@dataclass(frozen=True)
class FabricSpec:
    switch_count: int
    watts_per_switch: float
    gbps_per_switch: float
    always_on_core_switches: int = 1

    def __post_init__(self):
        if self.switch_count < 1:
            raise ValueError("switch_count must be >= 1")
        if self.watts_per_switch < 0:
            raise ValueError("watts_per_switch must be >= 0")
        if self.gbps_per_switch <= 0:
            raise ValueError("gbps_per_switch must be > 0")
        if not (1 <= self.always_on_core_switches <= self.switch_count):
            raise ValueError("need 1 <= always_on_core_switches <= switch_count")

    @property
    def capacity_gbps(self) -> float:
        return self.switch_count * self.gbps_per_switch

    @property
    def floor_watts(self) -> float:
        return self.always_on_core_switches * self.watts_per_switch


@dataclass(frozen=True)
class InterSiteLink:
    from_site: str
    to_site: str
    gbps: float
    latency_s: float = 0.0
    per_vm_overhead_s: float = DEFAULT_PER_VM_OVERHEAD_S

    def __post_init__(self):
        if self.gbps <= 0:
            raise ValueError("gbps must be > 0")
        if self.latency_s < 0 or self.per_vm_overhead_s < 0:
            raise ValueError("latency_s and per_vm_overhead_s must be >= 0")


def scale_fabric(fabric: FabricSpec, required_gbps: float) -> tuple[int, float]:
    """Switches to enable (and their watts) for a bandwidth demand.

    At least the always-on core switches stay up; beyond that, whole
    switches are enabled to cover the demand.
    """
    if required_gbps < 0:
        raise ValueError("required_gbps must be >= 0")
    if required_gbps > fabric.capacity_gbps:
        raise CapacityExceeded(
            f"need {required_gbps} Gbps, fabric tops out at {fabric.capacity_gbps}"
        )
    needed = math.ceil(required_gbps / fabric.gbps_per_switch)
    enabled = min(fabric.switch_count, max(fabric.always_on_core_switches, needed))
    return enabled, enabled * fabric.watts_per_switch


def transfer_time(state_gb: float, link: InterSiteLink, vm_count: int) -> float:
    """Seconds to move a frozen job image across a link."""
    if state_gb < 0:
        raise ValueError("state_gb must be >= 0")
    if vm_count < 0:
        raise ValueError("vm_count must be >= 0")
    return state_gb * 8.0 / link.gbps + link.latency_s + vm_count * link.per_vm_overhead_s
