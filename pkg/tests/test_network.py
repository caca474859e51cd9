"""Switch fabric scaling and inter-site transfer timing."""

import pytest

from oppsim.errors import CapacityExceeded
from oppsim.network import FabricSpec, InterSiteLink, scale_fabric, transfer_time


def fabric(switches=10, watts=100.0, gbps=100.0, always_on=1):
    return FabricSpec(
        switch_count=switches,
        watts_per_switch=watts,
        gbps_per_switch=gbps,
        always_on_core_switches=always_on,
    )


def test_scale_fabric_floor():
    enabled, watts = scale_fabric(fabric(always_on=2), 0.0)
    assert enabled == 2
    assert watts == 200.0


def test_scale_fabric_rounds_up_switches():
    enabled, watts = scale_fabric(fabric(always_on=2), 350.0)
    assert enabled == 4
    assert watts == 400.0


def test_scale_fabric_exact_boundary():
    enabled, _ = scale_fabric(fabric(), 1000.0)
    assert enabled == 10
    with pytest.raises(CapacityExceeded):
        scale_fabric(fabric(), 1001.0)


def test_fabric_validation():
    with pytest.raises(ValueError):
        fabric(switches=0)
    with pytest.raises(ValueError):
        fabric(always_on=11)
    assert fabric(always_on=3).floor_watts == 300.0
    assert fabric().capacity_gbps == 1000.0


def link(gbps=10.0, latency=0.05, per_vm=0.05):
    return InterSiteLink("a", "b", gbps=gbps, latency_s=latency, per_vm_overhead_s=per_vm)


def test_transfer_time_worked_case():
    """10 GB over 10 Gbps + 50 ms latency + one VM's 50 ms = 8.10 s."""
    assert transfer_time(10.0, link(), 1) == pytest.approx(8.10)


def test_transfer_time_empty_payload():
    assert transfer_time(0.0, link(latency=0.07, per_vm=0.05), 0) == pytest.approx(0.07)


def test_transfer_time_linear_in_state():
    t1 = transfer_time(4.0, link(), 2)
    t2 = transfer_time(8.0, link(), 2)
    base = link().latency_s + 2 * link().per_vm_overhead_s
    assert t2 - base == pytest.approx(2.0 * (t1 - base))


def test_link_validation():
    with pytest.raises(ValueError):
        InterSiteLink("a", "b", gbps=0.0)
    with pytest.raises(ValueError):
        InterSiteLink("a", "b", gbps=1.0, latency_s=-1.0)
