"""Site power pipeline: overhead, fabric floor, infra nodes, capacity."""

import pytest

from oppsim.fleet import ServerRole, ServerSpec, power_draw
from oppsim.network import FabricSpec
from oppsim.sites import SiteSpec, capacity_at, capacity_for_budget, usable_budget
from oppsim.traces import PowerSample, PowerTrace


def legacy(server_id, cores=8, idle=100.0, per_core=10.0, ram=64.0):
    return ServerSpec(
        server_id=server_id,
        vintage_year=2012,
        role=ServerRole.LEGACY_COMPUTE,
        core_count=cores,
        ram_gb=ram,
        idle_watts=idle,
        per_core_watts=per_core,
    )


def ram_dense(server_id="ramnode", idle=50.0, ram=512.0):
    return ServerSpec(
        server_id=server_id,
        vintage_year=2023,
        role=ServerRole.RAM_DENSE,
        core_count=1,
        ram_gb=ram,
        idle_watts=idle,
        per_core_watts=5.0,
        embodied_kgco2e=800.0,
    )


def site(servers, overhead=0.0, fabric=None):
    return SiteSpec(
        site_id="s",
        iso_id="ISO",
        servers=tuple(servers),
        fabric=fabric
        or FabricSpec(
            switch_count=1,
            watts_per_switch=0.0,
            gbps_per_switch=100.0,
            always_on_core_switches=1,
        ),
        cold_storage_gb=100.0,
        trace_ref="t",
        overhead_fraction=overhead,
        spill_gbps_per_server=1.0,
    )


def trace(mw):
    return PowerTrace("s", 0.0, 300.0, (PowerSample(mw, 0.0, 0.0),))


def test_usable_budget_arithmetic():
    """1 MW raw, 10% overhead, 50 kW fabric leaves 850 kW for servers."""
    s = site([legacy("a")], overhead=0.1)
    assert usable_budget(s, trace(1.0), 0.0, fabric_watts=50_000.0) == 850_000.0


def test_usable_budget_floors_at_zero():
    s = site([legacy("a")], overhead=0.1)
    assert usable_budget(s, trace(0.0), 0.0, fabric_watts=50_000.0) == 0.0


def test_usable_budget_identity_when_lossless():
    s = site([legacy("a")], overhead=0.0)
    assert usable_budget(s, trace(0.5), 0.0, fabric_watts=0.0) == 500_000.0


def test_capacity_zero_budget():
    cap = capacity_for_budget(site([legacy("a")]), 0.0)
    assert (cap.active_cores, cap.ram_gb, cap.watts_used) == (0, 0.0, 0.0)


def test_capacity_budget_500_three_servers():
    """The 3x(100 W + 10 W/core x 8) fleet fits 20 cores in 500 W."""
    s = site([legacy("a"), legacy("b"), legacy("c")])
    cap = capacity_for_budget(s, 500.0)
    assert cap.active_cores == 20
    assert cap.watts_used == pytest.approx(500.0)


def test_capacity_full_fleet():
    fleet = [legacy("a"), legacy("b", cores=4, ram=32.0)]
    s = site(fleet)
    full = sum(power_draw(x, x.core_count) for x in fleet)
    cap = capacity_for_budget(s, full)
    assert cap.active_cores == 12
    assert cap.ram_gb == 96.0


def test_infra_idle_comes_off_the_top():
    """A RAM node's idle draw is reserved before compute activation."""
    s = site([legacy("a"), ram_dense(idle=50.0)])
    with_infra = capacity_for_budget(s, 500.0, workload_present=True)
    without = capacity_for_budget(s, 450.0, workload_present=False)
    assert with_infra.active_cores == without.active_cores
    assert with_infra.watts_used == pytest.approx(without.watts_used + 50.0)
    assert with_infra.ram_gb == without.ram_gb + 512.0
    assert with_infra.infra_powered


def test_budget_below_infra_idle_powers_nothing():
    s = site([legacy("a"), ram_dense(idle=50.0)])
    cap = capacity_for_budget(s, 49.0, workload_present=True)
    assert cap.active_cores == 0
    assert cap.watts_used == 0.0
    assert not cap.infra_powered


def test_capacity_at_wires_power_pipeline():
    s = site([legacy("a")], overhead=0.1)
    cap = capacity_at(s, trace(0.0005), 0.0, fabric_watts=50.0)
    expect = capacity_for_budget(s, 0.0005 * 1e6 * 0.9 - 50.0)
    assert cap.active_cores == expect.active_cores
    assert cap.watts_used == expect.watts_used


def test_ram_counts_only_powered_servers():
    s = site([legacy("a", ram=64.0), legacy("b", ram=64.0)])
    cap = capacity_for_budget(s, 180.0)
    assert cap.active_cores == 8
    assert cap.ram_gb == 64.0
