"""Placement, migration-deadline, and evacuation planning decisions."""

import pytest

from oppsim.errors import AlreadyLate, InfeasibleSlo
from oppsim.network import InterSiteLink
from oppsim.scheduler import (
    ActionKind,
    JobLocation,
    JobView,
    LocationKind,
    PlacementState,
    PolicyKnobs,
    SchedulerAction,
    SiteView,
    admit,
    plan_migration_deadline,
    plan_step,
)
from oppsim.workload import JobTier


def site_view(
    site_id="A",
    iso_id="ISO-1",
    spare_cores=4,
    pred_cores=(4, 4),
    carbon=(0.0, 0.0),
    price=(0.0, 0.0),
    opportunity_now=True,
    resident_count=0,
    spare_ram_gb=256.0,
    cold_free_gb=500.0,
    step_s=60.0,
):
    return SiteView(
        site_id=site_id,
        iso_id=iso_id,
        step_s=step_s,
        spare_cores=spare_cores,
        spare_ram_gb=spare_ram_gb,
        cold_free_gb=cold_free_gb,
        opportunity_now=opportunity_now,
        has_opportunity_ever=True,
        pred_cores=tuple(pred_cores),
        pred_eff_carbon=tuple(carbon),
        pred_price=tuple(price),
        resident_count=resident_count,
    )


def job_view(
    job_id="j",
    kind=LocationKind.QUEUED,
    site_id=None,
    tier=JobTier.STANDARD,
    strict=False,
    state_gb=10.0,
    vm_count=1,
    ram_needed_gb=1.0,
    slack_s=1000.0,
    freeze_seq=-1,
):
    return JobView(
        job_id=job_id,
        tier=tier,
        strict_renewable=strict,
        location=JobLocation(kind, site_id=site_id),
        slack_s=slack_s,
        state_gb=state_gb,
        vm_count=vm_count,
        ram_needed_gb=ram_needed_gb,
        arrival_s=0.0,
        deadline_s=1e9,
        freeze_seq=freeze_seq,
    )


def empty_state():
    return PlacementState(locations={}, committed_cores={}, committed_ram_gb={})


POLICY = PolicyKnobs(lead_window_steps=2, safety_margin_s=0.0)


def test_admit_single_feasible_site():
    action = admit(job_view(), [site_view()], 0.0)
    assert action.kind == ActionKind.START
    assert action.site_id == "A"


def test_admit_prefers_lower_carbon():
    clean = site_view("B", carbon=(0.0, 0.0))
    dirty = site_view("A", carbon=(400.0, 400.0))
    action = admit(job_view(), [dirty, clean], 0.0)
    assert action.site_id == "B"


def test_admit_breaks_carbon_tie_on_price_then_id():
    cheap = site_view("C", carbon=(100.0, 100.0), price=(1.0, 1.0))
    dear = site_view("B", carbon=(100.0, 100.0), price=(9.0, 9.0))
    assert admit(job_view(), [dear, cheap], 0.0).site_id == "C"
    twin = site_view("A", carbon=(100.0, 100.0), price=(1.0, 1.0))
    assert admit(job_view(), [cheap, twin], 0.0).site_id == "A"


def test_admit_defers_when_full():
    action = admit(job_view(), [site_view(spare_cores=0)], 0.0)
    assert action.kind == ActionKind.DEFER


def test_admit_defers_on_predicted_blackout():
    action = admit(job_view(), [site_view(pred_cores=(4, 0))], 0.0)
    assert action.kind == ActionKind.DEFER


def test_admit_strict_needs_opportunity_now():
    grid_now = site_view(opportunity_now=False)
    assert admit(job_view(strict=True), [grid_now], 0.0).kind == ActionKind.DEFER
    assert admit(job_view(strict=True), [site_view()], 0.0).kind == ActionKind.START


def test_admit_strict_rejects_when_no_opportunity_ever():
    never = SiteView(
        site_id="A",
        iso_id="I",
        step_s=60.0,
        spare_cores=4,
        spare_ram_gb=64.0,
        cold_free_gb=100.0,
        opportunity_now=False,
        has_opportunity_ever=False,
        pred_cores=(4, 4),
        pred_eff_carbon=(100.0, 100.0),
        pred_price=(10.0, 10.0),
    )
    with pytest.raises(InfeasibleSlo):
        admit(job_view(strict=True), [never], 0.0)


def ten_gbps(frm="A", to="B"):
    return InterSiteLink(frm, to, gbps=10.0, latency_s=0.0, per_vm_overhead_s=0.05)


def test_migration_deadline_worked_case():
    """Loss at 100 s, 10 GB at 10 Gbps, one VM: start by 91.95 s."""
    latest = plan_migration_deadline(10.0, 1, ten_gbps(), 100.0, 0.0)
    assert latest == pytest.approx(91.95)


def test_migration_deadline_zero_size():
    link = InterSiteLink("A", "B", gbps=10.0, latency_s=0.0, per_vm_overhead_s=0.0)
    assert plan_migration_deadline(0.0, 0, link, 100.0, 7.0) == pytest.approx(93.0)


def test_migration_deadline_already_late():
    link = InterSiteLink("A", "B", gbps=10.0, latency_s=0.0, per_vm_overhead_s=0.0)
    with pytest.raises(AlreadyLate):
        plan_migration_deadline(10.0, 0, link, 101.0, 0.0, now_s=100.0)


def test_plan_step_no_shortfall_is_empty():
    views = [site_view("A", resident_count=2, pred_cores=(4, 4))]
    jobs = [
        job_view("r1", LocationKind.RUNNING, "A"),
        job_view("r2", LocationKind.RUNNING, "A"),
    ]
    assert plan_step(empty_state(), views, jobs, {}, 0.0, POLICY) == []


def test_plan_step_migrates_before_power_loss():
    """Source dies next step; same-ISO target exists: one timely migrate."""
    a = site_view("A", resident_count=1, pred_cores=(1, 0), spare_cores=0)
    b = site_view("B", pred_cores=(2, 2))
    jobs = [job_view("j1", LocationKind.RUNNING, "A", state_gb=10.0, vm_count=1)]
    links = {("A", "B"): ten_gbps()}
    actions = plan_step(empty_state(), [a, b], jobs, links, 0.0, POLICY)
    assert len(actions) == 1
    act = actions[0]
    assert act.kind == ActionKind.MIGRATE
    assert (act.from_site, act.to_site) == ("A", "B")
    assert act.start_s <= 60.0 - 8.05


def test_plan_step_standard_freezes_without_same_iso_target():
    a = site_view("A", iso_id="ISO-1", resident_count=1, pred_cores=(1, 0))
    b = site_view("B", iso_id="ISO-2", pred_cores=(2, 2))
    links = {("A", "B"): ten_gbps()}

    standard = [job_view("j1", LocationKind.RUNNING, "A")]
    acts = plan_step(empty_state(), [a, b], standard, links, 0.0, POLICY)
    assert [a.kind for a in acts] == [ActionKind.FREEZE]

    premium = [job_view("j1", LocationKind.RUNNING, "A", tier=JobTier.PREMIUM)]
    acts = plan_step(empty_state(), [a, b], premium, links, 0.0, POLICY)
    assert [a.kind for a in acts] == [ActionKind.MIGRATE]
    assert acts[0].to_site == "B"


def test_plan_step_freezes_when_migration_already_late():
    """A target that cannot be reached in time is no target at all."""
    a = site_view("A", resident_count=1, pred_cores=(1, 0))
    b = site_view("B", pred_cores=(2, 2))
    links = {("A", "B"): InterSiteLink("A", "B", gbps=0.1, latency_s=0.0)}
    jobs = [job_view("j1", LocationKind.RUNNING, "A", state_gb=10.0)]
    acts = plan_step(empty_state(), [a, b], jobs, links, 0.0, POLICY)
    assert [a.kind for a in acts] == [ActionKind.FREEZE]


def test_plan_step_evacuates_least_slack_first():
    a = site_view("A", resident_count=2, pred_cores=(2, 1))
    jobs = [
        job_view("late", LocationKind.RUNNING, "A", slack_s=50.0),
        job_view("roomy", LocationKind.RUNNING, "A", slack_s=5000.0),
    ]
    acts = plan_step(empty_state(), [a], jobs, {}, 0.0, POLICY)
    assert len(acts) == 1
    assert acts[0].job_id == "late"
    assert acts[0].kind == ActionKind.FREEZE


def test_plan_step_resumes_premium_first():
    a = site_view("A", spare_cores=1, pred_cores=(2, 2))
    jobs = [
        job_view("old", LocationKind.FROZEN, "A", freeze_seq=0),
        job_view("vip", LocationKind.FROZEN, "A", tier=JobTier.PREMIUM, freeze_seq=5),
    ]
    acts = plan_step(empty_state(), [a], jobs, {}, 0.0, POLICY)
    assert [(a.kind, a.job_id) for a in acts] == [(ActionKind.RESUME, "vip")]


def test_plan_step_resume_fifo_within_tier():
    a = site_view("A", spare_cores=2, pred_cores=(4, 4))
    jobs = [
        job_view("second", LocationKind.FROZEN, "A", freeze_seq=7),
        job_view("first", LocationKind.FROZEN, "A", freeze_seq=2),
    ]
    acts = plan_step(empty_state(), [a], jobs, {}, 0.0, POLICY)
    assert [a.job_id for a in acts] == ["first", "second"]


def test_plan_step_does_not_thaw_onto_dying_site():
    a = site_view("A", spare_cores=4, pred_cores=(4, 0))
    jobs = [job_view("f", LocationKind.FROZEN, "A", freeze_seq=0)]
    assert plan_step(empty_state(), [a], jobs, {}, 0.0, POLICY) == []


def test_plan_step_admissions_see_shrunken_capacity():
    """Resumes eat spare cores before queued jobs are placed."""
    a = site_view("A", spare_cores=1, pred_cores=(2, 2))
    jobs = [
        job_view("f", LocationKind.FROZEN, "A", freeze_seq=0),
        job_view("q", LocationKind.QUEUED),
    ]
    acts = plan_step(empty_state(), [a], jobs, {}, 0.0, POLICY)
    kinds = {(a.kind, a.job_id) for a in acts}
    assert (ActionKind.RESUME, "f") in kinds
    assert (ActionKind.DEFER, "q") in kinds


def test_plan_step_deterministic():
    a = site_view("A", resident_count=2, pred_cores=(2, 1), carbon=(10.0, 20.0))
    b = site_view("B", pred_cores=(3, 3), carbon=(0.0, 0.0))
    links = {("A", "B"): ten_gbps()}
    jobs = [
        job_view("j1", LocationKind.RUNNING, "A", slack_s=100.0),
        job_view("j2", LocationKind.RUNNING, "A", slack_s=200.0),
        job_view("j3", LocationKind.QUEUED),
        job_view("j4", LocationKind.FROZEN, "B", freeze_seq=0),
    ]
    first = plan_step(empty_state(), [a, b], jobs, links, 0.0, POLICY)
    second = plan_step(empty_state(), [a, b], jobs, links, 0.0, POLICY)
    assert first == second
    assert first  # scenario is constructed to produce actions


def test_policy_knob_validation():
    with pytest.raises(ValueError):
        PolicyKnobs(lead_window_steps=0)
    with pytest.raises(ValueError):
        PolicyKnobs(safety_margin_s=-1.0)
    assert PolicyKnobs().margin(300.0) == 300.0
    assert PolicyKnobs(safety_margin_s=12.0).margin(300.0) == 12.0
