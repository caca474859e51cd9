"""Admission, placement, migration, and freeze/resume policy.

The engine invokes the planner once per trace step with read-only views
of every site and job.  Decisions follow a small set of rules:

* admit to the feasible site with the lowest predicted effective carbon
  (grid intensity zeroed during predicted opportunity steps), ties broken
  by lower predicted price then site_id;
* when a site's forecast shows it cannot give every resident job a core
  within the lead window, evacuate jobs in ascending deadline-slack order
  -- premium jobs may cross ISO boundaries, standard jobs stay within
  their ISO or freeze to cold storage;
* a migration starts only if it can finish a safety margin before the
  predicted power loss, otherwise the job freezes;
* frozen jobs resume at their own site when capacity returns, premium
  first, then first-frozen-first-out.

Everything here is a pure function of its inputs: identical views yield
an identical action list.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import AlreadyLate, InfeasibleSlo
from .network import InterSiteLink, transfer_time
from .workload import JobTier


class ActionKind(str, enum.Enum):
    START = "start"
    MIGRATE = "migrate"
    FREEZE = "freeze"
    RESUME = "resume"
    DEFER = "defer"


@dataclass(frozen=True)
class SchedulerAction:
    kind: ActionKind
    job_id: str
    site_id: str | None = None
    from_site: str | None = None
    to_site: str | None = None
    start_s: float | None = None


class LocationKind(str, enum.Enum):
    QUEUED = "queued"
    RUNNING = "running"
    FROZEN = "frozen"
    MIGRATING = "migrating"
    DONE = "done"
    KILLED = "killed"
    REJECTED = "rejected"


@dataclass(frozen=True)
class JobLocation:
    kind: LocationKind
    site_id: str | None = None
    from_site: str | None = None
    to_site: str | None = None
    completes_at_s: float | None = None


@dataclass(frozen=True)
class PlacementState:
    """Snapshot of where every job sits and what each site has committed."""

    locations: dict[str, JobLocation] = field(default_factory=dict)
    committed_cores: dict[str, int] = field(default_factory=dict)
    committed_ram_gb: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SiteView:
    """One site as the planner sees it at a tick.

    The ``pred_*`` sequences cover the lead window step by step, index 0
    being the step containing the tick itself.
    """

    site_id: str
    iso_id: str
    step_s: float
    spare_cores: int
    spare_ram_gb: float
    cold_free_gb: float
    opportunity_now: bool
    has_opportunity_ever: bool
    pred_cores: tuple[int, ...]
    pred_eff_carbon: tuple[float, ...]
    pred_price: tuple[float, ...]
    resident_count: int = 0


@dataclass(frozen=True)
class JobView:
    """One job as the planner sees it at a tick."""

    job_id: str
    tier: JobTier
    strict_renewable: bool
    location: JobLocation
    slack_s: float
    state_gb: float
    vm_count: int
    ram_needed_gb: float
    arrival_s: float
    deadline_s: float
    freeze_seq: int = -1


@dataclass(frozen=True)
class PolicyKnobs:
    """Planner tuning; safety_margin_s of None means one trace step.

    progress_loss_on_blackout is read by the engine, not the planner: when
    set, an unplanned freeze rolls incomplete tasks back to their state at
    the previous step boundary instead of keeping mid-step progress.
    """

    lead_window_steps: int = 2
    safety_margin_s: float | None = None
    progress_loss_on_blackout: bool = False

    def __post_init__(self):
        if self.lead_window_steps < 1:
            raise ValueError("lead_window_steps must be >= 1")
        if self.safety_margin_s is not None and self.safety_margin_s < 0:
            raise ValueError("safety_margin_s must be >= 0")

    def margin(self, step_s: float) -> float:
        return step_s if self.safety_margin_s is None else self.safety_margin_s


def _carbon_score(view: SiteView) -> tuple[float, float, str]:
    n = max(1, len(view.pred_eff_carbon))
    carbon = sum(view.pred_eff_carbon) / n
    price = sum(view.pred_price) / n if view.pred_price else 0.0
    return carbon, price, view.site_id


def admit(job: JobView, sites: list[SiteView], t_s: float) -> SchedulerAction:
    """Place an arrived job, or defer it when nothing fits.

    Feasible sites have a spare core and RAM now and keep at least one
    core through the forecast window, so fresh admissions are not thrown
    straight into a predicted blackout.  A job demanding 100% renewable
    energy is rejected outright when no configured site ever offers
    opportunity power.
    """
    if job.strict_renewable and not any(v.has_opportunity_ever for v in sites):
        raise InfeasibleSlo(
            f"job {job.job_id} requires 100% renewable energy but no site "
            "ever offers opportunity power"
        )
    feasible = [
        v
        for v in sites
        if v.spare_cores >= 1
        and min(v.pred_cores, default=0) >= 1
        and v.spare_ram_gb + 1e-9 >= job.ram_needed_gb
        and (not job.strict_renewable or v.opportunity_now)
    ]
    if not feasible:
        return SchedulerAction(ActionKind.DEFER, job.job_id)
    best = min(feasible, key=_carbon_score)
    return SchedulerAction(ActionKind.START, job.job_id, site_id=best.site_id)


def plan_migration_deadline(
    job_state_gb: float,
    vm_count: int,
    link: InterSiteLink,
    power_loss_at_s: float,
    safety_margin_s: float,
    now_s: float | None = None,
) -> float:
    """Latest instant a migration may start and still beat the power loss."""
    latest = (
        power_loss_at_s
        - transfer_time(job_state_gb, link, vm_count)
        - safety_margin_s
    )
    if now_s is not None and latest < now_s:
        raise AlreadyLate(
            f"migration must start by {latest:.3f}s but it is already {now_s:.3f}s"
        )
    return latest


def _loss_time(view: SiteView, t_s: float) -> float | None:
    """First future step boundary where the site offers zero cores."""
    for i in range(1, len(view.pred_cores)):
        if view.pred_cores[i] == 0:
            return t_s + i * view.step_s
    return None


def _shortfall(view: SiteView) -> int:
    """Resident jobs beyond what the worst forecast step can feed."""
    if not view.resident_count:
        return 0
    floor_cores = min(view.pred_cores[1:], default=view.pred_cores[0])
    return max(0, view.resident_count - floor_cores)


def _pick_target(
    job: JobView,
    source: SiteView,
    sites: dict[str, SiteView],
    links: dict[tuple[str, str], InterSiteLink],
    t_s: float,
    loss_at_s: float,
    margin_s: float,
) -> str | None:
    """Best migration destination, or None when freezing is the answer."""
    scored = []
    for view in sites.values():
        if view.site_id == source.site_id:
            continue
        if job.tier != JobTier.PREMIUM and view.iso_id != source.iso_id:
            continue
        link = links.get((source.site_id, view.site_id))
        if link is None:
            continue
        try:
            plan_migration_deadline(
                job.state_gb, job.vm_count, link, loss_at_s, margin_s, now_s=t_s
            )
        except AlreadyLate:
            continue
        if min(view.pred_cores, default=0) < 1:
            continue  # target must stay up through the transfer and beyond
        if view.cold_free_gb + 1e-9 < job.state_gb:
            continue
        scored.append((_carbon_score(view), view.site_id))
    if not scored:
        return None
    return min(scored)[1]


def plan_step(
    state: PlacementState,
    sites: list[SiteView],
    jobs: list[JobView],
    links: dict[tuple[str, str], InterSiteLink],
    t_s: float,
    policy: PolicyKnobs,
) -> list[SchedulerAction]:
    """One planning pass: evacuations, then resumes, then admissions."""
    by_site = {v.site_id: v for v in sites}
    by_job = {j.job_id: j for j in jobs}
    actions: list[SchedulerAction] = []
    evacuating: set[str] = set()

    # 1. Evacuate sites whose forecast cannot feed every resident job.
    for view in sorted(sites, key=lambda v: v.site_id):
        need = _shortfall(view)
        if need == 0:
            continue
        residents = sorted(
            (
                j
                for j in jobs
                if j.location.kind == LocationKind.RUNNING
                and j.location.site_id == view.site_id
            ),
            key=lambda j: (j.slack_s, j.job_id),
        )
        loss_at = _loss_time(view, t_s)
        margin = policy.margin(view.step_s)
        for job in residents[:need]:
            target = None
            if loss_at is not None:
                target = _pick_target(job, view, by_site, links, t_s, loss_at, margin)
            if target is None:
                actions.append(
                    SchedulerAction(ActionKind.FREEZE, job.job_id, site_id=view.site_id)
                )
            else:
                actions.append(
                    SchedulerAction(
                        ActionKind.MIGRATE,
                        job.job_id,
                        from_site=view.site_id,
                        to_site=target,
                        start_s=t_s,
                    )
                )
            evacuating.add(job.job_id)

    # 2. Resume frozen jobs where capacity is back, premium first then FIFO.
    spare = {v.site_id: v.spare_cores for v in sites}
    spare_ram = {v.site_id: v.spare_ram_gb for v in sites}
    for view in sorted(sites, key=lambda v: v.site_id):
        if _shortfall(view) or min(view.pred_cores, default=0) == 0:
            continue  # do not thaw onto a site about to brown out
        frozen = sorted(
            (
                j
                for j in jobs
                if j.location.kind == LocationKind.FROZEN
                and j.location.site_id == view.site_id
            ),
            key=lambda j: (j.tier != JobTier.PREMIUM, j.freeze_seq, j.job_id),
        )
        for job in frozen:
            if spare[view.site_id] < 1:
                break
            if spare_ram[view.site_id] + 1e-9 < job.ram_needed_gb:
                continue
            if job.strict_renewable and not view.opportunity_now:
                continue
            actions.append(
                SchedulerAction(ActionKind.RESUME, job.job_id, site_id=view.site_id)
            )
            spare[view.site_id] -= 1
            spare_ram[view.site_id] -= job.ram_needed_gb

    # 3. Admit queued jobs in arrival order against the remaining spare.
    queued = sorted(
        (j for j in jobs if j.location.kind == LocationKind.QUEUED and j.arrival_s <= t_s),
        key=lambda j: (j.arrival_s, j.job_id),
    )
    for job in queued:
        shrunk = [
            SiteView(
                site_id=v.site_id,
                iso_id=v.iso_id,
                step_s=v.step_s,
                spare_cores=spare[v.site_id],
                spare_ram_gb=spare_ram[v.site_id],
                cold_free_gb=v.cold_free_gb,
                opportunity_now=v.opportunity_now,
                has_opportunity_ever=v.has_opportunity_ever,
                pred_cores=v.pred_cores,
                pred_eff_carbon=v.pred_eff_carbon,
                pred_price=v.pred_price,
                resident_count=v.resident_count,
            )
            for v in sites
        ]
        action = admit(job, shrunk, t_s)
        actions.append(action)
        if action.kind == ActionKind.START:
            spare[action.site_id] -= 1
            spare_ram[action.site_id] -= job.ram_needed_gb
    return actions
