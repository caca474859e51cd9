"""Deterministic discrete-event simulation of the whole platform.

One Engine run replays the power traces of every site step by step,
lets the planner place/migrate/freeze jobs at each step boundary, and
meters every joule against the job, task, and site that drew it.

Event ordering is total: events sort by (time, kind, sequence), where
kind breaks same-instant ties so that the new power step lands first,
then in-flight migrations, then task completions, then job arrivals,
then the planning tick.  Completion events are invalidated lazily: each
task carries an epoch, and a popped event whose epoch no longer matches
is discarded unlogged.  Identical configs and seeds therefore produce
byte-identical outputs.

Power accounting closes an interval at every event: a compute server is
metered only while it hosts assigned cores, and a site's infrastructure
nodes and switch fabric are metered only while at least one job is
resident, so an empty site draws nothing.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field, replace

from .accounting import (
    JOULES_PER_KWH,
    JOULES_PER_MWH,
    LedgerEntry,
    attribute,
    merge_entries,
)
from .errors import CapacityExceeded, InsufficientHistory, TimeRegression
from .fleet import ActivationPlan, ServerSpec, embodied_rate, power_draw
from .forecast import ForecastMethod, _channel_series
from .network import scale_fabric, transfer_time
from .scenario import ScenarioConfig
from .scheduler import (
    ActionKind,
    JobLocation,
    JobView,
    LocationKind,
    PlacementState,
    SiteView,
    plan_step,
)
from .sites import SiteCapacity, SiteSpec, capacity_for_budget
from .traces import PowerTrace, power_at
from .workload import JobSpec, burst_width, ready_tasks, validate_dag

SERIES_HEADER = [
    "t_s",
    "site_id",
    "available_mw",
    "price_usd_per_mwh",
    "carbon_gco2_per_kwh",
    "opportunity",
    "plan_cores",
    "committed_cores",
    "watts_used",
    "fabric_watts",
    "ram_used_gb",
    "cold_used_gb",
    "resident_jobs",
    "frozen_jobs",
]

EVENTS_HEADER = ["time_s", "seq", "kind", "payload"]


def plan_for_power(spec: SiteSpec, raw_mw: float) -> tuple[SiteCapacity, float, float]:
    """Size the activation plan and switch fabric for one power level.

    More powered servers need more enabled switches, which shrink the
    server power budget: iterate the fabric charge upward from the
    always-on floor until the plan it allows no longer outgrows it.
    Returns ``(capacity, fabric_watts, fabric_budget_watts)`` where the
    budget figure is the (possibly larger) charge the plan was sized
    against.  Both the live step enforcement and the per-step capacity
    forecast go through here, so a perfect power forecast yields a
    perfect core forecast.
    """
    fab = spec.fabric
    fw = fab.floor_watts
    watts = fw
    cap = capacity_for_budget(
        spec, max(0.0, raw_mw * 1e6 * (1.0 - spec.overhead_fraction) - fw)
    )
    for _ in range(fab.switch_count + 2):
        n_srv = sum(1 for c in cap.plan.cores_by_server.values() if c > 0)
        demand = n_srv * spec.spill_gbps_per_server
        try:
            _, watts = scale_fabric(fab, demand)
        except CapacityExceeded:
            watts = fab.switch_count * fab.watts_per_switch
        if watts <= fw + 1e-12:
            break
        fw = watts
        cap = capacity_for_budget(
            spec, max(0.0, raw_mw * 1e6 * (1.0 - spec.overhead_fraction) - fw)
        )
    return cap, watts, fw


class EventKind(enum.IntEnum):
    TRACE_STEP = 0
    MIGRATION_COMPLETE = 1
    TASK_COMPLETE = 2
    JOB_ARRIVAL = 3
    SCHEDULER_TICK = 4
    SIM_END = 5


@dataclass
class TaskRun:
    """Mutable execution state of one task on its current site."""

    width: int = 0
    progress: float = 0.0
    started: bool = False
    done: bool = False
    epoch: int = 0
    assignment: list[tuple[ServerSpec, int]] = field(default_factory=list)


@dataclass
class MigrationState:
    from_site: str
    to_site: str
    state_gb: float
    vm_count: int
    depart_s: float
    arrive_s: float


@dataclass
class JobState:
    """Mutable lifecycle state of one job."""

    spec: JobSpec
    topo: list[str]
    status: LocationKind = LocationKind.QUEUED
    arrived: bool = False
    site_id: str | None = None
    admission_seq: int = -1
    freeze_seq: int = -1
    tasks: dict[str, TaskRun] = field(default_factory=dict)
    completion_s: float | None = None
    frozen_gb: float = 0.0
    mig: MigrationState | None = None
    mig_epoch: int = 0
    snapshot: dict[str, tuple[float, bool]] = field(default_factory=dict)
    killed_reason: str | None = None

    @property
    def strict_renewable(self) -> bool:
        return self.spec.slo.min_renewable_fraction >= 1.0

    def incomplete(self) -> list[str]:
        return [tid for tid in self.topo if not self.tasks[tid].done]

    def snapshot_gb(self) -> float:
        return sum(self.spec.task(tid).state_gb for tid in self.incomplete())

    def vm_count(self) -> int:
        return max(1, len(self.incomplete()))


@dataclass
class SiteState:
    """Mutable per-site runtime state plus energy meter part-lists."""

    spec: SiteSpec
    trace: PowerTrace
    resident: set[str] = field(default_factory=set)
    cold_used_gb: float = 0.0
    plan: ActivationPlan = field(default_factory=ActivationPlan)
    plan_cores: int = 0
    ram_cap_gb: float = 0.0
    fabric_watts: float = 0.0
    fabric_budget_watts: float = 0.0
    server_by_id: dict[str, ServerSpec] = field(default_factory=dict)
    metered_j: list[float] = field(default_factory=list)
    opportunity_j: list[float] = field(default_factory=list)
    overhead_j: list[float] = field(default_factory=list)
    fabric_j: list[float] = field(default_factory=list)
    overhead_kg: list[float] = field(default_factory=list)
    overhead_cost: list[float] = field(default_factory=list)
    overhead_embodied: list[float] = field(default_factory=list)


class Engine:
    """Runs one scenario to completion; see module docstring."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.policy = cfg.policy
        self.start_s = cfg.start_epoch_s
        self.end_s = cfg.start_epoch_s + cfg.duration_s
        self.step_s = cfg.step_s
        self.t = self.start_s
        self.accrual_t = self.start_s
        self.seq = 0
        self.heap: list[tuple[float, int, int, dict]] = []
        self.ledger: list[LedgerEntry] = []
        self.events_log: list[tuple[float, int, str, dict]] = []
        self.series_rows: list[list] = []
        self.admission_counter = 0
        self.freeze_counter = 0
        self.audit = {
            "events_processed": 0,
            "stale_events": 0,
            "invariant_checks": 0,
            "blackout_freezes": 0,
            "ram_shrink_freezes": 0,
            "policy_freezes": 0,
            "migrations_started": 0,
            "migrations_completed": 0,
            "migrations_aborted": 0,
            "migrations_failed": 0,
            "kills": 0,
            "rejections": 0,
            "resumes": 0,
        }

        self.sites: dict[str, SiteState] = {}
        for spec in cfg.sites:
            st = SiteState(spec=spec, trace=cfg.traces[spec.trace_ref])
            st.server_by_id = {s.server_id: s for s in spec.servers}
            self.sites[spec.site_id] = st

        self.jobs: dict[str, JobState] = {}
        for job in cfg.jobs:
            self.jobs[job.job_id] = JobState(
                spec=job,
                topo=validate_dag(job),
                tasks={t.task_id: TaskRun() for t in job.tasks},
            )

        # Per site: does any opportunity sample exist at step index >= k?
        self.opp_suffix: dict[str, list[bool]] = {}
        for site_id, st in self.sites.items():
            flags = [s.is_opportunity for s in st.trace.samples]
            suffix = [False] * (len(flags) + 1)
            for i in range(len(flags) - 1, -1, -1):
                suffix[i] = flags[i] or suffix[i + 1]
            self.opp_suffix[site_id] = suffix

        self.n_steps = int(math.ceil(cfg.duration_s / self.step_s - 1e-9))
        for k in range(self.n_steps):
            tk = self.start_s + k * self.step_s
            self._push(tk, EventKind.TRACE_STEP, {"k": k})
            self._push(tk, EventKind.SCHEDULER_TICK, {"k": k})
        for job in cfg.jobs:
            arrive = max(job.arrival_s, self.start_s)
            if arrive < self.end_s:
                self._push(arrive, EventKind.JOB_ARRIVAL, {"job_id": job.job_id})
        self._push(self.end_s, EventKind.SIM_END, {})

    # ------------------------------------------------------------------
    # event plumbing

    def _push(self, t_s: float, kind: EventKind, payload: dict):
        heapq.heappush(self.heap, (t_s, int(kind), self.seq, payload))
        self.seq += 1

    def _log(self, kind: str, payload: dict):
        self.events_log.append((self.t, len(self.events_log), kind, payload))

    def run(self) -> None:
        while self.heap:
            t, kind, _seq, payload = heapq.heappop(self.heap)
            if t < self.t - 1e-9:
                raise TimeRegression(f"event at {t} behind clock {self.t}")
            self._close_interval(t)
            self.t = max(self.t, t)
            kind = EventKind(kind)
            if kind == EventKind.SIM_END:
                self._log("sim_end", {})
                self.audit["events_processed"] += 1
                break
            handled = {
                EventKind.TRACE_STEP: self._on_trace_step,
                EventKind.MIGRATION_COMPLETE: self._on_migration_complete,
                EventKind.TASK_COMPLETE: self._on_task_complete,
                EventKind.JOB_ARRIVAL: self._on_job_arrival,
                EventKind.SCHEDULER_TICK: self._on_tick,
            }[kind](payload)
            if handled:
                self.audit["events_processed"] += 1
                self._self_check()
            else:
                self.audit["stale_events"] += 1

    # ------------------------------------------------------------------
    # power metering

    def _close_interval(self, t1: float):
        """Meter energy and advance task progress over [accrual_t, t1)."""
        dt = t1 - self.accrual_t
        if dt <= 0.0:
            return
        t0 = self.accrual_t
        for site_id in sorted(self.sites):
            st = self.sites[site_id]
            sample = st.trace.sample_at(t0)
            residents = sorted(st.resident)
            active_on: dict[str, int] = {}
            committed = 0
            for jid in residents:
                job = self.jobs[jid]
                for tid in job.topo:
                    run = job.tasks[tid]
                    committed += run.width
                    for srv, c in run.assignment:
                        active_on[srv.server_id] = active_on.get(srv.server_id, 0) + c
            infra_rate = sum(embodied_rate(s) for s in st.spec.infra_servers)
            for jid in residents:
                job = self.jobs[jid]
                for tid in job.topo:
                    run = job.tasks[tid]
                    if run.width <= 0 or run.done:
                        continue
                    entry = merge_entries(
                        [
                            attribute(
                                jid,
                                tid,
                                site_id,
                                t0,
                                t1,
                                c,
                                active_on[srv.server_id],
                                srv,
                                sample,
                            )
                            for srv, c in run.assignment
                        ]
                    )
                    if infra_rate > 0.0 and committed > 0:
                        share = infra_rate * (dt / 3600.0) * (run.width / committed)
                        entry = replace(
                            entry, embodied_kgco2e=entry.embodied_kgco2e + share
                        )
                    self.ledger.append(entry)
            server_w = math.fsum(
                power_draw(st.server_by_id[sid], cores)
                for sid, cores in sorted(active_on.items())
            )
            oh_w = st.spec.infra_idle_watts if residents else 0.0
            fb_w = st.fabric_watts if residents else 0.0
            metered = (server_w + oh_w + fb_w) * dt
            st.metered_j.append(metered)
            if sample.is_opportunity:
                st.opportunity_j.append(metered)
            oh_j = oh_w * dt
            fb_j = fb_w * dt
            st.overhead_j.append(oh_j)
            st.fabric_j.append(fb_j)
            if not sample.is_opportunity:
                st.overhead_kg.append(
                    (oh_j + fb_j) * sample.carbon_gco2_per_kwh / JOULES_PER_KWH / 1000.0
                )
            st.overhead_cost.append((oh_j + fb_j) * sample.price_usd_per_mwh / JOULES_PER_MWH)
            if residents and committed == 0 and infra_rate > 0.0:
                st.overhead_embodied.append(infra_rate * dt / 3600.0)
        for jid in sorted(self.jobs):
            job = self.jobs[jid]
            if job.status != LocationKind.RUNNING:
                continue
            for tid in job.topo:
                run = job.tasks[tid]
                if run.width > 0 and not run.done:
                    cs = job.spec.task(tid).cpu_core_seconds
                    run.progress = min(cs, run.progress + run.width * dt)
        self.accrual_t = t1

    def _current_draw(self, st: SiteState) -> float:
        active_on: dict[str, int] = {}
        for jid in st.resident:
            job = self.jobs[jid]
            for run in job.tasks.values():
                for srv, c in run.assignment:
                    active_on[srv.server_id] = active_on.get(srv.server_id, 0) + c
        w = math.fsum(
            power_draw(st.server_by_id[sid], cores)
            for sid, cores in sorted(active_on.items())
        )
        if st.resident:
            w += st.spec.infra_idle_watts + st.fabric_watts
        return w

    def _committed(self, st: SiteState) -> int:
        return sum(
            run.width
            for jid in st.resident
            for run in self.jobs[jid].tasks.values()
        )

    def _ram_used(self, st: SiteState) -> float:
        total = 0.0
        for jid in st.resident:
            job = self.jobs[jid]
            for tid, run in job.tasks.items():
                if run.started and not run.done:
                    total += job.spec.task(tid).ram_gb
        return total

    def _frozen_at(self, site_id: str) -> list[str]:
        return [
            jid
            for jid in sorted(self.jobs)
            if self.jobs[jid].status == LocationKind.FROZEN
            and self.jobs[jid].site_id == site_id
        ]

    # ------------------------------------------------------------------
    # allocation

    def _realloc_site(self, st: SiteState):
        """Redistribute this site's active cores among resident tasks.

        Jobs are served earliest-deadline-first (admission order breaks
        ties); within a job, tasks start in topological order.  A task
        enters RAM the first time it is given the chance to run and holds
        it until completion or freeze.  Completion events are reused when
        a task's width is unchanged, otherwise its epoch advances and a
        fresh event is scheduled.
        """
        t = self.t
        for jid in sorted(st.resident):
            self._finalize_done_tasks(jid)
        sample = st.trace.sample_at(t) if t < st.trace.end_epoch_s else None
        cores_left = st.plan_cores
        ram_cap = st.ram_cap_gb
        order = sorted(
            st.resident,
            key=lambda j: (self.jobs[j].spec.deadline_s, self.jobs[j].admission_seq, j),
        )
        ram_used = self._ram_used(st)
        alloc: list[tuple[JobState, str, int]] = []
        for jid in order:
            job = self.jobs[jid]
            stalled = job.strict_renewable and not (sample and sample.is_opportunity)
            done_set = {tid for tid, run in job.tasks.items() if run.done}
            ready = ready_tasks(job.spec, done_set)
            for tid in job.topo:
                run = job.tasks[tid]
                if run.done:
                    continue
                width = 0
                if tid in ready and not stalled:
                    task = job.spec.task(tid)
                    if not run.started and ram_used + task.ram_gb <= ram_cap + 1e-9:
                        run.started = True
                        ram_used += task.ram_gb
                    if run.started:
                        width = burst_width(task, cores_left)
                        cores_left -= width
                alloc.append((job, tid, width))
        slots = sorted(st.plan.cores_by_server.items())
        slot_i = 0
        slot_left = slots[0][1] if slots else 0
        for job, tid, width in alloc:
            run = job.tasks[tid]
            assignment: list[tuple[ServerSpec, int]] = []
            need = width
            while need > 0:
                while slot_left == 0:
                    slot_i += 1
                    slot_left = slots[slot_i][1]
                take = min(need, slot_left)
                assignment.append((st.server_by_id[slots[slot_i][0]], take))
                slot_left -= take
                need -= take
            run.assignment = assignment
            if width != run.width:
                run.epoch += 1
                run.width = width
                if width > 0:
                    cs = job.spec.task(tid).cpu_core_seconds
                    eta = t + (cs - run.progress) / width
                    self._push(
                        eta,
                        EventKind.TASK_COMPLETE,
                        {"job_id": job.spec.job_id, "task_id": tid, "epoch": run.epoch},
                    )

    def _finalize_done_tasks(self, jid: str) -> bool:
        """Complete any running task whose remaining work hit zero.

        A task scheduled to finish exactly at a step boundary may see its
        completion event invalidated by that same boundary's enforcement
        (freeze, migration, or a width change).  Its work is nonetheless
        done, so sweep it to completed before touching the allocation.
        Returns True when this completes the whole job.
        """
        job = self.jobs[jid]
        changed = False
        for tid in job.topo:
            run = job.tasks[tid]
            if run.done or run.width <= 0:
                continue
            cs = job.spec.task(tid).cpu_core_seconds
            if run.progress >= cs - 1e-9:
                run.progress = cs
                run.done = True
                run.width = 0
                run.assignment = []
                run.epoch += 1
                self._log("task_complete", {"job_id": jid, "task_id": tid})
                changed = True
        if changed and all(r.done for r in job.tasks.values()):
            job.status = LocationKind.DONE
            job.completion_s = self.t
            self.sites[job.site_id].resident.discard(jid)
            self._log("job_complete", {"job_id": jid, "deadline_s": job.spec.deadline_s})
            return True
        return False

    def _clear_allocation(self, job: JobState):
        for run in job.tasks.values():
            if run.width != 0:
                run.epoch += 1
            run.width = 0
            run.assignment = []

    # ------------------------------------------------------------------
    # job lifecycle

    def _freeze(self, jid: str, reason: str):
        """Suspend a running job into its site's cold storage.

        Overflowing cold storage kills the job: there is nowhere to put
        its state.  An unplanned freeze ("blackout") optionally rolls
        incomplete tasks back to the last step boundary snapshot.
        """
        job = self.jobs[jid]
        if self._finalize_done_tasks(jid):
            return
        st = self.sites[job.site_id]
        if reason == "blackout" and self.policy.progress_loss_on_blackout:
            for tid, run in job.tasks.items():
                if not run.done:
                    progress, started = job.snapshot.get(tid, (0.0, False))
                    run.progress = progress
                    run.started = started
        self._clear_allocation(job)
        st.resident.discard(jid)
        snap_gb = job.snapshot_gb()
        if st.cold_used_gb + snap_gb > st.spec.cold_storage_gb + 1e-9:
            job.status = LocationKind.KILLED
            job.killed_reason = f"cold storage full during {reason} freeze"
            self.audit["kills"] += 1
            self._log("kill", {"job_id": jid, "reason": job.killed_reason})
            return
        st.cold_used_gb += snap_gb
        job.frozen_gb = snap_gb
        job.status = LocationKind.FROZEN
        job.freeze_seq = self.freeze_counter
        self.freeze_counter += 1
        self.audit[f"{reason}_freezes"] += 1
        self._log("freeze", {"job_id": jid, "site_id": st.spec.site_id, "reason": reason})

    def _resume(self, jid: str, site_id: str, reason: str):
        job = self.jobs[jid]
        st = self.sites[site_id]
        st.cold_used_gb -= job.frozen_gb
        job.frozen_gb = 0.0
        job.status = LocationKind.RUNNING
        job.site_id = site_id
        job.freeze_seq = -1
        st.resident.add(jid)
        self.audit["resumes"] += 1
        self._log("resume", {"job_id": jid, "site_id": site_id, "reason": reason})

    def _admit(self, jid: str, site_id: str):
        job = self.jobs[jid]
        job.status = LocationKind.RUNNING
        job.site_id = site_id
        job.admission_seq = self.admission_counter
        self.admission_counter += 1
        self.sites[site_id].resident.add(jid)
        self._log("admit", {"job_id": jid, "site_id": site_id})

    def _start_migration(self, jid: str, from_site: str, to_site: str):
        """Stage a running job's state in source cold storage and ship it."""
        job = self.jobs[jid]
        if self._finalize_done_tasks(jid):
            return
        src = self.sites[from_site]
        snap_gb = job.snapshot_gb()
        vms = job.vm_count()
        self._clear_allocation(job)
        src.resident.discard(jid)
        if src.cold_used_gb + snap_gb > src.spec.cold_storage_gb + 1e-9:
            job.status = LocationKind.KILLED
            job.killed_reason = "cold storage full while staging migration"
            self.audit["kills"] += 1
            self._log("kill", {"job_id": jid, "reason": job.killed_reason})
            return
        src.cold_used_gb += snap_gb
        job.frozen_gb = snap_gb
        link = self.cfg.links[(from_site, to_site)]
        duration = transfer_time(snap_gb, link, vms)
        job.mig = MigrationState(from_site, to_site, snap_gb, vms, self.t, self.t + duration)
        job.mig_epoch += 1
        job.status = LocationKind.MIGRATING
        job.site_id = from_site
        self.audit["migrations_started"] += 1
        self._push(
            self.t + duration,
            EventKind.MIGRATION_COMPLETE,
            {"job_id": jid, "epoch": job.mig_epoch},
        )
        self._log(
            "migration_start",
            {
                "job_id": jid,
                "from_site": from_site,
                "to_site": to_site,
                "state_gb": snap_gb,
                "eta_s": self.t + duration,
            },
        )

    def _abort_migration(self, jid: str):
        """A dark endpoint halts the stream; the job stays frozen at home."""
        job = self.jobs[jid]
        mig = job.mig
        job.mig = None
        job.mig_epoch += 1
        job.status = LocationKind.FROZEN
        job.site_id = mig.from_site
        job.freeze_seq = self.freeze_counter
        self.freeze_counter += 1
        self.audit["migrations_aborted"] += 1
        self._log(
            "migration_abort",
            {"job_id": jid, "from_site": mig.from_site, "to_site": mig.to_site},
        )

    # ------------------------------------------------------------------
    # event handlers

    def _on_trace_step(self, payload: dict) -> bool:
        for site_id in sorted(self.sites):
            self._size_fabric(self.sites[site_id])
        for jid in sorted(self.jobs):
            job = self.jobs[jid]
            if job.status != LocationKind.MIGRATING or job.mig is None:
                continue
            src_mw = power_at(self.sites[job.mig.from_site].trace, self.t)
            dst_mw = power_at(self.sites[job.mig.to_site].trace, self.t)
            if src_mw == 0.0 or dst_mw == 0.0:
                self._abort_migration(jid)
        for site_id in sorted(self.sites):
            st = self.sites[site_id]
            if st.plan_cores == 0 and st.resident:
                victims = sorted(
                    st.resident,
                    key=lambda j: (self.jobs[j].spec.deadline_s - self.t, j),
                )
                for jid in victims:
                    self._freeze(jid, "blackout")
        for site_id in sorted(self.sites):
            st = self.sites[site_id]
            while st.resident and self._ram_used(st) > st.ram_cap_gb + 1e-9:
                victims = sorted(
                    st.resident,
                    key=lambda j: (-(self.jobs[j].spec.deadline_s - self.t), j),
                )
                self._freeze(victims[0], "ram_shrink")
        for site_id in sorted(self.sites):
            self._realloc_site(self.sites[site_id])
        self._log("trace_step", {"k": payload["k"]})
        return True

    def _size_fabric(self, st: SiteState):
        cap, watts, budget_fw = plan_for_power(st.spec, power_at(st.trace, self.t))
        st.fabric_budget_watts = budget_fw
        st.fabric_watts = watts
        st.plan = cap.plan
        st.plan_cores = cap.active_cores
        st.ram_cap_gb = cap.ram_gb

    def _on_migration_complete(self, payload: dict) -> bool:
        jid = payload["job_id"]
        job = self.jobs[jid]
        if (
            job.status != LocationKind.MIGRATING
            or job.mig is None
            or payload["epoch"] != job.mig_epoch
        ):
            return False
        if self.t >= self.end_s - 1e-9:
            return False  # landed as the window closed; stays in flight
        mig = job.mig
        src = self.sites[mig.from_site]
        dst = self.sites[mig.to_site]
        if dst.cold_used_gb + mig.state_gb > dst.spec.cold_storage_gb + 1e-9:
            job.mig = None
            job.status = LocationKind.FROZEN
            job.site_id = mig.from_site
            job.freeze_seq = self.freeze_counter
            self.freeze_counter += 1
            self.audit["migrations_failed"] += 1
            self._log(
                "migration_failed",
                {"job_id": jid, "to_site": mig.to_site, "reason": "cold storage full"},
            )
            return True
        src.cold_used_gb -= mig.state_gb
        dst.cold_used_gb += mig.state_gb
        job.mig = None
        job.site_id = mig.to_site
        job.frozen_gb = mig.state_gb
        job.status = LocationKind.FROZEN
        job.freeze_seq = self.freeze_counter
        self.freeze_counter += 1
        self.audit["migrations_completed"] += 1
        self._log(
            "migration_complete",
            {"job_id": jid, "from_site": mig.from_site, "to_site": mig.to_site},
        )
        sample = dst.trace.sample_at(self.t)
        ram_need = sum(
            job.spec.task(tid).ram_gb
            for tid, run in job.tasks.items()
            if run.started and not run.done
        )
        if (
            dst.plan_cores - self._committed(dst) >= 1
            and self._ram_used(dst) + ram_need <= dst.ram_cap_gb + 1e-9
            and (not job.strict_renewable or sample.is_opportunity)
        ):
            self._resume(jid, mig.to_site, "migration")
            self._realloc_site(dst)
        return True

    def _on_task_complete(self, payload: dict) -> bool:
        jid, tid = payload["job_id"], payload["task_id"]
        job = self.jobs[jid]
        run = job.tasks[tid]
        if job.status != LocationKind.RUNNING or run.done or payload["epoch"] != run.epoch:
            return False
        run.progress = job.spec.task(tid).cpu_core_seconds
        run.done = True
        run.width = 0
        run.assignment = []
        run.epoch += 1
        self._log("task_complete", {"job_id": jid, "task_id": tid})
        st = self.sites[job.site_id]
        if all(r.done for r in job.tasks.values()):
            job.status = LocationKind.DONE
            job.completion_s = self.t
            st.resident.discard(jid)
            self._log("job_complete", {"job_id": jid, "deadline_s": job.spec.deadline_s})
        self._realloc_site(st)
        return True

    def _on_job_arrival(self, payload: dict) -> bool:
        job = self.jobs[payload["job_id"]]
        job.arrived = True
        self._log("job_arrival", {"job_id": job.spec.job_id})
        return True

    def _on_tick(self, payload: dict) -> bool:
        k = payload["k"]
        for jid in sorted(self.jobs):
            job = self.jobs[jid]
            if (
                job.arrived
                and job.status == LocationKind.QUEUED
                and job.strict_renewable
                and not any(self.opp_suffix[s][k] for s in sorted(self.sites))
            ):
                job.status = LocationKind.REJECTED
                self.audit["rejections"] += 1
                self._log(
                    "reject",
                    {"job_id": jid, "reason": "renewable-only job but no opportunity remains"},
                )
        views = [self._site_view(site_id, k) for site_id in sorted(self.sites)]
        jobviews = self._job_views()
        state = PlacementState(
            locations={v.job_id: v.location for v in jobviews},
            committed_cores={sid: self._committed(st) for sid, st in self.sites.items()},
            committed_ram_gb={sid: self._ram_used(st) for sid, st in self.sites.items()},
        )
        actions = plan_step(state, views, jobviews, self.cfg.links, self.t, self.policy)
        for action in actions:
            if action.kind == ActionKind.START:
                self._admit(action.job_id, action.site_id)
            elif action.kind == ActionKind.FREEZE:
                self._freeze(action.job_id, "policy")
            elif action.kind == ActionKind.MIGRATE:
                self._start_migration(action.job_id, action.from_site, action.to_site)
            elif action.kind == ActionKind.RESUME:
                self._resume(action.job_id, action.site_id, "policy")
        for site_id in sorted(self.sites):
            self._realloc_site(self.sites[site_id])
        for site_id in sorted(self.sites):
            st = self.sites[site_id]
            sample = st.trace.sample_at(self.t)
            self.series_rows.append(
                [
                    self.t,
                    site_id,
                    sample.available_mw,
                    sample.price_usd_per_mwh,
                    sample.carbon_gco2_per_kwh,
                    int(sample.is_opportunity),
                    st.plan_cores,
                    self._committed(st),
                    self._current_draw(st),
                    st.fabric_watts if st.resident else 0.0,
                    self._ram_used(st),
                    st.cold_used_gb,
                    len(st.resident),
                    len(self._frozen_at(site_id)),
                ]
            )
        for jid in sorted(self.jobs):
            job = self.jobs[jid]
            if job.status == LocationKind.RUNNING:
                job.snapshot = {
                    tid: (run.progress, run.started) for tid, run in job.tasks.items()
                }
        return True

    # ------------------------------------------------------------------
    # planner views

    def _channel(self, st: SiteState, horizon_s: float, value) -> list[float]:
        method = self.cfg.forecast_method
        try:
            return _channel_series(st.trace, self.t, horizon_s, method, value)
        except InsufficientHistory:
            return _channel_series(
                st.trace, self.t, horizon_s, ForecastMethod.PERSISTENCE, value
            )

    def _site_view(self, site_id: str, k: int) -> SiteView:
        st = self.sites[site_id]
        avail = len(st.trace.samples) - st.trace.index_at(self.t)
        steps = min(self.policy.lead_window_steps, avail)
        horizon = steps * self.step_s
        mw = self._channel(st, horizon, lambda s: s.available_mw)
        price = self._channel(st, horizon, lambda s: s.price_usd_per_mwh)
        carbon = self._channel(st, horizon, lambda s: s.carbon_gco2_per_kwh)
        opp = self._channel(st, horizon, lambda s: 1.0 if s.is_opportunity else 0.0)
        pred_cores = [st.plan_cores]
        for i in range(1, steps):
            pred_cores.append(plan_for_power(st.spec, mw[i])[0].active_cores)
        sample = st.trace.sample_at(self.t)
        eff_carbon = [c * (1.0 - min(1.0, o)) for c, o in zip(carbon, opp)]
        eff_carbon[0] = sample.carbon_gco2_per_kwh * (0.0 if sample.is_opportunity else 1.0)
        return SiteView(
            site_id=site_id,
            iso_id=st.spec.iso_id,
            step_s=self.step_s,
            spare_cores=st.plan_cores - self._committed(st),
            spare_ram_gb=st.ram_cap_gb - self._ram_used(st),
            cold_free_gb=st.spec.cold_storage_gb - st.cold_used_gb,
            opportunity_now=sample.is_opportunity,
            has_opportunity_ever=self.opp_suffix[site_id][st.trace.index_at(self.t)],
            pred_cores=tuple(pred_cores),
            pred_eff_carbon=tuple(eff_carbon),
            pred_price=tuple(price),
            resident_count=len(st.resident),
        )

    def _job_views(self) -> list[JobView]:
        views = []
        for jid in sorted(self.jobs):
            job = self.jobs[jid]
            if not job.arrived or job.status in (
                LocationKind.DONE,
                LocationKind.KILLED,
                LocationKind.REJECTED,
            ):
                continue
            if job.status == LocationKind.MIGRATING:
                loc = JobLocation(
                    LocationKind.MIGRATING,
                    site_id=job.mig.from_site,
                    from_site=job.mig.from_site,
                    to_site=job.mig.to_site,
                    completes_at_s=job.mig.arrive_s,
                )
            else:
                loc = JobLocation(job.status, site_id=job.site_id)
            if job.status == LocationKind.QUEUED:
                roots = {a for a, _ in job.spec.edges} | {
                    t.task_id for t in job.spec.tasks
                }
                roots -= {b for _, b in job.spec.edges}
                ram_needed = sum(job.spec.task(tid).ram_gb for tid in roots)
            else:
                ram_needed = sum(
                    job.spec.task(tid).ram_gb
                    for tid, run in job.tasks.items()
                    if run.started and not run.done
                )
            views.append(
                JobView(
                    job_id=jid,
                    tier=job.spec.tier,
                    strict_renewable=job.strict_renewable,
                    location=loc,
                    slack_s=job.spec.deadline_s - self.t,
                    state_gb=job.snapshot_gb(),
                    vm_count=job.vm_count(),
                    ram_needed_gb=ram_needed,
                    arrival_s=job.spec.arrival_s,
                    deadline_s=job.spec.deadline_s,
                    freeze_seq=job.freeze_seq,
                )
            )
        return views

    # ------------------------------------------------------------------
    # invariants

    def _self_check(self):
        self.audit["invariant_checks"] += 1
        for site_id in sorted(self.sites):
            st = self.sites[site_id]
            committed = self._committed(st)
            if committed > st.plan_cores:
                raise RuntimeError(
                    f"{site_id}: committed {committed} cores exceed plan {st.plan_cores}"
                )
            if self._ram_used(st) > st.ram_cap_gb + 1e-6:
                raise RuntimeError(f"{site_id}: RAM over capacity")
            if st.cold_used_gb > st.spec.cold_storage_gb + 1e-9:
                raise RuntimeError(f"{site_id}: cold storage over capacity")
            if self.t < self.end_s:
                raw = power_at(st.trace, self.t) * 1e6
                limit = raw * (1.0 - st.spec.overhead_fraction) + 1e-6
                draw = self._current_draw(st)
                if draw > limit:
                    raise RuntimeError(
                        f"{site_id}: drawing {draw} W against usable {limit} W"
                    )


def run_scenario(cfg: ScenarioConfig) -> Engine:
    """Convenience wrapper: build, run, and return the finished engine."""
    eng = Engine(cfg)
    eng.run()
    return eng
