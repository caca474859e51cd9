"""Exhaustive minimum-carbon scheduler for tiny instances.

A forward dynamic program over the joint state of every job, step by
step: at each trace step a job is queued, resident at a site (running 0
or 1 cores), mid-migration, or done.  The program keeps the cheapest
grid-carbon cost per reachable joint state and reports feasibility plus
the optimum.  It exists to bound the production policy from below in
tests, so it only accepts instances whose step-quantized semantics match
the continuous engine exactly:

* chain-shaped jobs, max_parallelism 1, RAM demands 0;
* work, arrivals, deadlines, and link transfer times in whole steps;
* zero-idle compute servers with one per-core wattage per site, no
  infrastructure nodes, zero overhead fraction, zero-watt fabric;
* cold storage large enough that freezing can never kill a job.

Anything else raises SearchSpaceTooLarge rather than returning a value
that does not mean what the caller thinks it means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SearchSpaceTooLarge
from .network import InterSiteLink, transfer_time
from .sites import SiteSpec, capacity_for_budget, usable_budget
from .traces import PowerTrace
from .workload import JobSpec, validate_dag

MAX_SITES = 3
MAX_JOBS = 5
MAX_STEPS = 200
JOULES_PER_KWH = 3.6e6


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    min_grid_kgco2e: float | None
    states_explored: int


def _whole_steps(value: float, step_s: float, what: str) -> int:
    q = value / step_s
    r = round(q)
    if abs(q - r) > 1e-9:
        raise SearchSpaceTooLarge(f"{what} ({value}) is not a whole number of steps")
    return int(r)


def _check_instance(jobs, sites, traces, duration_s):
    if not (1 <= len(sites) <= MAX_SITES):
        raise SearchSpaceTooLarge(f"need 1..{MAX_SITES} sites, got {len(sites)}")
    if not (1 <= len(jobs) <= MAX_JOBS):
        raise SearchSpaceTooLarge(f"need 1..{MAX_JOBS} jobs, got {len(jobs)}")
    step = None
    for site in sites:
        tr = traces[site.trace_ref]
        if step is None:
            step = tr.step_s
        if tr.step_s != step:
            raise SearchSpaceTooLarge("traces disagree on step")
        if site.infra_servers:
            raise SearchSpaceTooLarge(f"site {site.site_id} has infra nodes")
        if site.overhead_fraction != 0.0:
            raise SearchSpaceTooLarge(f"site {site.site_id} has nonzero overhead")
        if site.fabric.watts_per_switch != 0.0:
            raise SearchSpaceTooLarge(f"site {site.site_id} fabric draws power")
        pcs = {s.per_core_watts for s in site.compute_servers}
        if len(pcs) != 1:
            raise SearchSpaceTooLarge(f"site {site.site_id} mixes per-core wattages")
        if any(s.idle_watts != 0.0 for s in site.compute_servers):
            raise SearchSpaceTooLarge(f"site {site.site_id} has idle draw")
        total_state = sum(j.total_state_gb for j in jobs)
        if site.cold_storage_gb < total_state:
            raise SearchSpaceTooLarge(f"site {site.site_id} cold storage could fill")
    steps = _whole_steps(duration_s, step, "duration")
    if steps > MAX_STEPS:
        raise SearchSpaceTooLarge(f"{steps} steps > {MAX_STEPS}")
    for job in jobs:
        topo = validate_dag(job)
        chain_edges = {(topo[i], topo[i + 1]) for i in range(len(topo) - 1)}
        if set(job.edges) != chain_edges:
            raise SearchSpaceTooLarge(f"job {job.job_id} is not a chain")
        for t in job.tasks:
            if t.max_parallelism != 1:
                raise SearchSpaceTooLarge(f"task {t.task_id} max_parallelism != 1")
            if t.ram_gb != 0.0:
                raise SearchSpaceTooLarge(f"task {t.task_id} has RAM demand")
            _whole_steps(t.cpu_core_seconds, step, f"task {t.task_id} work")
        _whole_steps(job.arrival_s, step, f"job {job.job_id} arrival")
    return step, steps


def exhaustive_schedule(
    jobs: list[JobSpec],
    sites: list[SiteSpec],
    traces: dict[str, PowerTrace],
    duration_s: float,
    links: dict[tuple[str, str], InterSiteLink] | None = None,
    max_expansions: int = 5_000_000,
) -> OracleResult:
    """Minimum total grid carbon over every feasible schedule.

    Feasible means every job finishes by min(deadline, duration).
    """
    links = links or {}
    step, nsteps = _check_instance(jobs, sites, traces, duration_s)
    sites = sorted(sites, key=lambda s: s.site_id)
    jobs = sorted(jobs, key=lambda j: j.job_id)
    nsites = len(sites)
    njobs = len(jobs)
    start = traces[sites[0].trace_ref].start_epoch_s

    cores = []
    opp = []
    carbon = []
    pc = []
    for site in sites:
        tr = traces[site.trace_ref]
        floor = site.fabric.floor_watts
        site_cores = []
        site_opp = []
        site_carbon = []
        for k in range(nsteps):
            t = start + k * step
            cap = capacity_for_budget(site, usable_budget(site, tr, t, floor))
            site_cores.append(cap.active_cores)
            sample = tr.sample_at(t)
            site_opp.append(sample.is_opportunity)
            site_carbon.append(sample.carbon_gco2_per_kwh)
        cores.append(site_cores)
        opp.append(site_opp)
        carbon.append(site_carbon)
        pc.append(site.compute_servers[0].per_core_watts)

    topos = [validate_dag(j) for j in jobs]
    need = [
        [int(round(j.task(t).cpu_core_seconds / step)) for t in topo]
        for j, topo in zip(jobs, topos)
    ]
    ntasks = [len(topo) for topo in topos]
    arr = [int(round(j.arrival_s / step)) for j in jobs]
    strict = [j.slo.min_renewable_fraction == 1.0 for j in jobs]
    # Job j may run no later than step dl_last[j] and still meet its deadline:
    # work done during step k lands at (k+1)*step, which must be <= deadline.
    dl_last = []
    for j in jobs:
        eff = min(j.deadline_s, start + duration_s) - start
        dl_last.append(int(math.floor(eff / step - 1.0 + 1e-9)))
    # Data left to move once td tasks are done, and the VM count to hand off.
    state_after = [
        [sum(jobs[i].task(t).state_gb for t in topos[i][td:]) for td in range(ntasks[i] + 1)]
        for i in range(njobs)
    ]
    site_ids = [s.site_id for s in sites]

    def mig_steps(i: int, td: int, si: int, sj: int) -> int | None:
        link = links.get((site_ids[si], site_ids[sj]))
        if link is None:
            return None
        vms = max(1, ntasks[i] - td)
        m = _whole_steps(
            transfer_time(state_after[i][td], link, vms), step, "transfer time"
        )
        return m if m >= 1 else None

    def rem_steps(i: int, td: int, pr: int) -> int:
        return need[i][td] - pr + sum(need[i][td + 1:]) if td < ntasks[i] else 0

    def options(i: int, part: tuple, k: int) -> list[tuple[tuple, tuple | None]]:
        """(successor_part, (site_idx, width) | None) choices for job i."""
        code = part[0]
        if code == "d":
            return [(part, None)]
        if k > dl_last[i]:
            return []  # cannot finish on time anymore
        if code == "u":
            if k < arr[i]:
                return [(part, None)]
            code = "q"
        out: list[tuple[tuple, tuple | None]] = []
        if code == "q":
            out.append((("q",), None))
            for si in range(nsites):
                out.extend(_run_options(i, si, 0, 0, k))
            return out
        if code == "m":
            _, si, left, td, pr = part
            if left == 1:
                return [(("a", si, td, pr), None)]
            return [(("m", si, left - 1, td, pr), None)]
        _, si, td, pr = part
        out.extend(_run_options(i, si, td, pr, k))
        for sj in range(nsites):
            if sj == si:
                continue
            m = mig_steps(i, td, si, sj)
            if m is None:
                continue
            if k + m + rem_steps(i, td, pr) > dl_last[i] + 1:
                continue  # even a nonstop finish after arrival would be late
            if m == 1:
                out.append((("a", sj, td, pr), None))
            else:
                out.append((("m", sj, m - 1, td, pr), None))
        return out

    def _run_options(i, si, td, pr, k):
        out = []
        for w in (0, 1):
            if w == 1 and strict[i] and not opp[si][k]:
                continue
            td2, pr2 = td, pr + w
            if pr2 == need[i][td2]:
                td2, pr2 = td2 + 1, 0
            if td2 == ntasks[i]:
                out.append((("d",), (si, w)))
            else:
                if rem_steps(i, td2, pr2) > dl_last[i] - k:
                    continue  # cannot finish on time even running nonstop
                out.append((("a", si, td2, pr2), (si, w)))
        return out

    states: dict[tuple, float] = {tuple(("u",) for _ in jobs): 0.0}
    explored = 0
    for k in range(nsteps):
        per_job_options = None
        new_states: dict[tuple, float] = {}
        for state, cost in states.items():
            per_job_options = [options(i, state[i], k) for i in range(njobs)]
            if any(not o for o in per_job_options):
                continue

            def expand(i: int, used: dict[int, int], parts: list, add: float):
                nonlocal explored
                if i == njobs:
                    key = tuple(parts)
                    val = cost + add
                    if val < new_states.get(key, float("inf")):
                        new_states[key] = val
                    return
                for part, run in per_job_options[i]:
                    explored += 1
                    if explored > max_expansions:
                        raise SearchSpaceTooLarge(
                            f"more than {max_expansions} expansions"
                        )
                    extra = 0.0
                    next_used = used
                    if run is not None and run[1] > 0:
                        si = run[0]
                        if used.get(si, 0) + 1 > cores[si][k]:
                            continue
                        next_used = {**used, si: used.get(si, 0) + 1}
                        if not opp[si][k]:
                            joules = run[1] * pc[si] * step
                            extra = joules * carbon[si][k] / JOULES_PER_KWH / 1000.0
                    expand(i + 1, next_used, parts + [part], add + extra)

            expand(0, {}, [], 0.0)
        states = new_states
        if not states:
            return OracleResult(False, None, explored)

    done = tuple(("d",) for _ in jobs)
    finals = [c for s, c in states.items() if s == done]
    if not finals:
        return OracleResult(False, None, explored)
    return OracleResult(True, min(finals), explored)
