"""DAG-structured jobs: tasks, precedence, deadlines, and carbon SLOs.

Tasks are embarrassingly parallel up to ``max_parallelism``: running at
width w consumes w core-seconds per wall second, so the same task finishes
in ``cpu_core_seconds / w`` seconds of wall time.  Progress checkpoints
continuously -- a frozen task retains every core-second already burned.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field

from .errors import CyclicDependency, UnknownTask


class JobTier(str, enum.Enum):
    STANDARD = "standard"
    PREMIUM = "premium"


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    cpu_core_seconds: float
    ram_gb: float = 0.0
    state_gb: float = 0.0
    max_parallelism: int = 1

    def __post_init__(self):
        if not self.task_id:
            raise ValueError("task_id must be non-empty")
        if self.cpu_core_seconds <= 0:
            raise ValueError("cpu_core_seconds must be > 0")
        if self.ram_gb < 0 or self.state_gb < 0:
            raise ValueError("ram_gb and state_gb must be >= 0")
        if self.max_parallelism < 1:
            raise ValueError("max_parallelism must be >= 1")


@dataclass(frozen=True)
class SloSpec:
    """Per-job carbon promise: at least X renewable, at most Y kg CO2e."""

    min_renewable_fraction: float = 0.0
    max_kgco2e: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.min_renewable_fraction <= 1.0):
            raise ValueError("min_renewable_fraction must be in [0, 1]")
        if self.max_kgco2e is not None and self.max_kgco2e < 0:
            raise ValueError("max_kgco2e must be >= 0 or None")


@dataclass(frozen=True)
class JobSpec:
    job_id: str
    tasks: tuple[TaskSpec, ...]
    edges: tuple[tuple[str, str], ...] = ()
    arrival_s: float = 0.0
    deadline_s: float = float("inf")
    slo: SloSpec = field(default_factory=SloSpec)
    tier: JobTier = JobTier.STANDARD

    def __post_init__(self):
        if not self.job_id:
            raise ValueError("job_id must be non-empty")
        if not self.tasks:
            raise ValueError("a job needs at least one task")
        ids = [t.task_id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate task ids in job {self.job_id}")
        known = set(ids)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"edge ({a}, {b}) references unknown task")
            if a == b:
                raise ValueError(f"self-edge on task {a}")
        if not (self.deadline_s > self.arrival_s):
            raise ValueError("deadline_s must be after arrival_s")

    def task(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise UnknownTask(f"job {self.job_id} has no task {task_id}")

    @property
    def total_core_seconds(self) -> float:
        return sum(t.cpu_core_seconds for t in self.tasks)

    @property
    def total_state_gb(self) -> float:
        return sum(t.state_gb for t in self.tasks)


def validate_dag(job: JobSpec) -> list[str]:
    """Topological order of the job's tasks, smallest task_id first on ties.

    Raises CyclicDependency carrying one offending cycle.
    """
    succ: dict[str, list[str]] = {t.task_id: [] for t in job.tasks}
    indeg: dict[str, int] = {t.task_id: 0 for t in job.tasks}
    for a, b in job.edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [tid for tid, d in sorted(indeg.items()) if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        tid = heapq.heappop(ready)
        order.append(tid)
        for nxt in succ[tid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) == len(job.tasks):
        return order
    # Walk successors among the leftover nodes to exhibit a cycle.
    left = {tid for tid, d in indeg.items() if tid not in order}
    node = min(left)
    seen: list[str] = []
    while node not in seen:
        seen.append(node)
        node = min(n for n in succ[node] if n in left)
    cycle = seen[seen.index(node):]
    raise CyclicDependency(cycle)


def ready_tasks(job: JobSpec, completed: set[str]) -> set[str]:
    """Tasks whose predecessors are all complete and which are not done."""
    known = {t.task_id for t in job.tasks}
    unknown = completed - known
    if unknown:
        raise UnknownTask(f"completed set names unknown tasks: {sorted(unknown)}")
    blocked = {b for a, b in job.edges if a not in completed}
    return known - completed - blocked


def burst_width(task: TaskSpec, available_cores: int) -> int:
    """Parallel width a task bursts to when offered spare cores."""
    if available_cores < 0:
        raise ValueError("available_cores must be >= 0")
    return min(task.max_parallelism, available_cores)
