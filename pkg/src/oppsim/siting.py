"""Choosing datacenter locations from candidate power traces.

A candidate "hits" a step when the step is opportunity power and offers
at least the demanded megawatts.  A portfolio covers a step when any
chosen candidate hits it; the mobile workload then runs at the best
hitting site, so captured energy counts the strongest hit per step.
Greedy selection adds whichever candidate grows coverage (or captured
energy, with ``energy_weighted``) the most; the exhaustive variant tries
every subset and is the oracle the greedy is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MisalignedTraces
from .traces import PowerTrace, coverage


@dataclass(frozen=True)
class CandidateSite:
    """One prospective location and its power trace."""

    location_id: str
    trace: PowerTrace

    def __post_init__(self):
        if not self.location_id:
            raise ValueError("location_id must be non-empty")


@dataclass(frozen=True)
class SitingResult:
    chosen: tuple[str, ...]
    coverage: float
    captured_mwh: float


def duty_factor(trace: PowerTrace, min_mw: float = 0.0) -> float:
    """Fraction of steps offering opportunity power of at least min_mw."""
    return coverage(trace, min_mw)


def _check_aligned(candidates: list[CandidateSite]):
    if not candidates:
        raise ValueError("need at least one candidate")
    first = candidates[0].trace
    for c in candidates[1:]:
        tr = c.trace
        if (
            tr.start_epoch_s != first.start_epoch_s
            or tr.step_s != first.step_s
            or len(tr.samples) != len(first.samples)
        ):
            raise MisalignedTraces(
                f"candidate {c.location_id} trace grid differs from {candidates[0].location_id}"
            )


def _hits(candidate: CandidateSite, demand_mw: float) -> list[float]:
    """Qualifying MW per step: 0.0 where the candidate misses."""
    return [
        s.available_mw if (s.is_opportunity and s.available_mw >= demand_mw) else 0.0
        for s in candidate.trace.samples
    ]


def _evaluate(
    chosen: list[CandidateSite], hits: dict[str, list[float]], n_steps: int, step_s: float
) -> tuple[float, float]:
    """(coverage, captured_mwh) of a portfolio: best hitting site per step."""
    covered = 0
    mwh = 0.0
    for i in range(n_steps):
        best = max((hits[c.location_id][i] for c in chosen), default=0.0)
        if best > 0.0:
            covered += 1
            mwh += best * step_s / 3600.0
    return (covered / n_steps if n_steps else 0.0), mwh


def greedy_siting(
    candidates: list[CandidateSite],
    k: int,
    demand_mw: float = 0.0,
    energy_weighted: bool = False,
) -> SitingResult:
    """Pick up to k locations by marginal gain, ties to the lowest id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_aligned(candidates)
    n = len(candidates[0].trace.samples)
    step_s = candidates[0].trace.step_s
    hits = {c.location_id: _hits(c, demand_mw) for c in candidates}
    remaining = sorted(candidates, key=lambda c: c.location_id)
    chosen: list[CandidateSite] = []
    while remaining and len(chosen) < k:
        base_cov, base_mwh = _evaluate(chosen, hits, n, step_s)
        best = None
        for c in remaining:
            cov, mwh = _evaluate(chosen + [c], hits, n, step_s)
            gain = (mwh - base_mwh) if energy_weighted else (cov - base_cov)
            if best is None or gain > best[0]:
                best = (gain, c)
        if best[0] <= 0.0 and chosen:
            break  # nothing left to gain
        chosen.append(best[1])
        remaining.remove(best[1])
    cov, mwh = _evaluate(chosen, hits, n, step_s)
    return SitingResult(tuple(c.location_id for c in chosen), cov, mwh)


def exhaustive_siting(
    candidates: list[CandidateSite],
    k: int,
    demand_mw: float = 0.0,
    energy_weighted: bool = False,
) -> SitingResult:
    """Best subset of size <= k by brute force; the greedy's yardstick."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _check_aligned(candidates)
    n = len(candidates[0].trace.samples)
    step_s = candidates[0].trace.step_s
    hits = {c.location_id: _hits(c, demand_mw) for c in candidates}
    ordered = sorted(candidates, key=lambda c: c.location_id)
    kk = min(k, len(ordered))
    best: tuple | None = None
    from itertools import combinations

    for subset in combinations(ordered, kk):
        cov, mwh = _evaluate(list(subset), hits, n, step_s)
        primary = mwh if energy_weighted else cov
        secondary = cov if energy_weighted else mwh
        key = (-primary, -secondary, tuple(c.location_id for c in subset))
        if best is None or key < best[0]:
            best = (key, subset, cov, mwh)
    _, subset, cov, mwh = best
    return SitingResult(tuple(c.location_id for c in subset), cov, mwh)
