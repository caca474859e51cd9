"""Power availability traces.

A trace is a uniformly sampled time series describing one site's grid
conditions: available power (MW), spot price ($/MWh), grid carbon
intensity (gCO2e/kWh) and a curtailment flag.  Values are step-held: the
sample at index i applies to the half-open interval
``[start + i*step, start + (i+1)*step)``.

A sample counts as *opportunity power* when the grid is curtailing or the
price is at or below zero -- energy drawn then is surplus renewable
generation that would otherwise have been wasted, and carries no grid
carbon.

CSV schema (one trace per file, header required)::

    timestamp_epoch_s,site_id,available_mw,price_usd_per_mwh,carbon_gco2_per_kwh,curtailed

``curtailed`` must be 0 or 1.  At least two rows are required so the step
is well defined.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass

from .errors import (
    InvalidWindow,
    MalformedRow,
    MisalignedTraces,
    NegativePower,
    NonUniformStep,
    OutOfRange,
)

CSV_HEADER = [
    "timestamp_epoch_s",
    "site_id",
    "available_mw",
    "price_usd_per_mwh",
    "carbon_gco2_per_kwh",
    "curtailed",
]


@dataclass(frozen=True)
class PowerSample:
    """Grid conditions over one trace step."""

    available_mw: float
    price_usd_per_mwh: float
    carbon_gco2_per_kwh: float
    curtailment_flag: bool = False

    def __post_init__(self):
        for name in ("available_mw", "price_usd_per_mwh", "carbon_gco2_per_kwh"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.available_mw < 0:
            raise ValueError(f"available_mw must be >= 0, got {self.available_mw}")
        if self.carbon_gco2_per_kwh < 0:
            raise ValueError(
                f"carbon_gco2_per_kwh must be >= 0, got {self.carbon_gco2_per_kwh}"
            )

    @property
    def is_opportunity(self) -> bool:
        """True when drawing power now consumes otherwise-wasted generation."""
        return self.curtailment_flag or self.price_usd_per_mwh <= 0.0


@dataclass(frozen=True)
class PowerTrace:
    """A uniformly sampled power trace for one site."""

    site_id: str
    start_epoch_s: float
    step_s: float
    samples: tuple[PowerSample, ...]

    def __post_init__(self):
        if not self.site_id:
            raise ValueError("site_id must be non-empty")
        if not self.samples:
            raise ValueError("trace must contain at least one sample")
        if not (self.step_s > 0):
            raise ValueError(f"step_s must be > 0, got {self.step_s}")

    @property
    def duration_s(self) -> float:
        return self.step_s * len(self.samples)

    @property
    def end_epoch_s(self) -> float:
        return self.start_epoch_s + self.duration_s

    def index_at(self, t_s: float) -> int:
        """Index of the sample covering time ``t_s``.

        Raises OutOfRange outside ``[start, start + duration)``.
        """
        if t_s < self.start_epoch_s or t_s >= self.end_epoch_s:
            raise OutOfRange(
                f"t={t_s} outside trace {self.site_id} "
                f"[{self.start_epoch_s}, {self.end_epoch_s})"
            )
        i = int((t_s - self.start_epoch_s) // self.step_s)
        # Guard the float edge where t sits a hair below a boundary.
        if i >= len(self.samples):
            i = len(self.samples) - 1
        return i

    def sample_at(self, t_s: float) -> PowerSample:
        return self.samples[self.index_at(t_s)]


def power_at(trace: PowerTrace, t_s: float) -> float:
    """Available MW at time ``t_s`` (step-hold)."""
    return trace.sample_at(t_s).available_mw


# --- CSV ingestion -----------------------------------------------------

def _parse_float(field: str, row_num: int, name: str) -> float:
    try:
        v = float(field)
    except ValueError as exc:
        raise MalformedRow(f"row {row_num}: bad {name} {field!r}") from exc
    if not math.isfinite(v):
        raise MalformedRow(f"row {row_num}: non-finite {name} {field!r}")
    return v


def parse_trace_csv(source) -> PowerTrace:
    """Parse one trace from CSV text, bytes, or a file-like object.

    The file must hold a single site, at least two rows, uniformly spaced
    timestamps and non-negative power.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty file") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise MalformedRow(f"bad header {header!r}, expected {CSV_HEADER!r}")

    times: list[float] = []
    site_id = None
    samples: list[PowerSample] = []
    for row_num, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedRow(f"row {row_num}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        ts = _parse_float(row[0], row_num, "timestamp_epoch_s")
        sid = row[1].strip()
        if not sid:
            raise MalformedRow(f"row {row_num}: empty site_id")
        if site_id is None:
            site_id = sid
        elif sid != site_id:
            raise MalformedRow(f"row {row_num}: mixed site ids {site_id!r} and {sid!r}")
        mw = _parse_float(row[2], row_num, "available_mw")
        if mw < 0:
            raise NegativePower(f"row {row_num}: available_mw={mw}")
        price = _parse_float(row[3], row_num, "price_usd_per_mwh")
        carbon = _parse_float(row[4], row_num, "carbon_gco2_per_kwh")
        if carbon < 0:
            raise MalformedRow(f"row {row_num}: carbon_gco2_per_kwh={carbon} < 0")
        flag = row[5].strip()
        if flag not in ("0", "1"):
            raise MalformedRow(f"row {row_num}: curtailed must be 0 or 1, got {flag!r}")
        times.append(ts)
        samples.append(PowerSample(mw, price, carbon, flag == "1"))

    if len(samples) < 2:
        raise MalformedRow(f"need at least 2 rows to fix the step, got {len(samples)}")
    step = times[1] - times[0]
    if step <= 0:
        raise NonUniformStep(f"timestamps must increase, got step {step}")
    for i in range(1, len(times)):
        if not math.isclose(times[i] - times[i - 1], step, rel_tol=1e-9, abs_tol=1e-6):
            raise NonUniformStep(
                f"row {i + 2}: step {times[i] - times[i - 1]} != {step}"
            )
    return PowerTrace(site_id, times[0], step, tuple(samples))


def _fmt(v: float) -> str:
    """Render a float compactly but losslessly (ints stay ints)."""
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def trace_to_csv(trace: PowerTrace) -> str:
    """Serialize a trace to the canonical CSV schema (round-trips exactly)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for i, s in enumerate(trace.samples):
        t = trace.start_epoch_s + i * trace.step_s
        w.writerow([
            _fmt(t),
            trace.site_id,
            _fmt(s.available_mw),
            _fmt(s.price_usd_per_mwh),
            _fmt(s.carbon_gco2_per_kwh),
            "1" if s.curtailment_flag else "0",
        ])
    return out.getvalue()


# --- synthetic traces --------------------------------------------------

def synth_solar(
    peak_mw: float,
    sunrise_s: float = 21600.0,
    sunset_s: float = 64800.0,
    step_s: float = 300.0,
    days: int = 1,
    site_id: str = "solar",
    start_epoch_s: float = 0.0,
    day_price: float = 0.0,
    night_price: float = 35.0,
    night_carbon: float = 450.0,
) -> PowerTrace:
    """Clear-sky solar farm: a half-sine arch between sunrise and sunset.

    Samples take the value at the left edge of each step, so the sample
    covering solar noon equals ``peak_mw`` exactly.  Daylight samples are
    flagged curtailed (the farm is modelled as surplus generation); night
    samples carry grid price/carbon and zero available power.
    """
    if peak_mw < 0:
        raise ValueError("peak_mw must be >= 0")
    if not (0 <= sunrise_s < sunset_s <= 86400):
        raise ValueError("need 0 <= sunrise < sunset <= 86400")
    if days < 1:
        raise ValueError("days must be >= 1")
    if 86400.0 % step_s != 0:
        raise ValueError("step_s must divide a day")
    per_day = int(86400.0 / step_s)
    daylen = sunset_s - sunrise_s
    samples = []
    for k in range(per_day * days):
        tod = (k * step_s) % 86400.0
        if sunrise_s <= tod < sunset_s:
            mw = peak_mw * math.sin(math.pi * (tod - sunrise_s) / daylen)
            samples.append(PowerSample(mw, day_price, 0.0, True))
        else:
            samples.append(PowerSample(0.0, night_price, night_carbon, False))
    return PowerTrace(site_id, start_epoch_s, step_s, tuple(samples))


def synth_wind(
    mean_mw: float,
    volatility_mw: float,
    seed: int,
    reversion: float = 0.1,
    step_s: float = 300.0,
    days: int = 1,
    site_id: str = "wind",
    start_epoch_s: float = 0.0,
    price: float = 0.0,
    carbon: float = 0.0,
) -> PowerTrace:
    """Wind farm output as a mean-reverting AR(1) walk, clipped at zero.

    ``x[k+1] = x[k] + reversion*(mean - x[k]) + volatility*N(0,1)`` with
    all randomness drawn from ``random.Random(seed)``, so the same seed
    always yields the same trace.  Producing samples are flagged curtailed
    (the farm is surplus generation).
    """
    if mean_mw < 0 or volatility_mw < 0:
        raise ValueError("mean_mw and volatility_mw must be >= 0")
    if not (0 < reversion <= 1):
        raise ValueError("reversion must be in (0, 1]")
    if days < 1:
        raise ValueError("days must be >= 1")
    if 86400.0 % step_s != 0:
        raise ValueError("step_s must divide a day")
    rng = random.Random(seed)
    n = int(86400.0 / step_s) * days
    samples = []
    x = mean_mw
    for _ in range(n):
        mw = max(0.0, x)
        samples.append(PowerSample(mw, price, carbon, mw > 0.0))
        x = x + reversion * (mean_mw - x) + volatility_mw * rng.gauss(0.0, 1.0)
    return PowerTrace(site_id, start_epoch_s, step_s, tuple(samples))


# --- opportunity structure --------------------------------------------

def _meets(sample: PowerSample, min_mw: float) -> bool:
    return sample.is_opportunity and sample.available_mw >= min_mw


def opportunity_windows(trace: PowerTrace, min_mw: float = 0.0) -> list[tuple[float, float]]:
    """Maximal half-open intervals where opportunity power >= ``min_mw``.

    Returned windows are disjoint, sorted, and use absolute epoch seconds.
    """
    if min_mw < 0:
        raise InvalidWindow(f"min_mw must be >= 0, got {min_mw}")
    windows: list[tuple[float, float]] = []
    open_at: float | None = None
    for i, s in enumerate(trace.samples):
        t = trace.start_epoch_s + i * trace.step_s
        if _meets(s, min_mw):
            if open_at is None:
                open_at = t
        else:
            if open_at is not None:
                windows.append((open_at, t))
                open_at = None
    if open_at is not None:
        windows.append((open_at, trace.end_epoch_s))
    return windows


def coverage(trace: PowerTrace, min_mw: float = 0.0) -> float:
    """Fraction of trace steps offering opportunity power >= ``min_mw``."""
    if min_mw < 0:
        raise InvalidWindow(f"min_mw must be >= 0, got {min_mw}")
    hits = sum(1 for s in trace.samples if _meets(s, min_mw))
    return hits / len(trace.samples)


def union_coverage(traces: list[PowerTrace], min_mw: float = 0.0) -> float:
    """Fraction of steps where at least one trace offers opportunity power.

    All traces must share start, step and duration.
    """
    if not traces:
        raise MisalignedTraces("need at least one trace")
    if min_mw < 0:
        raise InvalidWindow(f"min_mw must be >= 0, got {min_mw}")
    first = traces[0]
    for t in traces[1:]:
        if (
            t.start_epoch_s != first.start_epoch_s
            or t.step_s != first.step_s
            or len(t.samples) != len(first.samples)
        ):
            raise MisalignedTraces(
                f"trace {t.site_id} grid differs from {first.site_id}"
            )
    n = len(first.samples)
    hits = 0
    for i in range(n):
        if any(_meets(t.samples[i], min_mw) for t in traces):
            hits += 1
    return hits / n
