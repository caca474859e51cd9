"""Short-horizon power forecasts that drive proactive migration.

Three estimators, all aligned to the trace grid.  A forecast issued at
time t covers n consecutive steps starting with the step that contains t:

* persistence -- every step equals the power observed at t;
* diurnal     -- each step is the mean of earlier samples at the same
  time-of-day slot (needs at least one full day of history before t);
* oracle      -- the true future samples, for perfect-information runs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InsufficientHistory, MisalignedTraces, OutOfRange
from .traces import PowerSample, PowerTrace

SECONDS_PER_DAY = 86400.0


class ForecastMethod(str, enum.Enum):
    PERSISTENCE = "persistence"
    DIURNAL = "diurnal"
    ORACLE = "oracle"


@dataclass(frozen=True)
class Forecast:
    site_id: str
    issued_at_s: float
    horizon_s: float
    step_s: float
    predicted_mw: tuple[float, ...]
    method: ForecastMethod

    def __post_init__(self):
        if not self.predicted_mw:
            raise ValueError("forecast must cover at least one step")
        if any(v < 0 for v in self.predicted_mw):
            raise ValueError("predicted_mw values must be >= 0")
        if self.horizon_s != self.step_s * len(self.predicted_mw):
            raise ValueError("horizon_s must equal step_s * count")


def _steps(trace: PowerTrace, horizon_s: float) -> int:
    if horizon_s <= 0:
        raise ValueError("horizon_s must be > 0")
    return max(1, math.ceil(horizon_s / trace.step_s - 1e-9))


def _channel_series(
    trace: PowerTrace, t_s: float, horizon_s: float, method: ForecastMethod, value
) -> list[float]:
    """Forecast any per-sample channel (power, price, carbon, ...).

    ``value`` maps a PowerSample to the channel being predicted.  Public
    wrappers below fix the channel to available_mw; the scheduler reuses
    this on price and carbon channels.
    """
    k0 = trace.index_at(t_s)
    n = _steps(trace, horizon_s)
    if method == ForecastMethod.PERSISTENCE:
        return [value(trace.samples[k0])] * n
    if method == ForecastMethod.ORACLE:
        if k0 + n > len(trace.samples):
            raise OutOfRange(
                f"horizon ends {n} steps after t but trace {trace.site_id} "
                f"has {len(trace.samples) - k0}"
            )
        return [value(trace.samples[k0 + i]) for i in range(n)]
    if method == ForecastMethod.DIURNAL:
        if SECONDS_PER_DAY % trace.step_s != 0:
            raise InsufficientHistory(
                f"step {trace.step_s} does not divide a day; no diurnal slots"
            )
        per_day = int(SECONDS_PER_DAY / trace.step_s)
        if k0 < per_day:
            raise InsufficientHistory(
                f"diurnal estimator needs one full day before t, have {k0} steps"
            )
        sums = [0.0] * per_day
        counts = [0] * per_day
        for j in range(k0):
            slot = j % per_day
            sums[slot] += value(trace.samples[j])
            counts[slot] += 1
        return [sums[(k0 + i) % per_day] / counts[(k0 + i) % per_day] for i in range(n)]
    raise ValueError(f"unknown method {method!r}")


def _mw(sample: PowerSample) -> float:
    return sample.available_mw


def _make(trace, t_s, horizon_s, method, series) -> Forecast:
    return Forecast(
        site_id=trace.site_id,
        issued_at_s=t_s,
        horizon_s=trace.step_s * len(series),
        step_s=trace.step_s,
        predicted_mw=tuple(series),
        method=method,
    )


def persistence_forecast(trace: PowerTrace, t_s: float, horizon_s: float) -> Forecast:
    """Tomorrow looks exactly like right now."""
    m = ForecastMethod.PERSISTENCE
    return _make(trace, t_s, horizon_s, m, _channel_series(trace, t_s, horizon_s, m, _mw))


def diurnal_forecast(trace: PowerTrace, t_s: float, horizon_s: float) -> Forecast:
    """Each slot predicted as its mean over prior days."""
    m = ForecastMethod.DIURNAL
    return _make(trace, t_s, horizon_s, m, _channel_series(trace, t_s, horizon_s, m, _mw))


def oracle_forecast(trace: PowerTrace, t_s: float, horizon_s: float) -> Forecast:
    """Perfect information: the true future, for baselines and tests."""
    m = ForecastMethod.ORACLE
    return _make(trace, t_s, horizon_s, m, _channel_series(trace, t_s, horizon_s, m, _mw))


def forecast(
    trace: PowerTrace, t_s: float, horizon_s: float, method: ForecastMethod
) -> Forecast:
    """Dispatch to the estimator named by ``method``."""
    fn = {
        ForecastMethod.PERSISTENCE: persistence_forecast,
        ForecastMethod.DIURNAL: diurnal_forecast,
        ForecastMethod.ORACLE: oracle_forecast,
    }[ForecastMethod(method)]
    return fn(trace, t_s, horizon_s)


def forecast_error(fc: Forecast, trace: PowerTrace) -> tuple[float, float]:
    """(MAE, RMSE) of a forecast against the realized trace."""
    if fc.step_s != trace.step_s:
        raise MisalignedTraces(
            f"forecast step {fc.step_s} != trace step {trace.step_s}"
        )
    k0 = trace.index_at(fc.issued_at_s)
    n = len(fc.predicted_mw)
    if k0 + n > len(trace.samples):
        raise MisalignedTraces("forecast horizon extends past the trace end")
    abs_errs = [
        abs(fc.predicted_mw[i] - trace.samples[k0 + i].available_mw) for i in range(n)
    ]
    mae = sum(abs_errs) / n
    rmse = math.sqrt(sum(e * e for e in abs_errs) / n)
    return mae, rmse
