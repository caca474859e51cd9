"""Persistence, diurnal, and oracle power forecasts plus error metrics."""

import math

import pytest

from oppsim.errors import InsufficientHistory, OutOfRange
from oppsim.forecast import (
    Forecast,
    ForecastMethod,
    diurnal_forecast,
    forecast,
    forecast_error,
    oracle_forecast,
    persistence_forecast,
)
from oppsim.traces import PowerSample, PowerTrace


def mk(mws, step=300.0, start=0.0):
    return PowerTrace(
        "f", start, step, tuple(PowerSample(m, 10.0, 100.0) for m in mws)
    )


def test_persistence_repeats_current_sample():
    trace = mk([40.0, 10.0, 5.0, 80.0, 2.0])
    fc = persistence_forecast(trace, 0.0, 1200.0)
    assert fc.predicted_mw == (40.0, 40.0, 40.0, 40.0)
    assert fc.method == ForecastMethod.PERSISTENCE
    assert fc.step_s == 300.0


def test_persistence_constant_trace_zero_error():
    trace = mk([25.0] * 6)
    fc = persistence_forecast(trace, 300.0, 900.0)
    mae, rmse = forecast_error(fc, trace)
    assert mae == 0.0 and rmse == 0.0


def test_persistence_step_function_error():
    """After a jump, the held value misses by the jump size each step."""
    trace = mk([10.0, 10.0, 30.0, 30.0])
    fc = persistence_forecast(trace, 300.0, 600.0)
    mae, rmse = forecast_error(fc, trace)
    assert mae == pytest.approx(10.0)
    assert rmse == pytest.approx(math.sqrt((0.0**2 + 20.0**2) / 2.0))


def test_diurnal_replays_periodic_trace_exactly():
    day = [5.0, 25.0, 60.0, 30.0]
    trace = mk(day * 3, step=21600.0)
    fc = diurnal_forecast(trace, 86400.0 * 2, 86400.0)
    assert fc.predicted_mw == tuple(day)
    mae, rmse = forecast_error(fc, trace)
    assert mae == 0.0 and rmse == 0.0


def test_diurnal_averages_prior_days():
    """Two prior days at 10 and 30 in a slot predict their mean, 20."""
    day_a = [10.0, 10.0, 10.0, 10.0]
    day_b = [30.0, 30.0, 30.0, 30.0]
    trace = mk(day_a + day_b + [0.0, 0.0, 0.0, 0.0], step=21600.0)
    fc = diurnal_forecast(trace, 86400.0 * 2, 86400.0)
    assert fc.predicted_mw == (20.0, 20.0, 20.0, 20.0)


def test_diurnal_needs_one_full_day():
    trace = mk([5.0] * 6, step=21600.0)
    with pytest.raises(InsufficientHistory):
        diurnal_forecast(trace, 21600.0 * 3, 21600.0)


def test_oracle_is_exact():
    trace = mk([4.0, 8.0, 15.0, 16.0, 23.0])
    fc = oracle_forecast(trace, 300.0, 900.0)
    assert fc.predicted_mw == (8.0, 15.0, 16.0)
    mae, rmse = forecast_error(fc, trace)
    assert mae == 0.0 and rmse == 0.0


def test_oracle_beyond_trace_end():
    trace = mk([4.0, 8.0])
    with pytest.raises(OutOfRange):
        oracle_forecast(trace, 300.0, 600.0)


def test_dispatch_by_method():
    trace = mk([7.0, 9.0])
    by_name = forecast(trace, 0.0, 300.0, ForecastMethod.ORACLE)
    assert by_name.predicted_mw == (7.0,)
    assert by_name.method == ForecastMethod.ORACLE


def test_forecast_error_known_values():
    """Bias of +5 gives MAE=RMSE=5; errors [3,4] give 3.5 / ~3.5355."""
    trace = mk([10.0, 10.0])
    biased = Forecast(
        site_id="f",
        issued_at_s=0.0,
        horizon_s=600.0,
        step_s=300.0,
        predicted_mw=(15.0, 15.0),
        method=ForecastMethod.PERSISTENCE,
    )
    mae, rmse = forecast_error(biased, trace)
    assert mae == pytest.approx(5.0) and rmse == pytest.approx(5.0)

    uneven = Forecast(
        site_id="f",
        issued_at_s=0.0,
        horizon_s=600.0,
        step_s=300.0,
        predicted_mw=(13.0, 14.0),
        method=ForecastMethod.PERSISTENCE,
    )
    mae, rmse = forecast_error(uneven, trace)
    assert mae == pytest.approx(3.5)
    assert rmse == pytest.approx(3.5355, abs=1e-4)
