"""Back-of-envelope economics of surplus-renewable compute.

Pure functions comparing the cost of *storing* surplus generation against
simply consuming it in place.  Dollar math runs on exact rationals
internally (cents-scale precision) and is returned as floats.

Key published anchors reproduced here:

* grid-scale battery storage near $209/kWh installed;
* one hour of storage for ~1.5 TWh/yr of surplus costs ~$35M, and for
  ~6 TWh/yr about $140M;
* surplus-power growth near a 40% compound annual rate, reaching ~22 TWh
  after eight years from a 1.5 TWh base;
* new transmission between $2,500 and $16,000 per MW-mile;
* datacenters drawing ~70 TWh/yr, so 7-20 TWh of surplus covers 10-30%.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class EconConstants:
    """Published cost and demand constants used by the CLI table."""

    battery_usd_per_kwh: float = 209.0
    tx_usd_per_mw_mile_low: float = 2500.0
    tx_usd_per_mw_mile_high: float = 16000.0
    dc_annual_twh: float = 70.0
    hours_per_year: int = 8760

    def __post_init__(self):
        if self.battery_usd_per_kwh <= 0:
            raise ValueError("battery_usd_per_kwh must be > 0")
        if not (0 < self.tx_usd_per_mw_mile_low <= self.tx_usd_per_mw_mile_high):
            raise ValueError("need 0 < tx low <= tx high")
        if self.dc_annual_twh <= 0 or self.hours_per_year <= 0:
            raise ValueError("dc_annual_twh and hours_per_year must be > 0")


DEFAULT_CONSTANTS = EconConstants()

# Canonical surplus-energy figures for the two reference grid regions
# (TWh per year), the assumed compound growth rate, and the projection
# span in years.
CAISO_OPPORTUNITY_TWH = 1.5
MISO_OPPORTUNITY_TWH = 6.0
OPPORTUNITY_CAGR = 0.40
PROJECTION_YEARS = 8
OPPORTUNITY_RANGE_TWH = (7.0, 20.0)

# Reported range for 50 hours of storage at a single wind generation
# site; no derivation exists for it, so it is surfaced as a constant only.
WIND_SITE_50H_STORAGE_USD_RANGE = (50e6, 400e6)


def one_hour_storage_cost(
    annual_opportunity_twh: float, usd_per_kwh: float = 209.0
) -> float:
    """Cost of one average-hour of storage for a yearly surplus volume.

    Sizing convention: the battery holds one hour at the *average* rate,
    i.e. ``annual_twh * 1e9 / 8760`` kWh, priced at ``usd_per_kwh``.
    """
    if annual_opportunity_twh < 0:
        raise ValueError("annual_opportunity_twh must be >= 0")
    if usd_per_kwh <= 0:
        raise ValueError("usd_per_kwh must be > 0")
    kwh = Fraction(annual_opportunity_twh) * 10**9 / 8760
    return float(kwh * Fraction(usd_per_kwh))


def growth_projection(base_twh: float, cagr: float, years: int) -> float:
    """Compound growth: ``base * (1 + cagr) ** years``."""
    if base_twh < 0:
        raise ValueError("base_twh must be >= 0")
    if cagr <= -1:
        raise ValueError("cagr must be > -1")
    if years < 0:
        raise ValueError("years must be >= 0")
    return float(Fraction(base_twh) * (1 + Fraction(cagr)) ** years)


def transmission_cost(mw: float, miles: float, usd_per_mw_mile: float) -> float:
    """Build-out cost of a transmission corridor: MW x miles x unit cost."""
    if mw < 0 or miles < 0 or usd_per_mw_mile < 0:
        raise ValueError("all inputs must be >= 0")
    return float(Fraction(mw) * Fraction(miles) * Fraction(usd_per_mw_mile))


def dc_coverage_fraction(opportunity_twh: float, dc_annual_twh: float) -> float:
    """Fraction of yearly datacenter demand coverable by a surplus volume."""
    if dc_annual_twh <= 0:
        raise ValueError("dc_annual_twh must be > 0")
    if opportunity_twh < 0:
        raise ValueError("opportunity_twh must be >= 0")
    return float(Fraction(opportunity_twh) / Fraction(dc_annual_twh))
