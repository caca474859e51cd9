"""Command line entry points.

``oppsim simulate``  run one scenario (or a sweep of several) and write
                     report.json / series.csv / ledger.csv / events.csv;
``oppsim econ``      print the storage-cost and opportunity-growth numbers;
``oppsim synth``     generate a synthetic solar or wind trace CSV;
``oppsim site``      pick locations from a directory of candidate traces.

Exit codes: 0 success, 2 bad usage or config, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .economics import (
    CAISO_OPPORTUNITY_TWH,
    MISO_OPPORTUNITY_TWH,
    OPPORTUNITY_CAGR,
    OPPORTUNITY_RANGE_TWH,
    PROJECTION_YEARS,
    DEFAULT_CONSTANTS,
    dc_coverage_fraction,
    growth_projection,
    one_hour_storage_cost,
)
from .errors import ConfigError, OppsimError
from .siting import CandidateSite, greedy_siting
from .traces import parse_trace_csv, synth_solar, synth_wind, trace_to_csv


def _simulate_one(config_path: str, outdir: str, seed: int | None) -> dict:
    """Worker for both single runs and sweep processes."""
    from .engine import run_scenario
    from .report import write_outputs
    from .scenario import load_scenario

    cfg = load_scenario(config_path, seed_override=seed)
    eng = run_scenario(cfg)
    return write_outputs(eng, outdir)


def _cmd_simulate(args) -> int:
    if len(args.config) > 1 and not args.sweep:
        print("error: several configs need --sweep", file=sys.stderr)
        return 2
    runs: list[tuple[str, str]] = []
    if args.sweep:
        for path in args.config:
            stem = os.path.splitext(os.path.basename(path))[0]
            runs.append((path, os.path.join(args.output, stem)))
    else:
        runs.append((args.config[0], args.output))
    if args.sweep and len(runs) > 1:
        with ProcessPoolExecutor() as pool:
            futures = [
                pool.submit(_simulate_one, path, outdir, args.seed)
                for path, outdir in runs
            ]
            reports = [f.result() for f in futures]
    else:
        reports = [_simulate_one(path, outdir, args.seed) for path, outdir in runs]
    for (path, outdir), report in zip(runs, reports):
        totals = report["totals"]
        print(
            f"{path}: {totals['jobs_done']}/{totals['jobs_total']} jobs done, "
            f"{totals['metered_energy_j'] / 3.6e6:.3f} kWh, "
            f"{totals['grid_carbon_kgco2e']:.3f} kg grid CO2e -> {outdir}"
        )
    return 0


def _cmd_econ(args) -> int:
    usd_per_kwh = (
        args.storage_usd_per_kwh
        if args.storage_usd_per_kwh is not None
        else DEFAULT_CONSTANTS.battery_usd_per_kwh
    )
    low_twh = (
        args.opportunity_twh
        if args.opportunity_twh is not None
        else CAISO_OPPORTUNITY_TWH
    )
    coverage_low_twh = (
        args.opportunity_twh
        if args.opportunity_twh is not None
        else OPPORTUNITY_RANGE_TWH[0]
    )
    out = {
        "battery_usd_per_kwh": usd_per_kwh,
        "opportunity_twh_low": low_twh,
        "opportunity_twh_high": MISO_OPPORTUNITY_TWH,
        "storage_cost_usd_low": one_hour_storage_cost(low_twh, usd_per_kwh),
        "storage_cost_usd_high": one_hour_storage_cost(MISO_OPPORTUNITY_TWH, usd_per_kwh),
        "growth_cagr": OPPORTUNITY_CAGR,
        "projection_years": PROJECTION_YEARS,
        "projected_twh": growth_projection(low_twh, OPPORTUNITY_CAGR, PROJECTION_YEARS),
        "dc_annual_twh": DEFAULT_CONSTANTS.dc_annual_twh,
        "dc_coverage_low": dc_coverage_fraction(
            coverage_low_twh, DEFAULT_CONSTANTS.dc_annual_twh
        ),
        "dc_coverage_high": dc_coverage_fraction(
            OPPORTUNITY_RANGE_TWH[1], DEFAULT_CONSTANTS.dc_annual_twh
        ),
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _cmd_synth(args) -> int:
    if args.kind == "solar":
        trace = synth_solar(
            peak_mw=args.peak_mw,
            sunrise_s=args.sunrise_s,
            sunset_s=args.sunset_s,
            step_s=args.step_s,
            days=args.days,
            site_id=args.site_id,
            start_epoch_s=args.start_epoch_s,
        )
    else:
        trace = synth_wind(
            mean_mw=args.mean_mw,
            volatility_mw=args.volatility_mw,
            seed=args.seed,
            reversion=args.reversion,
            step_s=args.step_s,
            days=args.days,
            site_id=args.site_id,
            start_epoch_s=args.start_epoch_s,
        )
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(trace_to_csv(trace))
    print(f"wrote {len(trace.samples)} samples to {args.output}")
    return 0


def _cmd_site(args, parser: argparse.ArgumentParser) -> int:
    if args.k <= 0:
        parser.error(f"-k must be positive, got {args.k}")
    paths = sorted(glob.glob(os.path.join(args.candidates, "*.csv")))
    if not paths:
        print(f"error: no candidate CSVs in {args.candidates}", file=sys.stderr)
        return 2
    candidates = []
    for path in paths:
        with open(path, "rb") as fh:
            trace = parse_trace_csv(fh.read())
        candidates.append(
            CandidateSite(os.path.splitext(os.path.basename(path))[0], trace)
        )
    result = greedy_siting(
        candidates, args.k, demand_mw=args.demand_mw, energy_weighted=args.energy_weighted
    )
    print(
        json.dumps(
            {
                "chosen": list(result.chosen),
                "coverage": result.coverage,
                "captured_mwh": result.captured_mwh,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oppsim",
        description="Trace-driven simulator for compute on opportunity power.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario or a sweep")
    sim.add_argument("config", nargs="+", help="scenario JSON file(s)")
    sim.add_argument("-o", "--output", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument(
        "--sweep",
        action="store_true",
        help="run each config in its own subdirectory, in parallel",
    )

    econ = sub.add_parser("econ", help="print storage-cost and growth numbers")
    econ.add_argument("--storage-usd-per-kwh", type=float, default=None)
    econ.add_argument(
        "--opportunity-twh",
        type=float,
        default=None,
        help="override the low annual-opportunity estimate",
    )

    synth = sub.add_parser("synth", help="generate a synthetic trace CSV")
    synth_sub = synth.add_subparsers(dest="kind", required=True)
    solar = synth_sub.add_parser("solar")
    solar.add_argument("--peak-mw", type=float, required=True)
    solar.add_argument("--sunrise-s", type=float, default=21600.0)
    solar.add_argument("--sunset-s", type=float, default=64800.0)
    wind = synth_sub.add_parser("wind")
    wind.add_argument("--mean-mw", type=float, required=True)
    wind.add_argument("--volatility-mw", type=float, default=0.0)
    wind.add_argument("--seed", type=int, default=0)
    wind.add_argument("--reversion", type=float, default=0.1)
    for p in (solar, wind):
        p.add_argument("--step-s", type=float, default=300.0)
        p.add_argument("--days", type=int, default=1)
        p.add_argument("--site-id", default=None)
        p.add_argument("--start-epoch-s", type=float, default=0.0)
        p.add_argument("-o", "--output", required=True)

    site = sub.add_parser("site", help="choose locations from candidate traces")
    site.add_argument("--candidates", required=True, help="directory of trace CSVs")
    site.add_argument("-k", type=int, required=True, help="number of locations")
    site.add_argument("--demand-mw", type=float, default=0.0)
    site.add_argument("--energy-weighted", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth" and args.site_id is None:
        args.site_id = args.kind
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "econ":
            return _cmd_econ(args)
        if args.command == "synth":
            return _cmd_synth(args)
        return _cmd_site(args, parser)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OppsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
