/**
 * Parsing and validation for the simulator's per-step series file.
 *
 * The simulator emits one CSV row per (step, site) with a fixed, documented
 * header. This module is the only place that knows that contract; everything
 * downstream works with typed rows.
 */
import Papa from "papaparse";

/** Exact header the simulator writes, in column order. */
export const SERIES_HEADER = [
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
] as const;

/** One series row: the state of one site over one trace step. */
export interface SeriesRow {
  t_s: number;
  site_id: string;
  available_mw: number;
  price_usd_per_mwh: number;
  carbon_gco2_per_kwh: number;
  opportunity: boolean;
  plan_cores: number;
  committed_cores: number;
  watts_used: number;
  fabric_watts: number;
  ram_used_gb: number;
  cold_used_gb: number;
  resident_jobs: number;
  frozen_jobs: number;
}

/** The input file's header or cell contents do not match the contract. */
export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

/** The input file carries no data rows. */
export class EmptySeries extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptySeries";
  }
}

function numberAt(cells: string[], col: number, rowNo: number): number {
  const raw = cells[col];
  const value = Number(raw);
  if (raw === undefined || raw.trim() === "" || !Number.isFinite(value)) {
    throw new SchemaMismatch(
      `row ${rowNo}: column ${SERIES_HEADER[col]} has non-numeric value ${JSON.stringify(raw)}`,
    );
  }
  return value;
}

function flagAt(cells: string[], col: number, rowNo: number): boolean {
  const raw = cells[col];
  if (raw !== "0" && raw !== "1") {
    throw new SchemaMismatch(
      `row ${rowNo}: column ${SERIES_HEADER[col]} must be 0 or 1, got ${JSON.stringify(raw)}`,
    );
  }
  return raw === "1";
}

/**
 * Parse series CSV text into typed rows.
 *
 * Throws SchemaMismatch when the header or any cell deviates from the
 * documented contract, and EmptySeries when the file holds no data rows.
 */
export function parseSeries(text: string): SeriesRow[] {
  if (text.trim() === "") {
    throw new EmptySeries("series file has no rows at all");
  }
  const parsed = Papa.parse<string[]>(text, { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaMismatch(`malformed CSV: ${first.message}`);
  }
  const records = parsed.data;
  const header = records[0];
  if (
    header.length !== SERIES_HEADER.length ||
    SERIES_HEADER.some((name, i) => header[i] !== name)
  ) {
    throw new SchemaMismatch(
      `header mismatch: expected ${SERIES_HEADER.join(",")} got ${header.join(",")}`,
    );
  }
  if (records.length === 1) {
    throw new EmptySeries("series file has a header but no data rows");
  }

  const rows: SeriesRow[] = [];
  for (let i = 1; i < records.length; i++) {
    const cells = records[i];
    if (cells.length !== SERIES_HEADER.length) {
      throw new SchemaMismatch(
        `row ${i}: expected ${SERIES_HEADER.length} fields, got ${cells.length}`,
      );
    }
    rows.push({
      t_s: numberAt(cells, 0, i),
      site_id: cells[1],
      available_mw: numberAt(cells, 2, i),
      price_usd_per_mwh: numberAt(cells, 3, i),
      carbon_gco2_per_kwh: numberAt(cells, 4, i),
      opportunity: flagAt(cells, 5, i),
      plan_cores: numberAt(cells, 6, i),
      committed_cores: numberAt(cells, 7, i),
      watts_used: numberAt(cells, 8, i),
      fabric_watts: numberAt(cells, 9, i),
      ram_used_gb: numberAt(cells, 10, i),
      cold_used_gb: numberAt(cells, 11, i),
      resident_jobs: numberAt(cells, 12, i),
      frozen_jobs: numberAt(cells, 13, i),
    });
  }
  return rows;
}

/** Distinct site ids in lexicographic order. */
export function siteIds(rows: SeriesRow[]): string[] {
  return [...new Set(rows.map((r) => r.site_id))].sort();
}
