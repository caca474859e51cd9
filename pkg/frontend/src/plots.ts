/**
 * The four chart kinds rendered from a simulator series file.
 *
 * Each kind maps typed series rows to line series and hands them to the
 * deterministic SVG scaffold; sites are always ordered lexicographically so
 * colors and legends are stable across runs.
 */
import { SeriesRow, siteIds } from "./series.js";
import { LineSeries, PALETTE, Point, renderChart } from "./svg.js";

export const PLOT_KINDS = [
  "generation",
  "utilization",
  "carbon",
  "watts-per-core",
] as const;

export type PlotKind = (typeof PLOT_KINDS)[number];

function rowsBySite(rows: SeriesRow[]): Map<string, SeriesRow[]> {
  const grouped = new Map<string, SeriesRow[]>();
  for (const site of siteIds(rows)) grouped.set(site, []);
  for (const row of rows) grouped.get(row.site_id)!.push(row);
  for (const list of grouped.values()) list.sort((a, b) => a.t_s - b.t_s);
  return grouped;
}

const colorOf = (i: number): string => PALETTE[i % PALETTE.length];

const HOUR_S = 3600;

function timeline(
  rows: SeriesRow[],
  value: (r: SeriesRow) => number,
): Map<string, Point[]> {
  const out = new Map<string, Point[]>();
  for (const [site, list] of rowsBySite(rows)) {
    out.set(
      site,
      list.map((r) => ({ x: r.t_s / HOUR_S, y: value(r) })),
    );
  }
  return out;
}

/**
 * Mean site draw per committed core at each distinct core count, per site.
 *
 * Only steps that actually committed cores contribute; the resulting points
 * are sorted by core count so the curve reads left to right.
 */
export function wattsPerCoreCurve(rows: SeriesRow[]): Map<string, Point[]> {
  const out = new Map<string, Point[]>();
  for (const [site, list] of rowsBySite(rows)) {
    const acc = new Map<number, { sum: number; n: number }>();
    for (const r of list) {
      if (r.committed_cores <= 0) continue;
      const perCore = r.watts_used / r.committed_cores;
      const bucket = acc.get(r.committed_cores) ?? { sum: 0, n: 0 };
      bucket.sum += perCore;
      bucket.n += 1;
      acc.set(r.committed_cores, bucket);
    }
    const points = [...acc.entries()]
      .map(([cores, { sum, n }]) => ({ x: cores, y: sum / n }))
      .sort((a, b) => a.x - b.x);
    out.set(site, points);
  }
  return out;
}

function seriesPerSite(
  curves: Map<string, Point[]>,
  style: Partial<LineSeries> = {},
): LineSeries[] {
  return [...curves.entries()].map(([site, points], i) => ({
    label: site,
    color: colorOf(i),
    points,
    ...style,
  }));
}

/** Render one chart kind from parsed series rows as an SVG document. */
export function renderPlot(rows: SeriesRow[], kind: PlotKind): string {
  switch (kind) {
    case "generation":
      return renderChart({
        title: "Available power by site",
        xLabel: "time (h)",
        yLabel: "available power (MW)",
        series: seriesPerSite(timeline(rows, (r) => r.available_mw)),
      });
    case "utilization": {
      const committed = rowsBySite(rows);
      const series: LineSeries[] = [];
      let i = 0;
      for (const [site, list] of committed) {
        const color = colorOf(i);
        series.push({
          label: `${site} committed`,
          color,
          points: list.map((r) => ({ x: r.t_s / HOUR_S, y: r.committed_cores })),
        });
        series.push({
          label: `${site} plan`,
          color,
          dashed: true,
          points: list.map((r) => ({ x: r.t_s / HOUR_S, y: r.plan_cores })),
        });
        i += 1;
      }
      return renderChart({
        title: "Core utilization by site",
        xLabel: "time (h)",
        yLabel: "cores",
        series,
      });
    }
    case "carbon":
      return renderChart({
        title: "Grid carbon intensity by site",
        xLabel: "time (h)",
        yLabel: "carbon intensity (gCO2e/kWh)",
        series: seriesPerSite(timeline(rows, (r) => r.carbon_gco2_per_kwh)),
      });
    case "watts-per-core":
      return renderChart({
        title: "Site power draw per committed core",
        xLabel: "committed cores",
        yLabel: "draw per core (W)",
        series: seriesPerSite(wattsPerCoreCurve(rows), { markers: true }),
      });
  }
}
