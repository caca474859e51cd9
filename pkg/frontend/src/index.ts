/** Public API: parse simulator series files and render deterministic SVG charts. */
export {
  EmptySeries,
  SchemaMismatch,
  SERIES_HEADER,
  parseSeries,
  siteIds,
  type SeriesRow,
} from "./series.js";
export { PLOT_KINDS, renderPlot, wattsPerCoreCurve, type PlotKind } from "./plots.js";
export { PALETTE, WIDTH, HEIGHT, fmt, renderChart, type ChartSpec, type LineSeries, type Point } from "./svg.js";
export { main } from "./cli.js";
