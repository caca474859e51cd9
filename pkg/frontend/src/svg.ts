/**
 * Deterministic SVG line-chart scaffolding.
 *
 * Everything here is a pure function of its inputs: fixed canvas size, fixed
 * palette, fixed fonts, no timestamps, no randomness. Identical chart specs
 * therefore serialize to byte-identical SVG, which is what makes rendered
 * artifacts comparable by checksum.
 */
import { scaleLinear } from "d3";

export interface Point {
  x: number;
  y: number;
}

export interface LineSeries {
  label: string;
  color: string;
  points: Point[];
  /** Render with a dash pattern (used for capacity/reference lines). */
  dashed?: boolean;
  /** Render a dot at every point (used for sparse curves). */
  markers?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: LineSeries[];
}

export const WIDTH = 860;
export const HEIGHT = 420;
const MARGIN = { top: 48, right: 176, bottom: 52, left: 68 } as const;

/** Fixed series palette; assignment order is the caller's business. */
export const PALETTE = [
  "#2563eb",
  "#f59e0b",
  "#10b981",
  "#8b5cf6",
  "#ef4444",
  "#0891b2",
  "#65a30d",
  "#db2777",
] as const;

const FONT = 'font-family="Helvetica, Arial, sans-serif"';

/** Compact, stable decimal formatting (≤ 6 significant digits). */
export function fmt(n: number): string {
  if (Object.is(n, -0)) n = 0;
  if (Number.isInteger(n) && Math.abs(n) < 1e15) return String(n);
  const s = n.toPrecision(6);
  if (s.includes("e")) return s;
  if (s.includes(".")) return s.replace(/0+$/, "").replace(/\.$/, "");
  return s;
}

export function escapeXml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

/** Serialize a chart spec to a standalone SVG document. */
export function renderChart(spec: ChartSpec): string {
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const drawn = spec.series.filter((s) => s.points.length > 0);

  const xs = drawn.flatMap((s) => s.points.map((p) => p.x));
  const ys = drawn.flatMap((s) => s.points.map((p) => p.y));
  const [xLo, xHi] = extent(xs);
  const [yLoRaw, yHi] = extent(ys);
  const yLo = Math.min(0, yLoRaw);

  const x = scaleLinear()
    .domain([xLo, xHi])
    .nice(6)
    .range([MARGIN.left, MARGIN.left + innerW]);
  const y = scaleLinear()
    .domain([yLo, yHi])
    .nice(6)
    .range([MARGIN.top + innerH, MARGIN.top]);

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  out.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  out.push(
    `<text x="${fmt(WIDTH / 2)}" y="26" text-anchor="middle" ${FONT} font-size="16" fill="#111827">${escapeXml(spec.title)}</text>`,
  );

  // Gridlines and tick labels.
  for (const t of y.ticks(6)) {
    const py = fmt(y(t));
    out.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + innerW}" y2="${py}" stroke="#e5e7eb" stroke-width="1"/>`,
    );
    out.push(
      `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" ${FONT} font-size="11" fill="#374151">${fmt(t)}</text>`,
    );
  }
  for (const t of x.ticks(6)) {
    const px = fmt(x(t));
    out.push(
      `<line x1="${px}" y1="${MARGIN.top + innerH}" x2="${px}" y2="${MARGIN.top + innerH + 5}" stroke="#6b7280" stroke-width="1"/>`,
    );
    out.push(
      `<text x="${px}" y="${MARGIN.top + innerH + 18}" text-anchor="middle" ${FONT} font-size="11" fill="#374151">${fmt(t)}</text>`,
    );
  }

  // Axes.
  out.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + innerH}" stroke="#6b7280" stroke-width="1"/>`,
  );
  out.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + innerH}" x2="${MARGIN.left + innerW}" y2="${MARGIN.top + innerH}" stroke="#6b7280" stroke-width="1"/>`,
  );
  out.push(
    `<text x="${fmt(MARGIN.left + innerW / 2)}" y="${HEIGHT - 12}" text-anchor="middle" ${FONT} font-size="12" fill="#111827">${escapeXml(spec.xLabel)}</text>`,
  );
  out.push(
    `<text x="18" y="${fmt(MARGIN.top + innerH / 2)}" text-anchor="middle" ${FONT} font-size="12" fill="#111827" transform="rotate(-90 18 ${fmt(MARGIN.top + innerH / 2)})">${escapeXml(spec.yLabel)}</text>`,
  );

  // Series paths.
  for (const s of drawn) {
    const coords = s.points.map((p) => `${fmt(x(p.x))},${fmt(y(p.y))}`);
    if (coords.length > 1) {
      const d = `M ${coords[0]} L ${coords.slice(1).join(" ")}`;
      const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
      out.push(
        `<path d="${d}" fill="none" stroke="${s.color}" stroke-width="2"${dash}/>`,
      );
    }
    if (s.markers || coords.length === 1) {
      for (const c of coords) {
        const [cx, cy] = c.split(",");
        out.push(`<circle cx="${cx}" cy="${cy}" r="3.5" fill="${s.color}"/>`);
      }
    }
  }

  // Legend, one swatch per series in declaration order.
  const lx = MARGIN.left + innerW + 16;
  spec.series.forEach((s, i) => {
    const ly = MARGIN.top + 6 + i * 20;
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    out.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${s.color}" stroke-width="2"${dash}/>`,
    );
    out.push(
      `<text x="${lx + 28}" y="${ly}" dominant-baseline="middle" ${FONT} font-size="11" fill="#111827">${escapeXml(s.label)}</text>`,
    );
  });

  out.push("</svg>");
  return out.join("\n") + "\n";
}
