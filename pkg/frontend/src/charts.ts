/** Minimal SVG line charts: a polyline per series, no dependencies.
 *
 *  Every plotted point is one history entry; gaps in time (connection
 *  loss, lossy radio) stay visible because x follows simulated time, not
 *  sample index.
 */

import type { SeriesPoint } from "./state.js";

export interface ChartSpec {
  width: number;
  height: number;
  padding: number;
  yMin?: number;
  yMax?: number;
}

export const DEFAULT_SPEC: ChartSpec = { width: 320, height: 96, padding: 8 };

export interface Scaled {
  x: number;
  y: number;
}

export function scalePoints(points: SeriesPoint[], spec: ChartSpec = DEFAULT_SPEC): Scaled[] {
  if (points.length === 0) {
    return [];
  }
  const xs = points.map((p) => p.t_us);
  const ys = points.map((p) => p.value);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = spec.yMin ?? Math.min(...ys);
  const yMax = spec.yMax ?? Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  const innerW = spec.width - 2 * spec.padding;
  const innerH = spec.height - 2 * spec.padding;
  return points.map((p) => ({
    x: spec.padding + ((p.t_us - xMin) / xSpan) * innerW,
    y: spec.padding + innerH - ((p.value - yMin) / ySpan) * innerH,
  }));
}

export function polylineAttr(points: SeriesPoint[], spec: ChartSpec = DEFAULT_SPEC): string {
  return scalePoints(points, spec)
    .map((p) => `${round1(p.x)},${round1(p.y)}`)
    .join(" ");
}

export function chartSvg(
  label: string,
  points: SeriesPoint[],
  color: string,
  spec: ChartSpec = DEFAULT_SPEC,
): string {
  const attr = polylineAttr(points, spec);
  const last = points.length > 0 ? points[points.length - 1]!.value : null;
  const lastText = last === null ? "--" : String(last);
  return (
    `<svg viewBox="0 0 ${spec.width} ${spec.height}" class="chart" role="img" aria-label="${label}">` +
    `<polyline fill="none" stroke="${color}" stroke-width="1.5" points="${attr}"/>` +
    `<text x="${spec.padding}" y="${spec.padding + 4}" class="chart-label">${label}: ${lastText}</text>` +
    `</svg>`
  );
}

function round1(value: number): number {
  return Math.round(value * 10) / 10;
}
