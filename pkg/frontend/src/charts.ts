// Line charts with error bars, rendered as SVG strings from the service's
// plot payloads (the same payload any other consumer would chart).

import type { PlotPayload, PlotSeries } from "./types.js";

export const SERIES_COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#17becf",
  "#8c564b",
];

export interface ChartGeometry {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_GEOMETRY: ChartGeometry = {
  width: 640,
  height: 360,
  margin: { top: 16, right: 16, bottom: 44, left: 56 },
};

export interface Scale {
  min: number;
  max: number;
  toPixel(value: number): number;
}

export function linearScale(min: number, max: number, pixelMin: number, pixelMax: number): Scale {
  const span = max - min || 1;
  return {
    min,
    max,
    toPixel: (value: number) => pixelMin + ((value - min) / span) * (pixelMax - pixelMin),
  };
}

function seriesExtent(payload: PlotPayload): { x: [number, number]; y: [number, number] } {
  const xs = payload.series.flatMap((s) => s.x);
  const ys: number[] = [payload.reference.value];
  for (const s of payload.series) {
    s.y.forEach((y, i) => {
      if (y === null) return;
      const err = s.y_err[i] ?? 0;
      ys.push(y - (err ?? 0), y + (err ?? 0));
    });
  }
  const pad = (values: number[]): [number, number] => {
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const slack = (hi - lo || 1) * 0.05;
    return [lo - slack, hi + slack];
  };
  return { x: pad(xs), y: pad(ys) };
}

function polyline(series: PlotSeries, xScale: Scale, yScale: Scale): string {
  const points = series.x
    .map((x, i) => ({ x, y: series.y[i] }))
    .filter((p): p is { x: number; y: number } => p.y !== null)
    .map((p) => `${xScale.toPixel(p.x).toFixed(1)},${yScale.toPixel(p.y).toFixed(1)}`);
  return points.join(" ");
}

function ticks(min: number, max: number, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i <= count; i++) out.push(min + ((max - min) * i) / count);
  return out;
}

export function renderChart(payload: PlotPayload, geometry: ChartGeometry = DEFAULT_GEOMETRY): string {
  const { width, height, margin } = geometry;
  const { x: xExtent, y: yExtent } = seriesExtent(payload);
  const xScale = linearScale(xExtent[0], xExtent[1], margin.left, width - margin.right);
  const yScale = linearScale(yExtent[0], yExtent[1], height - margin.bottom, margin.top);

  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" role="img" class="chart">`,
  );

  for (const tick of ticks(yExtent[0], yExtent[1])) {
    const y = yScale.toPixel(tick).toFixed(1);
    parts.push(`<line x1="${margin.left}" y1="${y}" x2="${width - margin.right}" y2="${y}" class="grid"/>`);
    parts.push(`<text x="${margin.left - 6}" y="${y}" class="tick y-tick">${tick.toFixed(3)}</text>`);
  }
  for (const tick of ticks(xExtent[0], xExtent[1])) {
    const x = xScale.toPixel(tick).toFixed(1);
    const y = height - margin.bottom;
    parts.push(`<text x="${x}" y="${y + 16}" class="tick x-tick">${Number(tick.toFixed(2))}</text>`);
  }
  parts.push(
    `<text x="${(margin.left + width - margin.right) / 2}" y="${height - 6}" class="axis-label">${payload.x_label}</text>`,
  );

  const refY = yScale.toPixel(payload.reference.value).toFixed(1);
  parts.push(
    `<line x1="${margin.left}" y1="${refY}" x2="${width - margin.right}" y2="${refY}" class="reference"/>`,
    `<text x="${width - margin.right}" y="${Number(refY) - 4}" class="reference-label">${payload.reference.label} = ${payload.reference.value}</text>`,
  );

  payload.series.forEach((series, index) => {
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    parts.push(`<polyline points="${polyline(series, xScale, yScale)}" fill="none" stroke="${color}" stroke-width="2"/>`);
    series.x.forEach((x, i) => {
      const y = series.y[i];
      if (y === null) return;
      const cx = xScale.toPixel(x).toFixed(1);
      const cy = yScale.toPixel(y).toFixed(1);
      const err = series.y_err[i];
      if (err !== null && err !== undefined && err > 0) {
        const top = yScale.toPixel(y + err).toFixed(1);
        const bottom = yScale.toPixel(y - err).toFixed(1);
        parts.push(`<line x1="${cx}" y1="${top}" x2="${cx}" y2="${bottom}" stroke="${color}" stroke-width="1"/>`);
      }
      parts.push(`<circle cx="${cx}" cy="${cy}" r="3" fill="${color}"/>`);
    });
  });

  const legendX = margin.left + 8;
  payload.series.forEach((series, index) => {
    const color = SERIES_COLORS[index % SERIES_COLORS.length];
    const y = margin.top + 14 * index + 4;
    parts.push(
      `<rect x="${legendX}" y="${y - 8}" width="10" height="10" fill="${color}"/>`,
      `<text x="${legendX + 14}" y="${y}" class="legend">${series.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("");
}
