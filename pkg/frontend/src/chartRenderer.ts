// Chart rendering from declarative specs + result rows to inline SVG/HTML
// strings. No chart library: slices, polylines, and rects are built by hand,
// which keeps the bundle dependency-free and the output assertable in tests.

import type { ChartSpec, TablePreview } from './types.js';

const WIDTH = 420;
const HEIGHT = 260;
const PAD = 36;

const PALETTE = [
  '#2563eb', '#059669', '#d97706', '#dc2626',
  '#7c3aed', '#0d9488', '#f59e0b', '#6366f1',
];

function color(i: number): string {
  return PALETTE[i % PALETTE.length] ?? '#2563eb';
}

function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function toNumber(value: unknown): number {
  const n = typeof value === 'number' ? value : Number(value);
  return Number.isFinite(n) ? n : 0;
}

function columnIndex(preview: TablePreview, name: string | undefined): number {
  if (!name) return -1;
  return preview.columns.indexOf(name);
}

/** Render a chart spec over result rows; unknown/invalid specs degrade to a table. */
export function renderChart(spec: ChartSpec | null, preview: TablePreview | null): string {
  if (!preview) {
    return '<div class="chart-empty">no result rows</div>';
  }
  if (!spec) {
    return renderTable(preview);
  }
  switch (spec.chart_type) {
    case 'table':
      return renderTable(preview);
    case 'pie': {
      const label = columnIndex(preview, spec.bindings['label']);
      const value = columnIndex(preview, spec.bindings['value']);
      if (label < 0 || value < 0) return fallback(preview, 'pie bindings missing from result');
      return renderPie(preview, label, value);
    }
    case 'line':
    case 'bar': {
      const x = columnIndex(preview, spec.bindings['x']);
      const y = columnIndex(preview, spec.bindings['y']);
      if (x < 0 || y < 0) return fallback(preview, `${spec.chart_type} bindings missing from result`);
      const pivot = columnIndex(preview, spec.bindings['pivot_column']);
      return spec.chart_type === 'line'
        ? renderLine(preview, x, y, pivot)
        : renderBar(preview, x, y, pivot);
    }
    default:
      return fallback(preview, `unknown chart type '${escapeHtml(spec.chart_type)}'`);
  }
}

function fallback(preview: TablePreview, reason: string): string {
  return `<div class="chart-fallback"><span class="warning-badge">${escapeHtml(reason)}; showing table</span>${renderTable(preview)}</div>`;
}

export function renderTable(preview: TablePreview): string {
  const head = preview.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join('');
  const body = preview.rows
    .map((row) => `<tr>${row.map((v) => `<td>${v === null ? '∅' : escapeHtml(v)}</td>`).join('')}</tr>`)
    .join('');
  return `<table class="result-grid"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

function renderPie(preview: TablePreview, labelIdx: number, valueIdx: number): string {
  const totals = new Map<string, number>();
  for (const row of preview.rows) {
    const label = String(row[labelIdx]);
    totals.set(label, (totals.get(label) ?? 0) + toNumber(row[valueIdx]));
  }
  const entries = [...totals.entries()];
  const total = entries.reduce((acc, [, v]) => acc + Math.max(v, 0), 0) || 1;
  const cx = HEIGHT / 2;
  const cy = HEIGHT / 2;
  const r = HEIGHT / 2 - PAD / 2;

  let angle = -Math.PI / 2;
  const slices: string[] = [];
  entries.forEach(([label, value], i) => {
    const share = Math.max(value, 0) / total;
    const end = angle + share * 2 * Math.PI;
    const large = share > 0.5 ? 1 : 0;
    const x1 = cx + r * Math.cos(angle);
    const y1 = cy + r * Math.sin(angle);
    const x2 = cx + r * Math.cos(end);
    const y2 = cy + r * Math.sin(end);
    // A full-circle slice needs two arcs; approximate with 359.99 degrees.
    const d =
      share >= 0.9999
        ? `M ${cx} ${cy - r} A ${r} ${r} 0 1 1 ${cx - 0.01} ${cy - r} Z`
        : `M ${cx} ${cy} L ${x1} ${y1} A ${r} ${r} 0 ${large} 1 ${x2} ${y2} Z`;
    slices.push(
      `<path class="slice" d="${d}" fill="${color(i)}"><title>${escapeHtml(label)}: ${value}</title></path>`,
    );
    angle = end;
  });
  const legend = entries
    .map(
      ([label], i) =>
        `<li><span class="swatch" style="background:${color(i)}"></span>${escapeHtml(label)}</li>`,
    )
    .join('');
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="chart chart-pie">${slices.join('')}</svg>` +
    `<ul class="legend">${legend}</ul>`
  );
}

interface Series {
  name: string;
  points: { x: string; y: number }[];
}

function splitSeries(preview: TablePreview, xIdx: number, yIdx: number, pivotIdx: number): {
  series: Series[];
  categories: string[];
} {
  const categories: string[] = [];
  const seen = new Set<string>();
  for (const row of preview.rows) {
    const x = String(row[xIdx]);
    if (!seen.has(x)) {
      seen.add(x);
      categories.push(x);
    }
  }
  const bySeries = new Map<string, Series>();
  for (const row of preview.rows) {
    const name = pivotIdx >= 0 ? String(row[pivotIdx]) : 'value';
    let series = bySeries.get(name);
    if (!series) {
      series = { name, points: [] };
      bySeries.set(name, series);
    }
    series.points.push({ x: String(row[xIdx]), y: toNumber(row[yIdx]) });
  }
  return { series: [...bySeries.values()], categories };
}

function yScale(series: Series[]): (y: number) => number {
  let min = 0;
  let max = 1;
  for (const s of series) {
    for (const p of s.points) {
      min = Math.min(min, p.y);
      max = Math.max(max, p.y);
    }
  }
  const span = max - min || 1;
  return (y) => HEIGHT - PAD - ((y - min) / span) * (HEIGHT - 2 * PAD);
}

function axes(): string {
  return (
    `<line class="axis" x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" y2="${HEIGHT - PAD}" stroke="#888"/>` +
    `<line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${HEIGHT - PAD}" stroke="#888"/>`
  );
}

function seriesLegend(series: Series[]): string {
  if (series.length <= 1) return '';
  const items = series
    .map(
      (s, i) =>
        `<li><span class="swatch" style="background:${color(i)}"></span>${escapeHtml(s.name)}</li>`,
    )
    .join('');
  return `<ul class="legend">${items}</ul>`;
}

function renderLine(preview: TablePreview, xIdx: number, yIdx: number, pivotIdx: number): string {
  const { series, categories } = splitSeries(preview, xIdx, yIdx, pivotIdx);
  const scaleY = yScale(series);
  const step = (WIDTH - 2 * PAD) / Math.max(categories.length - 1, 1);
  const xPos = new Map(categories.map((c, i) => [c, PAD + i * step]));
  const lines = series
    .map((s, i) => {
      const points = s.points
        .map((p) => `${(xPos.get(p.x) ?? PAD).toFixed(1)},${scaleY(p.y).toFixed(1)}`)
        .join(' ');
      return `<polyline class="series" fill="none" stroke="${color(i)}" stroke-width="2" points="${points}"><title>${escapeHtml(s.name)}</title></polyline>`;
    })
    .join('');
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="chart chart-line">${axes()}${lines}</svg>` +
    seriesLegend(series)
  );
}

function renderBar(preview: TablePreview, xIdx: number, yIdx: number, pivotIdx: number): string {
  const { series, categories } = splitSeries(preview, xIdx, yIdx, pivotIdx);
  const scaleY = yScale(series);
  const baseline = HEIGHT - PAD;
  const slot = (WIDTH - 2 * PAD) / Math.max(categories.length, 1);
  const barWidth = Math.max(2, (slot * 0.7) / Math.max(series.length, 1));
  const groups = series
    .map((s, si) => {
      const bars = s.points
        .map((p) => {
          const ci = categories.indexOf(p.x);
          const x = PAD + ci * slot + slot * 0.15 + si * barWidth;
          const top = scaleY(p.y);
          const height = Math.max(baseline - top, 0);
          return `<rect class="bar" x="${x.toFixed(1)}" y="${top.toFixed(1)}" width="${barWidth.toFixed(1)}" height="${height.toFixed(1)}" fill="${color(si)}"><title>${escapeHtml(p.x)} ${escapeHtml(s.name)}: ${p.y}</title></rect>`;
        })
        .join('');
      return `<g class="series" data-series="${escapeHtml(s.name)}">${bars}</g>`;
    })
    .join('');
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="chart chart-bar">${axes()}${groups}</svg>` +
    seriesLegend(series)
  );
}
