import { FigureData, Y_LABEL } from './figure.js';
import { encodePng } from './png.js';
import { Raster, Rgba } from './raster.js';
import { Layout, LAYOUT, makeScales, Scales } from './scales.js';

const MEAN_COLOR = '#1f77b4';
const SEED_COLOR = '#999999';
const REF_COLOR = '#d62728';
const AXIS_COLOR = '#333333';

const MEAN_RGBA: Rgba = [31, 119, 180, 255];
const BAND_RGBA: Rgba = [31, 119, 180, 56];
const SEED_RGBA: Rgba = [153, 153, 153, 140];
const REF_RGBA: Rgba = [214, 39, 40, 255];
const AXIS_RGBA: Rgba = [51, 51, 51, 255];

export function formatTick(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(6)));
}

function yLabel(data: FigureData): string {
  const base = Y_LABEL[data.kind];
  return data.window > 1 ? `${base} (moving avg, window ${data.window})` : base;
}

function points(data: FigureData, series: number[], sc: Scales): Array<[number, number]> {
  return data.episodes.map((e, i) => [sc.x(e), sc.y(series[i])]);
}

function svgPath(pts: Array<[number, number]>): string {
  return pts
    .map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${x.toFixed(2)},${y.toFixed(2)}`)
    .join(' ');
}

/** Full figure as a standalone SVG document. */
export function renderSvg(data: FigureData, layout: Layout = LAYOUT): string {
  const sc = makeScales(data, layout);
  const { width, height, left, right, top, bottom } = layout;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  for (const t of sc.xTicks) {
    const x = sc.x(t).toFixed(2);
    parts.push(
      `<line x1="${x}" y1="${height - bottom}" x2="${x}" y2="${height - bottom + 4}" ` +
        `stroke="${AXIS_COLOR}"/>`,
    );
    parts.push(
      `<text x="${x}" y="${height - bottom + 17}" text-anchor="middle" ` +
        `fill="${AXIS_COLOR}">${formatTick(t)}</text>`,
    );
  }
  for (const t of sc.yTicks) {
    const y = sc.y(t).toFixed(2);
    parts.push(
      `<line x1="${left - 4}" y1="${y}" x2="${left}" y2="${y}" stroke="${AXIS_COLOR}"/>`,
    );
    parts.push(
      `<text x="${left - 7}" y="${(sc.y(t) + 4).toFixed(2)}" text-anchor="end" ` +
        `fill="${AXIS_COLOR}">${formatTick(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${left}" y1="${top}" x2="${left}" y2="${height - bottom}" ` +
      `stroke="${AXIS_COLOR}"/>`,
  );
  parts.push(
    `<line x1="${left}" y1="${height - bottom}" x2="${width - right}" ` +
      `y2="${height - bottom}" stroke="${AXIS_COLOR}"/>`,
  );
  parts.push(
    `<text x="${(left + width - right) / 2}" y="${height - 10}" text-anchor="middle" ` +
      `fill="${AXIS_COLOR}">episode</text>`,
  );
  parts.push(
    `<text x="16" y="${(top + height - bottom) / 2}" text-anchor="middle" ` +
      `fill="${AXIS_COLOR}" transform="rotate(-90 16 ${(top + height - bottom) / 2})">` +
      `${yLabel(data)}</text>`,
  );

  const upper = points(
    data,
    data.plottedMean.map((m, i) => m + data.plottedStd[i]),
    sc,
  );
  const lower = points(
    data,
    data.plottedMean.map((m, i) => m - data.plottedStd[i]),
    sc,
  );
  const bandPts = upper.concat(lower.slice().reverse());
  parts.push(
    `<polygon points="${bandPts.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(' ')}" ` +
      `fill="${MEAN_COLOR}" fill-opacity="0.22"/>`,
  );
  for (const s of data.perSeed) {
    parts.push(
      `<path d="${svgPath(points(data, s, sc))}" fill="none" stroke="${SEED_COLOR}" ` +
        `stroke-width="1" stroke-opacity="0.6"/>`,
    );
  }
  if (data.reference) {
    parts.push(
      `<path d="${svgPath(points(data, data.reference, sc))}" fill="none" ` +
        `stroke="${REF_COLOR}" stroke-width="1.5" stroke-dasharray="6 4"/>`,
    );
  }
  parts.push(
    `<path d="${svgPath(points(data, data.plottedMean, sc))}" fill="none" ` +
      `stroke="${MEAN_COLOR}" stroke-width="2"/>`,
  );

  const legend: Array<[string, string, string]> = [
    [MEAN_COLOR, `mean over ${data.perSeed.length} seeds`, ''],
    [SEED_COLOR, 'individual seeds', ''],
  ];
  if (data.reference) legend.push([REF_COLOR, 'oracle mean', '6 4']);
  const lx = width - right - 170;
  let ly = top + 14;
  for (const [color, label, dash] of legend) {
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 24}" y2="${ly - 4}" stroke="${color}" ` +
        `stroke-width="2"${dash ? ` stroke-dasharray="${dash}"` : ''}/>`,
    );
    parts.push(`<text x="${lx + 30}" y="${ly}" fill="${AXIS_COLOR}">${label}</text>`);
    ly += 16;
  }
  parts.push('</svg>');
  return parts.join('\n');
}

/**
 * Same figure rasterized to a PNG buffer. Tick positions are drawn as
 * marks only; the SVG twin carries the text labels.
 */
export function renderPng(data: FigureData, layout: Layout = LAYOUT): Uint8Array {
  const sc = makeScales(data, layout);
  const { width, height, left, right, top, bottom } = layout;
  const img = new Raster(width, height);

  const xs = data.episodes.map((e) => sc.x(e));
  const upper = data.plottedMean.map((m, i) => sc.y(m + data.plottedStd[i]));
  const lower = data.plottedMean.map((m, i) => sc.y(m - data.plottedStd[i]));
  img.band(xs, upper, lower, BAND_RGBA);

  for (const s of data.perSeed) {
    img.polyline(points(data, s, sc), SEED_RGBA, 1);
  }
  if (data.reference) {
    const pts = points(data, data.reference, sc);
    for (let i = 1; i < pts.length; i++) {
      const [xa, ya] = pts[i - 1];
      const [xb, yb] = pts[i];
      const len = Math.hypot(xb - xa, yb - ya);
      const steps = Math.max(1, Math.round(len));
      for (let s = 0; s < steps; s++) {
        if (Math.floor(s / 5) % 2 === 1) continue;
        const t0 = s / steps;
        const t1 = (s + 1) / steps;
        img.line(
          xa + (xb - xa) * t0,
          ya + (yb - ya) * t0,
          xa + (xb - xa) * t1,
          ya + (yb - ya) * t1,
          REF_RGBA,
          2,
        );
      }
    }
  }
  img.polyline(points(data, data.plottedMean, sc), MEAN_RGBA, 2);

  img.fillRect(left, top, 1, height - top - bottom, AXIS_RGBA);
  img.fillRect(left, height - bottom, width - left - right, 1, AXIS_RGBA);
  for (const t of sc.xTicks) {
    img.fillRect(sc.x(t), height - bottom, 1, 4, AXIS_RGBA);
  }
  for (const t of sc.yTicks) {
    img.fillRect(left - 4, sc.y(t), 4, 1, AXIS_RGBA);
  }
  return encodePng(width, height, img.data);
}
