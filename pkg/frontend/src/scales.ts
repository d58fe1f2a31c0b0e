import { FigureData } from './figure.js';

export interface Layout {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const LAYOUT: Layout = {
  width: 800,
  height: 500,
  left: 64,
  right: 20,
  top: 20,
  bottom: 48,
};

export interface Scales {
  x: (v: number) => number;
  y: (v: number) => number;
  xTicks: number[];
  yTicks: number[];
  xDomain: [number, number];
  yDomain: [number, number];
}

/** Round tick steps to 1/2/5 times a power of ten, about `count` of them. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (lo === hi) return [lo];
  const step0 = (hi - lo) / Math.max(count, 1);
  const mag = 10 ** Math.floor(Math.log10(step0));
  const err = step0 / mag;
  const step = mag * (err >= Math.sqrt(50) ? 10 : err >= Math.sqrt(10) ? 5 : err >= Math.SQRT2 ? 2 : 1);
  const ticks: number[] = [];
  // the 1e-9 slack keeps boundary ticks that float division would drop;
  // + 0 normalizes a -0 from Math.ceil
  for (let k = Math.ceil(lo / step - 1e-9) + 0; k * step <= hi + step * 1e-9; k++) {
    ticks.push(k * step);
  }
  return ticks;
}

/** Data-to-pixel scales covering every drawn series, with 5% y padding. */
export function makeScales(data: FigureData, layout: Layout = LAYOUT): Scales {
  const xs = data.episodes;
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  if (xLo === xHi) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  const drawn: number[] = [];
  for (let i = 0; i < xs.length; i++) {
    drawn.push(data.plottedMean[i] - data.plottedStd[i]);
    drawn.push(data.plottedMean[i] + data.plottedStd[i]);
    for (const s of data.perSeed) drawn.push(s[i]);
    if (data.reference) drawn.push(data.reference[i]);
  }
  let yLo = Math.min(...drawn);
  let yHi = Math.max(...drawn);
  if (yLo === yHi) {
    yLo -= 0.5;
    yHi += 0.5;
  }
  const pad = 0.05 * (yHi - yLo);
  yLo -= pad;
  yHi += pad;
  const x = (v: number) =>
    layout.left + ((v - xLo) / (xHi - xLo)) * (layout.width - layout.left - layout.right);
  const y = (v: number) =>
    layout.height - layout.bottom -
    ((v - yLo) / (yHi - yLo)) * (layout.height - layout.top - layout.bottom);
  return {
    x,
    y,
    xTicks: niceTicks(xLo, xHi),
    yTicks: niceTicks(yLo, yHi),
    xDomain: [xLo, xHi],
    yDomain: [yLo, yHi],
  };
}
