import { PlotError } from './schema.js';

/** Per-index mean across seed series; all series must share one length. */
export function seriesMean(series: number[][]): number[] {
  checkAligned(series);
  const n = series[0].length;
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) {
    let sum = 0;
    for (const s of series) sum += s[i];
    out[i] = sum / series.length;
  }
  return out;
}

/** Per-index population standard deviation (a single seed gives zeros). */
export function seriesStd(series: number[][]): number[] {
  checkAligned(series);
  const mean = seriesMean(series);
  const n = series[0].length;
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) {
    let sq = 0;
    for (const s of series) sq += (s[i] - mean[i]) ** 2;
    out[i] = Math.sqrt(sq / series.length);
  }
  return out;
}

/**
 * Trailing moving average: out[i] averages the last `window` values ending
 * at i (fewer near the start). window = 1 returns a copy of the input.
 * Sums are taken afresh per index: a running sum would smear rounding
 * error down the series and window 1 would stop being exact.
 */
export function movingAverage(xs: number[], window: number): number[] {
  if (!Number.isInteger(window) || window < 1) {
    throw new PlotError(`window must be an integer >= 1, got ${window}`);
  }
  if (window === 1) return xs.slice();
  const out = new Array<number>(xs.length);
  for (let i = 0; i < xs.length; i++) {
    const lo = Math.max(0, i - window + 1);
    let sum = 0;
    for (let j = lo; j <= i; j++) sum += xs[j];
    out[i] = sum / (i - lo + 1);
  }
  return out;
}

function checkAligned(series: number[][]): void {
  if (series.length === 0) throw new PlotError('no series to aggregate');
  const n = series[0].length;
  for (const s of series) {
    if (s.length !== n) {
      throw new PlotError(`seed series lengths differ: ${s.length} vs ${n}`);
    }
  }
}
