import { describe, expect, it } from 'vitest';
import { PlotError } from '../src/schema.js';
import { movingAverage, seriesMean, seriesStd } from '../src/stats.js';

describe('movingAverage', () => {
  it('window 1 is the identity', () => {
    const xs = [3.5, -1, 0, 7, 2.25];
    const out = movingAverage(xs, 1);
    expect(out).toEqual(xs);
    expect(out).not.toBe(xs);
  });

  it('a constant series smooths to itself for any window', () => {
    const xs = new Array(20).fill(4.75);
    for (const window of [1, 2, 3, 7, 20, 50]) {
      for (const v of movingAverage(xs, window)) {
        expect(v).toBeCloseTo(4.75, 12);
      }
    }
  });

  it('trails with a shorter window near the start', () => {
    expect(movingAverage([1, 2, 3, 4], 2)).toEqual([1, 1.5, 2.5, 3.5]);
    expect(movingAverage([2, 4, 6], 3)).toEqual([2, 3, 4]);
  });

  it('rejects non-integer or sub-1 windows', () => {
    expect(() => movingAverage([1], 0)).toThrow(PlotError);
    expect(() => movingAverage([1], 1.5)).toThrow(PlotError);
    expect(() => movingAverage([1], -3)).toThrow(PlotError);
  });
});

describe('series aggregates', () => {
  it('mean and population std match hand-computed values', () => {
    const series = [
      [1, 3],
      [3, 5],
    ];
    expect(seriesMean(series)).toEqual([2, 4]);
    expect(seriesStd(series)).toEqual([1, 1]);
  });

  it('a single series has zero std everywhere', () => {
    expect(seriesStd([[2, -7, 0.5]])).toEqual([0, 0, 0]);
  });

  it('rejects misaligned series lengths', () => {
    expect(() => seriesMean([[1, 2], [1]])).toThrow(PlotError);
    expect(() => seriesStd([])).toThrow(PlotError);
  });
});
