import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';
import { buildFigure } from '../src/figure.js';
import { FigureKind, parseResults, PlotError, ResultTable } from '../src/schema.js';

function loadSweep(dir: string, kind: FigureKind): ResultTable[] {
  return [0, 1, 2, 3].map((seed) => {
    const rel = `./fixtures/${dir}/seed_${seed}.csv`;
    const url = new URL(rel, import.meta.url);
    return parseResults(readFileSync(url, 'utf8'), rel, kind);
  });
}

/* Independent aggregates: naive accumulation in table order, straight from
 * the definitions, no shared code with src/stats.ts. */
function handMean(tables: ResultTable[], column: string, i: number): number {
  let sum = 0;
  for (const t of tables) sum += t.columns[column][i];
  return sum / tables.length;
}

function handStd(tables: ResultTable[], column: string, i: number): number {
  const m = handMean(tables, column, i);
  let sq = 0;
  for (const t of tables) sq += (t.columns[column][i] - m) ** 2;
  return Math.sqrt(sq / tables.length);
}

describe('learning-curve aggregation over the 4-seed sweep', () => {
  const tables = loadSweep('sweep', 'learning-curve');
  const data = buildFigure('learning-curve', tables, 1);

  it('plots one point per episode for every seed', () => {
    expect(data.episodes).toEqual([...Array(12).keys()]);
    expect(data.perSeed).toHaveLength(4);
  });

  it('plotted mean equals the hand-computed mean exactly', () => {
    const expected = data.episodes.map((_, i) => handMean(tables, 'realized_cost', i));
    expect(data.mean).toEqual(expected);
    expect(data.plottedMean).toEqual(expected);
  });

  it('plotted std equals the hand-computed population std exactly', () => {
    const expected = data.episodes.map((_, i) => handStd(tables, 'realized_cost', i));
    expect(data.std).toEqual(expected);
    expect(data.plottedStd).toEqual(expected);
  });

  it('reference line is the exact across-seed oracle mean', () => {
    const expected = data.episodes.map((_, i) => handMean(tables, 'oracle_cost', i));
    expect(data.reference).toEqual(expected);
  });
});

describe('coverage aggregation over the 4-seed maze sweep', () => {
  const tables = loadSweep('maze_sweep', 'coverage');
  const data = buildFigure('coverage', tables, 1);

  it('plotted mean/std equal the hand-computed aggregates exactly', () => {
    const mean = data.episodes.map((_, i) => handMean(tables, 'coverage', i));
    const std = data.episodes.map((_, i) => handStd(tables, 'coverage', i));
    expect(data.plottedMean).toEqual(mean);
    expect(data.plottedStd).toEqual(std);
  });

  it('coverage counts grow monotonically in every seed', () => {
    for (const s of data.perSeed) {
      for (let i = 1; i < s.length; i++) expect(s[i]).toBeGreaterThanOrEqual(s[i - 1]);
    }
  });

  it('has no oracle reference line', () => {
    expect(data.reference).toBeUndefined();
  });
});

describe('smoothing and shape guards', () => {
  const tables = loadSweep('sweep', 'learning-curve');

  it('window > 1 matches a naive trailing-slice average exactly', () => {
    const data = buildFigure('learning-curve', tables, 5);
    for (let i = 0; i < data.episodes.length; i++) {
      const lo = Math.max(0, i - 4);
      const slice = data.mean.slice(lo, i + 1);
      const naive = slice.reduce((a, b) => a + b, 0) / slice.length;
      expect(data.plottedMean[i]).toBe(naive);
    }
  });

  it('a single CSV yields a zero-width band', () => {
    const data = buildFigure('learning-curve', [tables[0]], 1);
    expect(data.std).toEqual(new Array(tables[0].rows).fill(0));
  });

  it('regret kind reads the cumulative-regret column', () => {
    const rt = loadSweep('sweep', 'regret');
    const data = buildFigure('regret', rt, 1);
    expect(data.perSeed[0]).toEqual(rt[0].columns['cum_regret']);
  });

  it('rejects sweeps whose episode columns differ, naming the file', () => {
    const a = parseResults('episode,coverage\n0,1\n1,2', 'a.csv', 'coverage');
    const b = parseResults('episode,coverage\n0,1\n2,2', 'b.csv', 'coverage');
    expect(() => buildFigure('coverage', [a, b], 1)).toThrow(
      'b.csv: episode column differs from a.csv',
    );
  });

  it('identical inputs aggregate to identical plotted arrays', () => {
    const once = buildFigure('learning-curve', tables, 3);
    const twice = buildFigure('learning-curve', loadSweep('sweep', 'learning-curve'), 3);
    expect(twice.plottedMean).toEqual(once.plottedMean);
    expect(twice.plottedStd).toEqual(once.plottedStd);
  });
});
