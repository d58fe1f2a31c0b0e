import { FigureKind, PlotError, ResultTable } from './schema.js';
import { movingAverage, seriesMean, seriesStd } from './stats.js';

const Y_COLUMN: Record<FigureKind, string> = {
  'learning-curve': 'realized_cost',
  coverage: 'coverage',
  regret: 'cum_regret',
};

export const Y_LABEL: Record<FigureKind, string> = {
  'learning-curve': 'realized episode cost',
  coverage: 'state-action pairs visited',
  regret: 'cumulative regret',
};

/** Everything a renderer draws; mean/std are the raw per-episode aggregates
 * across seeds, plotted* are the same after moving-average smoothing. */
export interface FigureData {
  kind: FigureKind;
  window: number;
  episodes: number[];
  perSeed: number[][];
  mean: number[];
  std: number[];
  plottedMean: number[];
  plottedStd: number[];
  /** learning-curve only: mean oracle cost, drawn as a reference line */
  reference?: number[];
}

/** Aggregate aligned per-seed tables into the arrays a figure plots. */
export function buildFigure(kind: FigureKind, tables: ResultTable[], window: number): FigureData {
  if (tables.length === 0) throw new PlotError('no input CSVs');
  const episodes = tables[0].columns['episode'];
  for (const t of tables) {
    const e = t.columns['episode'];
    if (e.length !== episodes.length || e.some((v, i) => v !== episodes[i])) {
      throw new PlotError(`${t.path}: episode column differs from ${tables[0].path}`);
    }
  }
  const perSeed = tables.map((t) => t.columns[Y_COLUMN[kind]]);
  const mean = seriesMean(perSeed);
  const std = seriesStd(perSeed);
  const data: FigureData = {
    kind,
    window,
    episodes,
    perSeed,
    mean,
    std,
    plottedMean: movingAverage(mean, window),
    plottedStd: movingAverage(std, window),
  };
  if (kind === 'learning-curve') {
    data.reference = seriesMean(tables.map((t) => t.columns['oracle_cost']));
  }
  return data;
}
