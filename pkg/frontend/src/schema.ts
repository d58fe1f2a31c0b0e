import Papa from 'papaparse';

export type FigureKind = 'learning-curve' | 'coverage' | 'regret';

export const FIGURE_KINDS: FigureKind[] = ['learning-curve', 'coverage', 'regret'];

/** Columns each figure kind reads from a results CSV. */
export const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  'learning-curve': ['episode', 'realized_cost', 'oracle_cost'],
  coverage: ['episode', 'coverage'],
  regret: ['episode', 'cum_regret'],
};

/** One parsed per-seed results table, keyed by column name. */
export interface ResultTable {
  path: string;
  columns: Record<string, number[]>;
  rows: number;
}

export class PlotError extends Error {}

/**
 * Parse one results CSV and check it carries every column `kind` needs.
 * Throws PlotError naming the file and the first missing column.
 */
export function parseResults(text: string, path: string, kind: FigureKind): ResultTable {
  const parsed = Papa.parse<Record<string, unknown>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new PlotError(`${path}: ${e.message} (row ${e.row ?? '?'})`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new PlotError(`${path}: no data rows`);
  }
  const header = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS[kind]) {
    if (!header.includes(column)) {
      throw new PlotError(`${path}: missing column '${column}'`);
    }
  }
  const columns: Record<string, number[]> = {};
  for (const column of REQUIRED_COLUMNS[kind]) {
    columns[column] = rows.map((row, i) => {
      const v = row[column];
      if (typeof v !== 'number' || !Number.isFinite(v)) {
        throw new PlotError(`${path}: column '${column}' row ${i + 1} is not a finite number`);
      }
      return v;
    });
  }
  return { path, columns, rows: rows.length };
}
