#!/usr/bin/env node
import { readFileSync, writeFileSync } from 'node:fs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { buildFigure } from './figure.js';
import { renderPng, renderSvg } from './render.js';
import { FIGURE_KINDS, FigureKind, parseResults, PlotError } from './schema.js';

function svgSibling(pngPath: string): string {
  return pngPath.endsWith('.png') ? pngPath.slice(0, -4) + '.svg' : pngPath + '.svg';
}

export function main(argv: string[]): number {
  const args = yargs(argv)
    .scriptName('knr-plot')
    .usage('$0 --kind KIND [options] <results CSVs...>')
    .option('kind', {
      type: 'string',
      choices: FIGURE_KINDS,
      demandOption: true,
      describe: 'which figure to draw',
    })
    .option('window', {
      type: 'number',
      default: 1,
      describe: 'trailing moving-average window in episodes',
    })
    .option('out', {
      type: 'string',
      describe: 'output PNG path (an SVG twin is written alongside)',
    })
    .demandCommand(1, 'pass at least one results CSV')
    .strict()
    .parseSync();

  const kind = args.kind as FigureKind;
  const outPng = args.out ?? `${kind}.png`;
  try {
    const tables = (args._ as string[]).map((p) =>
      parseResults(readFileSync(String(p), 'utf8'), String(p), kind),
    );
    const data = buildFigure(kind, tables, args.window);
    writeFileSync(outPng, renderPng(data));
    writeFileSync(svgSibling(outPng), renderSvg(data));
    console.log(
      `wrote ${outPng} and ${svgSibling(outPng)} ` +
        `(${kind}, ${tables.length} seeds, ${data.episodes.length} episodes)`,
    );
    return 0;
  } catch (err) {
    if (err instanceof PlotError || (err as NodeJS.ErrnoException)?.code === 'ENOENT') {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

process.exit(main(hideBin(process.argv)));
