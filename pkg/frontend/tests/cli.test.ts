import { spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

const CLI = fileURLToPath(new URL('../dist/cli.js', import.meta.url));
const FIXTURES = fileURLToPath(new URL('./fixtures', import.meta.url));

function runCli(args: string[], cwd: string) {
  return spawnSync(process.execPath, [CLI, ...args], { cwd, encoding: 'utf8' });
}

function sweepCsvs(dir: string): string[] {
  return [0, 1, 2, 3].map((seed) => join(FIXTURES, dir, `seed_${seed}.csv`));
}

describe('knr-plot CLI (built bundle)', () => {
  it('writes a PNG and an SVG twin for a learning curve', () => {
    const out = mkdtempSync(join(tmpdir(), 'knr-plot-'));
    const res = runCli(
      ['--kind', 'learning-curve', '--window', '3', '--out', 'fig.png', ...sweepCsvs('sweep')],
      out,
    );
    expect(res.stderr).toBe('');
    expect(res.status).toBe(0);
    expect(res.stdout).toContain('wrote fig.png and fig.svg');
    const png = readFileSync(join(out, 'fig.png'));
    expect([...png.subarray(0, 4)]).toEqual([137, 80, 78, 71]);
    expect(readFileSync(join(out, 'fig.svg'), 'utf8')).toContain('</svg>');
  });

  it('defaults the output name to the figure kind', () => {
    const out = mkdtempSync(join(tmpdir(), 'knr-plot-'));
    const res = runCli(['--kind', 'coverage', ...sweepCsvs('maze_sweep')], out);
    expect(res.status).toBe(0);
    expect(res.stdout).toContain('wrote coverage.png and coverage.svg');
    expect(res.stdout).toContain('4 seeds, 8 episodes');
  });

  it('exits nonzero naming the missing column on a schema mismatch', () => {
    const out = mkdtempSync(join(tmpdir(), 'knr-plot-'));
    const bad = join(out, 'bad.csv');
    writeFileSync(bad, 'episode,realized_cost\n0,1.0\n');
    const res = runCli(['--kind', 'coverage', bad], out);
    expect(res.status).toBe(1);
    expect(res.stderr).toContain("bad.csv: missing column 'coverage'");
  });

  it('exits nonzero on a missing input file', () => {
    const out = mkdtempSync(join(tmpdir(), 'knr-plot-'));
    const res = runCli(['--kind', 'regret', join(out, 'nope.csv')], out);
    expect(res.status).toBe(1);
    expect(res.stderr).toContain('nope.csv');
  });

  it('rejects an unknown kind', () => {
    const out = mkdtempSync(join(tmpdir(), 'knr-plot-'));
    const res = runCli(['--kind', 'sparkline', ...sweepCsvs('sweep')], out);
    expect(res.status).not.toBe(0);
  });
});
