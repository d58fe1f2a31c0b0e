"""Command line: run experiments, verify the supporting lemmas, estimate
oracle costs, and sweep seeds.

BLAS thread pools are pinned to a single thread before numpy loads: a
multi-threaded BLAS can reorder floating-point reductions between runs,
and byte-identical reruns matter more here than dense-kernel speed at
these problem sizes. --threads caps the tool's own parallelism (all
planner and analysis work is batched into single-threaded vector ops
today) and never changes results.
"""

from __future__ import annotations

import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
    os.environ[_var] = "1"

import argparse          # noqa: E402  (the pin above must precede numpy)
import math              # noqa: E402
import sys               # noqa: E402
import time              # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np       # noqa: E402

from .analysis import (  # noqa: E402
    LemmaCheckResult,
    RunTrace,
    check_chi2,
    check_info_gain_bound,
    check_mean_difference,
    check_potential_sum,
    check_self_normalized,
    check_simulation_lemma,
)
from .config import (    # noqa: E402
    ConfigError,
    build_experiment,
    load_config,
    load_preset,
    preset_names,
    sweep_seeds,
)
from .driver import (    # noqa: E402
    ORACLE_BASE,
    estimate_oracle_cost,
    run_experiment,
    write_report_csv,
    write_summary_json,
)
from .envs import MazeEnv, cost_batch_fn, make_lqr  # noqa: E402
from .linalg import RngStream                       # noqa: E402

VERIFY_SEED = 7    # every verify run draws from this seed, one stream per lemma


# ------------------------------------------------------------ lemma runners

def _merge(lemma: str, results) -> LemmaCheckResult:
    return LemmaCheckResult(
        lemma=lemma,
        trials=sum(r.trials for r in results),
        violations=sum(r.violations for r in results),
        max_slack=min((r.max_slack for r in results), default=math.inf),
        tolerance=0.0,
    )


def _verify_chi2(trials, rng, quick):
    # fixed case grid; the result line is the closed-form vs quadrature
    # comparison itself
    return check_chi2(rtol=1e-5)


def _verify_mean_difference(trials, rng, quick):
    results = []
    for k in range(trials):
        stream = rng.offset(k)
        d = int(stream.integers(1, 4))
        mu1 = stream.uniform(-1.5, 1.5, d)
        mu2 = stream.uniform(-1.5, 1.5, d)
        sigma = float(stream.uniform(0.3, 2.0))
        a = stream.uniform(-1.0, 1.0, d)
        b = float(stream.uniform(-1.0, 1.0))
        kind = int(stream.integers(0, 3))
        if kind == 0:
            g = lambda z: (z @ a + b) ** 2
        elif kind == 1:
            g = lambda z: np.sum((z - a) ** 2, axis=1)
        else:
            g = lambda z: (z @ a) ** 2 + abs(b)
        results.append(check_mean_difference(mu1, mu2, sigma, g, 10 ** 5,
                                             stream.offset(1 << 20)))
    return _merge("mean-difference", results)


def _verify_info_gain(trials, rng, quick):
    return check_info_gain_bound(trials, rng)


def _verify_potential_sum(trials, rng, quick):
    results = []
    # every shipped preset, executed as configured (shortened in quick mode)
    for name in preset_names():
        doc = load_preset(name)
        if quick:
            doc["driver"]["episodes"] = min(doc["driver"]["episodes"], 5)
        cfg, _ = build_experiment(doc)
        results.append(check_potential_sum(run_experiment(cfg).trace))
    # plus random synthetic traces with wild scales
    for k in range(trials):
        stream = rng.offset(k)
        d = int(stream.integers(1, 9))
        lam = float(stream.uniform(0.05, 5.0))
        episodes = []
        for e in range(int(stream.integers(1, 15))):
            steps = int(stream.offset(1 + e).integers(1, 12))
            scale = float(stream.offset(100 + e).uniform(0.1, 50.0))
            episodes.append(scale * stream.offset(200 + e).normal((steps, d)))
        results.append(check_potential_sum(
            RunTrace(lam=lam, phi_episodes=tuple(episodes))))
    return _merge("potential-sum", results)


def _verify_self_normalized(trials, rng, quick):
    return check_self_normalized(d=1, d_x=1, n_steps=40, sigma=0.5,
                                 delta=0.1, trials=trials, rng=rng)


def _verify_simulation(trials, rng, quick):
    env = make_lqr([[0.9]], [[1.0]], [[1.0]], [[1.0]], 0.1, 10, [1.0])
    cost = cost_batch_fn(env)
    policy = lambda x, h: -0.4 * x[:, :1]
    w_star = np.array([[0.9, 1.0]])
    results = []
    for k in range(trials):
        stream = rng.offset(k)
        w = w_star + stream.uniform(-0.3, 0.3, (1, 2))
        results.append(check_simulation_lemma(env, w, cost, 20_000,
                                              stream.offset(1 << 20),
                                              policy=policy))
    return _merge("simulation", results)


# id -> (runner, default trial count, verify stream id)
LEMMAS = {
    "chi2": (_verify_chi2, 6, 0),
    "mean-difference": (_verify_mean_difference, 100, 1),
    "info-gain": (_verify_info_gain, 500, 2),
    "potential-sum": (_verify_potential_sum, 200, 3),
    "self-normalized": (_verify_self_normalized, 2000, 4),
    "simulation": (_verify_simulation, 50, 5),
}


# ------------------------------------------------------------- subcommands

def _load_doc(args) -> dict:
    if args.preset is not None:
        return load_preset(args.preset)
    return load_config(args.config)


def cmd_run(args) -> int:
    doc = _load_doc(args)
    cfg, echo = build_experiment(doc, seed_override=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = run_experiment(cfg)
    except RuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    write_report_csv(report, out / "results.csv")
    write_summary_json(report, out / "summary.json", config_echo=echo)
    print(f"{cfg.episodes} episodes, final cumulative regret "
          f"{report.cum_regret[-1]:.4f}, wall clock {report.wall_clock:.1f}s")
    print(f"wrote {out / 'results.csv'} and {out / 'summary.json'}")
    return 0


def cmd_verify(args) -> int:
    selection = list(args.lemmas)
    if not selection or "all" in selection:
        selection = list(LEMMAS)
    unknown = [name for name in selection if name not in LEMMAS]
    if unknown:
        print(f"unknown lemma id {unknown[0]!r}; known: "
              f"{', '.join(LEMMAS)} (or 'all')", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    all_pass = True
    for name in selection:
        runner, default_trials, stream = LEMMAS[name]
        trials = args.trials if args.trials is not None else default_trials
        result = runner(trials, RngStream(VERIFY_SEED, stream),
                        quick=args.trials is not None)
        print(result.line())
        all_pass = all_pass and result.passed
    print(f"{'all pass' if all_pass else 'FAILURES above'} "
          f"({len(selection)} lemmas, {time.perf_counter() - t0:.1f}s)")
    return 0 if all_pass else 1


def cmd_oracle(args) -> int:
    doc = _load_doc(args)
    cfg, _ = build_experiment(doc, seed_override=args.seed)
    jstar = estimate_oracle_cost(cfg.env, cfg,
                                 RngStream(cfg.seed, ORACLE_BASE))
    how = ("exact dynamic programming" if isinstance(cfg.env, MazeEnv)
           else f"mean of {cfg.oracle_rollouts} planner rollouts")
    print(f"oracle cost estimate: {jstar!r} ({how})")
    return 0


AGG_QUANTITIES = ("realized_cost", "oracle_cost", "cum_regret", "info_gain",
                  "coverage")


def _write_aggregate(reports, path) -> None:
    """Per-episode mean and population std across seeds, full precision."""
    header = ["episode"]
    for q in AGG_QUANTITIES:
        header += [f"{q}_mean", f"{q}_std"]
    stacks = {
        "realized_cost": np.stack([r.realized_costs for r in reports]),
        "oracle_cost": np.stack([r.oracle_costs for r in reports]),
        "cum_regret": np.stack([r.cum_regret for r in reports]),
        "info_gain": np.stack([r.info_gain for r in reports]),
        "coverage": np.stack([r.coverage for r in reports]).astype(float),
    }
    lines = [",".join(header)]
    for t in range(reports[0].episodes):
        row = [str(t)]
        for q in AGG_QUANTITIES:
            col = stacks[q][:, t]
            row.append(repr(float(col.mean())))
            row.append(repr(float(col.std())))
        lines.append(",".join(row))
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")


def cmd_sweep(args) -> int:
    doc = _load_doc(args)
    seeds = sweep_seeds(doc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for seed in seeds:
        cfg, _ = build_experiment(doc, seed_override=seed)
        try:
            report = run_experiment(cfg)
        except RuntimeError as exc:
            print(f"seed {seed} failed: {exc}", file=sys.stderr)
            return 1
        write_report_csv(report, out / f"seed_{seed}.csv")
        reports.append(report)
        print(f"seed {seed}: final cumulative regret "
              f"{report.cum_regret[-1]:.4f}")
    _write_aggregate(reports, out / "aggregate.csv")
    print(f"wrote {len(seeds)} seed files and {out / 'aggregate.csv'}")
    return 0


# ------------------------------------------------------------------ parser

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _add_source(parser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", metavar="PATH",
                       help="experiment config file (JSON)")
    group.add_argument("--preset", metavar="NAME",
                       help=f"shipped preset: {', '.join(preset_names())}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knr",
        description="Online learning and control of kernelized nonlinear "
                    "regulators.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment, write results.csv "
                                   "and summary.json")
    _add_source(p)
    p.add_argument("--out", metavar="DIR", default=".",
                   help="output directory (default: current)")
    p.add_argument("--seed", type=_nonnegative_int,
                   help="override the config's seed")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="parallelism cap; never changes results")

    p = sub.add_parser("verify", help="check the supporting lemmas "
                                      "numerically")
    p.add_argument("lemmas", nargs="*", metavar="LEMMA",
                   help=f"one or more of: {', '.join(LEMMAS)}, or 'all' "
                        f"(default: all)")
    p.add_argument("--trials", type=_positive_int,
                   help="override per-lemma trial counts (also shortens the "
                        "preset traces potential-sum replays)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="parallelism cap; never changes results")

    p = sub.add_parser("oracle", help="estimate the oracle cost of a config")
    _add_source(p)
    p.add_argument("--seed", type=_nonnegative_int,
                   help="override the config's seed")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="parallelism cap; never changes results")

    p = sub.add_parser("sweep", help="run every seed in driver.seeds, write "
                                     "seed_<n>.csv files and aggregate.csv")
    _add_source(p)
    p.add_argument("--out", metavar="DIR", default=".",
                   help="output directory (default: current)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="parallelism cap; never changes results")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "verify": cmd_verify,
               "oracle": cmd_oracle, "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
