"""Experiment loop: draw a model, plan, execute, update, account regret.

Every random draw in a run comes from a stream id derived from the run
seed, laid out in disjoint blocks so results are independent of
scheduling: episode t owns stream ids [(t+1) * EPISODE_BLOCK, ...), the
oracle-cost estimator owns ids from ORACLE_BASE upward, and feature-map
construction uses low ids near 0. Within a block: offset 0 is the
posterior draw, offsets 1 + h are the step-h environment noise,
CAND_BASE + j are optimistic candidate draws, OPT_PLAN is the candidate
scoring planner, and PLAN_BASE + h * (n_samples + 1) * plan_iters starts
the step-h planning block, one (n_samples + 1)-wide slot per refinement
pass.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .analysis import RunTrace
from .envs import (
    MazeEnv,
    Trajectory,
    cell_of,
    cost_batch_fn,
    planning_oracle,
    true_weight_matrix,
)
from .features import FeatureMap, maze_onehot_index
from .linalg import RngStream, spectral_norm
from .model import BallSpec, KnrModel
from .planner import (
    DynamicsOracle,
    MppiConfig,
    mppi_plan,
    optimistic_plan,
    rollout_cost,
)

EPISODE_BLOCK = 1 << 32
ORACLE_BASE = 1 << 48
ROLLOUT_BLOCK = 1 << 28   # per oracle rollout
PLAN_BASE = 1 << 20       # start of per-step planning blocks
OPT_PLAN = 1 << 19        # candidate-scoring planner block
CAND_BASE = 1 << 16       # optimistic candidate draws

REFINE_DECAY = 0.5        # sampling-variance shrink per refinement pass

POLICY_MODES = ("thompson", "random-walk", "optimistic")

CSV_COLUMNS = ["episode", "realized_cost", "oracle_cost", "cum_regret",
               "info_gain", "ball_ok", "coverage", "first_success"]


@dataclass
class ExperimentConfig:
    """Everything one experiment run needs.

    w_star_norm_bound feeds the confidence radius; None falls back to the
    true spectral norm when the environment's weights are representable.
    pin_true_model plans with the true weights every episode (the
    estimator still runs for logging); it is the certainty-equivalent
    diagnostic, not a learning mode. plan_iters > 1 reruns the planner
    update at each step with the variance annealed, sharpening the plan.
    """

    env: object
    feature_map: FeatureMap
    lam: float
    sigma: float
    planner: MppiConfig
    reshape_scale: float
    episodes: int
    model_update_period: int = 1
    seed: int = 0
    oracle_rollouts: int = 20
    plan_iters: int = 1
    w_star_norm_bound: float | None = None
    c1: float = 16.0
    beta_form: str = "appendix"
    policy_mode: str = "thompson"
    n_candidates: int = 8
    pin_true_model: bool = False

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError(f"episodes must be >= 1, got {self.episodes}")
        if self.plan_iters < 1:
            raise ValueError(f"plan_iters must be >= 1, got {self.plan_iters}")
        if self.model_update_period < 1:
            raise ValueError(f"model_update_period must be >= 1, "
                             f"got {self.model_update_period}")
        if self.oracle_rollouts < 1:
            raise ValueError(f"oracle_rollouts must be >= 1, "
                             f"got {self.oracle_rollouts}")
        if self.policy_mode not in POLICY_MODES:
            raise ValueError(f"policy_mode must be one of {POLICY_MODES}, "
                             f"got {self.policy_mode!r}")
        if self.beta_form not in ("appendix", "main-text"):
            raise ValueError(f"beta_form must be 'appendix' or 'main-text', "
                             f"got {self.beta_form!r}")
        if self.reshape_scale < 0:
            raise ValueError(f"reshape_scale must be >= 0, "
                             f"got {self.reshape_scale}")


@dataclass
class RegretReport:
    """Per-episode accounting of one run.

    ball_ok: 1 if the confidence ball built before the episode contained
    the true weights, 0 if not, -1 when the true weights are not
    representable in the feature map. coverage: distinct (cell, action)
    pairs visited so far (maze), -1 elsewhere. first_success: first
    episode whose trajectory touches the maze goal, -1 if none (or off
    maze).
    """

    realized_costs: np.ndarray
    oracle_costs: np.ndarray
    cum_regret: np.ndarray
    info_gain: np.ndarray
    ball_ok: np.ndarray
    coverage: np.ndarray
    first_success: int
    trace: RunTrace
    wall_clock: float = 0.0

    @property
    def episodes(self) -> int:
        return len(self.realized_costs)


# ------------------------------------------------------------ planning aids

def weight_oracle(fmap: FeatureMap, w: np.ndarray) -> DynamicsOracle:
    """Mean dynamics x' = w phi(x, u) of a (sampled) weight matrix."""
    return DynamicsOracle(step=lambda xs, us: fmap.evaluate_batch(xs, us) @ w.T)


def _refined_plan(oracle: DynamicsOracle, cost, x, nominal,
                  pcfg: MppiConfig, rng: RngStream, base: int,
                  plan_iters: int) -> np.ndarray:
    """plan_iters planner updates from `nominal`, each pass resampling
    around the previous plan with the variance shrunk by REFINE_DECAY, so
    later passes polish rather than re-explore. Stream slot i of the block
    starting at `base` feeds pass i."""
    n1 = pcfg.n_samples + 1
    plan = nominal
    for i in range(plan_iters):
        step_cfg = replace(pcfg, horizon=len(plan),
                           control_variance=pcfg.control_variance
                           * REFINE_DECAY ** i)
        plan = mppi_plan(oracle, cost, x, plan, step_cfg,
                         rng.offset(base + i * n1))
    return plan


def _execute_receding(env, oracle: DynamicsOracle, cost, pcfg: MppiConfig,
                      rng: RngStream, plan_iters: int = 1) -> Trajectory:
    """Receding-horizon MPPI against `oracle`, executed in the true env.

    The lookahead is capped at the remaining episode steps: costs past the
    end of the episode are never paid, and planning for them makes the
    last few controls hedge against a future that does not exist.
    """
    stride = (pcfg.n_samples + 1) * plan_iters
    warm = np.zeros((min(pcfg.horizon, env.horizon), env.d_u))
    x = env.x0_vec.copy()
    states, controls, costs = [x.copy()], [], []
    for h in range(env.horizon):
        hr = min(pcfg.horizon, env.horizon - h)
        plan = _refined_plan(oracle, cost, x, warm[:hr], pcfg,
                             rng, PLAN_BASE + h * stride, plan_iters)
        u = np.asarray(plan[0], dtype=float).reshape(env.d_u)
        warm = np.concatenate([plan[1:], plan[-1:]], axis=0)
        x, c = (env.step(x, u) if isinstance(env, MazeEnv)
                else env.step(x, u, rng.offset(1 + h)))
        states.append(np.asarray(x, dtype=float).copy())
        controls.append(u)
        costs.append(float(c))
    return Trajectory(states=np.array(states), controls=np.array(controls),
                      costs=np.array(costs))


def _ball_beta(cfg: ExperimentConfig, model: KnrModel, bound: float,
               t: int) -> float:
    if t < 1:
        return float("inf")  # pre-data ball, trivially checked
    if cfg.beta_form == "appendix":
        return model.beta_appendix(bound, t)
    return model.beta_main(cfg.c1, t)


def _select_weights(cfg: ExperimentConfig, snapshot: KnrModel,
                    rng: RngStream) -> np.ndarray:
    if cfg.pin_true_model or cfg.policy_mode == "random-walk":
        return snapshot.wbar.copy()
    if cfg.policy_mode == "thompson":
        return snapshot.thompson_sample(cfg.reshape_scale, rng.offset(0))
    # optimistic: score ball-filtered posterior draws by their planned cost
    if cfg.w_star_norm_bound is None:
        raise ValueError("optimistic mode needs w_star_norm_bound")
    beta = _ball_beta(cfg, snapshot, cfg.w_star_norm_bound,
                      snapshot.n_episodes)
    spec = BallSpec(beta=beta, form=cfg.beta_form, c1=cfg.c1)
    cands = [snapshot.thompson_sample(cfg.reshape_scale, rng.offset(CAND_BASE + j))
             for j in range(cfg.n_candidates)]
    env, cost = cfg.env, cost_batch_fn(cfg.env)

    def plan_fn(w, cost_fn, x0):
        oracle = weight_oracle(cfg.feature_map, w)
        nominal = np.zeros((min(cfg.planner.horizon, env.horizon), env.d_u))
        plan = _refined_plan(oracle, cost_fn, x0, nominal, cfg.planner,
                             rng, OPT_PLAN, cfg.plan_iters)
        return plan, float(rollout_cost(oracle, cost_fn, x0, plan[None])[0])

    w, _ = optimistic_plan(cands, spec, snapshot, plan_fn, cost, env.x0_vec)
    return w


# ------------------------------------------------------------------ episode

def run_episode(cfg: ExperimentConfig, snapshot: KnrModel, env,
                rng: RngStream):
    """One episode with the given model snapshot; returns (trajectory,
    weights used). rng is the episode's base stream."""
    w_used = _select_weights(cfg, snapshot, rng)
    cost = cost_batch_fn(env)
    if cfg.policy_mode == "random-walk":
        stride = (cfg.planner.n_samples + 1) * cfg.plan_iters
        x = env.x0_vec.copy()
        states, controls, costs = [x.copy()], [], []
        for h in range(env.horizon):
            u = rng.offset(PLAN_BASE + h * stride).uniform(
                cfg.planner.u_min, cfg.planner.u_max, env.d_u)
            x, c = (env.step(x, u) if isinstance(env, MazeEnv)
                    else env.step(x, u, rng.offset(1 + h)))
            states.append(np.asarray(x, dtype=float).copy())
            controls.append(np.asarray(u, dtype=float).reshape(env.d_u))
            costs.append(float(c))
        traj = Trajectory(states=np.array(states), controls=np.array(controls),
                          costs=np.array(costs))
    else:
        oracle = weight_oracle(cfg.feature_map, w_used)
        traj = _execute_receding(env, oracle, cost, cfg.planner, rng,
                                 cfg.plan_iters)
    return traj, w_used


# --------------------------------------------------------------- oracle J*

_oracle_cache: dict = {}


def _planner_key(p: MppiConfig) -> tuple:
    return (p.control_variance, p.temperature, p.horizon, p.n_samples,
            repr(np.asarray(p.u_min)), repr(np.asarray(p.u_max)))


def _maze_dp_cost(env: MazeEnv) -> float:
    """Exact finite-horizon optimum: deterministic dynamics and a
    control-independent stage cost collapse the control space to the four
    move bins, so backward induction over the 25 cells is exact."""
    table = env.next_cell_table()
    centers = np.array([[-1.0 + 0.5 * (c // 5), -1.0 + 0.5 * (c % 5)]
                        for c in range(25)])
    stage = np.sum((centers - env.goal_vec) ** 2, axis=1) - 8.0
    v = np.zeros(25)
    for _ in range(env.horizon):
        v = stage + np.min(v[table], axis=1)
    ix, iy = cell_of(env.x0_vec)
    return float(v[5 * ix + iy])


def estimate_oracle_cost(env, cfg: ExperimentConfig, rng: RngStream) -> float:
    """Best-effort planner cost under the true dynamics.

    Maze: exact dynamic programming, no Monte-Carlo spread. Other
    environments: mean realized cost over oracle_rollouts receding-horizon
    executions that plan with the true mean dynamics. Results are cached
    per environment and estimator settings.
    """
    if isinstance(env, MazeEnv):
        key = ("maze-dp", env)
        if key not in _oracle_cache:
            _oracle_cache[key] = _maze_dp_cost(env)
        return _oracle_cache[key]
    key = (env, cfg.oracle_rollouts, cfg.plan_iters,
           _planner_key(cfg.planner), rng.seed, rng.stream_id)
    if key not in _oracle_cache:
        oracle = planning_oracle(env)
        cost = cost_batch_fn(env)
        totals = [
            _execute_receding(env, oracle, cost, cfg.planner,
                              rng.offset((r + 1) * ROLLOUT_BLOCK),
                              cfg.plan_iters).realized_total
            for r in range(cfg.oracle_rollouts)
        ]
        _oracle_cache[key] = float(np.mean(totals))
    return _oracle_cache[key]


# ------------------------------------------------------------------- loop

def coverage_tracker(env, trajectories) -> int:
    """Distinct (cell, action-bin) pairs executed so far (maze only)."""
    if not isinstance(env, MazeEnv):
        raise TypeError("coverage tracking is only supported on the maze")
    seen = set()
    for traj in trajectories:
        for h in range(len(traj.controls)):
            seen.add(maze_onehot_index(traj.states[h], traj.controls[h]))
    return len(seen)


def run_experiment(cfg: ExperimentConfig) -> RegretReport:
    """The full online loop: T episodes of select-plan-execute-update."""
    t_start = time.perf_counter()
    env, fmap = cfg.env, cfg.feature_map
    model = KnrModel(env.d_x, fmap.d_phi, cfg.lam, cfg.sigma)
    w_star = true_weight_matrix(env, fmap)
    bound = cfg.w_star_norm_bound
    if bound is None and w_star is not None:
        bound = spectral_norm(w_star)
    if cfg.pin_true_model:
        if w_star is None:
            raise ValueError("pin_true_model requires representable true "
                             "weights for this env/feature pairing")
        snapshot = model.copy()
        snapshot.wbar = w_star.copy()
    else:
        snapshot = model.copy()
    jstar = estimate_oracle_cost(env, cfg, RngStream(cfg.seed, ORACLE_BASE))

    n = cfg.episodes
    realized = np.zeros(n)
    info = np.zeros(n)
    ball = np.full(n, -1, dtype=np.int64)
    coverage = np.full(n, -1, dtype=np.int64)
    cum = np.zeros(n)
    is_maze = isinstance(env, MazeEnv)
    goal_cell = cell_of(env.goal_vec) if is_maze else None
    visited: set = set()
    first_success = -1
    phi_episodes = []
    running = 0.0
    for t in range(n):
        try:
            if w_star is not None:
                beta = _ball_beta(cfg, model, bound, t)
                spec = BallSpec(beta=beta, form=cfg.beta_form, c1=cfg.c1)
                ball[t] = int(model.ball_contains(spec, w_star))
            traj, _ = run_episode(cfg, snapshot, env,
                                  RngStream(cfg.seed, (t + 1) * EPISODE_BLOCK))
            phis = fmap.evaluate_batch(traj.states[:-1], traj.controls)
            model.update_episode(list(zip(phis, traj.states[1:])))
            if not cfg.pin_true_model and (t + 1) % cfg.model_update_period == 0:
                snapshot = model.copy()
            realized[t] = traj.realized_total
            running += realized[t] - jstar
            cum[t] = running
            info[t] = model.information_gain()
            phi_episodes.append(phis)
            if is_maze:
                for h in range(len(traj.controls)):
                    visited.add(maze_onehot_index(traj.states[h],
                                                  traj.controls[h]))
                coverage[t] = len(visited)
                if first_success < 0 and any(
                        cell_of(s) == goal_cell for s in traj.states):
                    first_success = t
        except Exception as exc:
            raise RuntimeError(f"episode {t}: {exc}") from exc
    return RegretReport(
        realized_costs=realized,
        oracle_costs=np.full(n, jstar),
        cum_regret=cum,
        info_gain=info,
        ball_ok=ball,
        coverage=coverage,
        first_success=first_success,
        trace=RunTrace(lam=cfg.lam, phi_episodes=tuple(phi_episodes)),
        wall_clock=time.perf_counter() - t_start,
    )


# -------------------------------------------------------------------- files

def write_report_csv(report: RegretReport, path) -> None:
    """CSV with one row per episode; floats as repr so a round-trip parse
    reproduces them exactly."""
    lines = [",".join(CSV_COLUMNS)]
    for t in range(report.episodes):
        first = (report.first_success
                 if 0 <= report.first_success <= t else -1)
        lines.append(",".join([
            str(t),
            repr(float(report.realized_costs[t])),
            repr(float(report.oracle_costs[t])),
            repr(float(report.cum_regret[t])),
            repr(float(report.info_gain[t])),
            str(int(report.ball_ok[t])),
            str(int(report.coverage[t])),
            str(first),
        ]))
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")


def read_report_csv(path) -> dict:
    """Parse a results CSV back into column arrays (floats stay exact)."""
    with open(path, newline="") as f:
        rows = [line.rstrip("\n").split(",") for line in f if line.strip()]
    header = rows[0]
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected results columns {header}")
    cols = {name: [] for name in header}
    for row in rows[1:]:
        for name, value in zip(header, row):
            cols[name].append(value)
    out = {}
    for name in ("episode", "ball_ok", "coverage", "first_success"):
        out[name] = np.array([int(v) for v in cols[name]], dtype=np.int64)
    for name in ("realized_cost", "oracle_cost", "cum_regret", "info_gain"):
        out[name] = np.array([float(v) for v in cols[name]])
    return out


def summary_payload(report: RegretReport, config_echo=None) -> dict:
    return {
        "final_cumulative_regret": float(report.cum_regret[-1]),
        "first_success_episode": int(report.first_success),
        "episodes": report.episodes,
        "wall_clock_seconds": report.wall_clock,
        "config": config_echo,
    }


def write_summary_json(report: RegretReport, path, config_echo=None) -> None:
    with open(path, "w") as f:
        json.dump(summary_payload(report, config_echo), f, indent=2)
        f.write("\n")
