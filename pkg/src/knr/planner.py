"""Control selection: MPPI, receding horizon, exhaustive and optimistic planning.

Conventions: dynamics oracles and costs are batch-first. An oracle's step
maps (n, d_x) states and (n, d_u) controls to (n, d_x) next-state means;
a cost maps the same plus the step index h to an (n,) vector. Planning
always rolls out mean dynamics (the oracle's noise_std is execution-time
information, ignored here).

Sample k of an MPPI call draws its perturbation from the stream
rng.stream_id + k, so results are identical no matter how rollouts are
scheduled; the caller spaces bases at least n_samples apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .linalg import RngStream
from .model import BallSpec, KnrModel


@dataclass
class MppiConfig:
    control_variance: float
    temperature: float
    horizon: int
    n_samples: int
    u_min: np.ndarray | float = -1.0
    u_max: np.ndarray | float = 1.0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.control_variance < 0:
            raise ValueError(
                f"control_variance must be >= 0, got {self.control_variance}")


@dataclass
class DynamicsOracle:
    """Mean dynamics for planning: step(x_batch, u_batch) -> next means."""

    step: Callable[[np.ndarray, np.ndarray], np.ndarray]
    noise_std: float = 0.0


def rollout_cost(oracle: DynamicsOracle, cost, x0, controls) -> np.ndarray:
    """Total cost of control sequences (n, H, d_u) from x0 under mean dynamics."""
    controls = np.asarray(controls, dtype=float)
    n, horizon, _ = controls.shape
    x = np.tile(np.asarray(x0, dtype=float), (n, 1))
    total = np.zeros(n)
    for h in range(horizon):
        u = controls[:, h, :]
        total += np.asarray(cost(x, u, h), dtype=float)
        x = oracle.step(x, u)
    return total


def mppi_plan(oracle: DynamicsOracle, cost, x0, nominal, cfg: MppiConfig,
              rng: RngStream, perturbations=None) -> np.ndarray:
    """One MPPI update of the nominal control sequence.

    Each of n_samples perturbed sequences (nominal + N(0, control_variance)
    noise, clamped to bounds) is rolled out under the oracle's mean
    dynamics; the returned plan is the softmax-weighted average with
    weights exp(-(S_k - min_j S_j) / temperature).

    `perturbations` (n_samples, horizon, d_u) overrides the sampled noise;
    it exists for tests that need hand-placed candidates.
    """
    if cfg.temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {cfg.temperature}")
    nominal = np.asarray(nominal, dtype=float)
    if nominal.ndim == 1:
        nominal = nominal[:, None]
    if nominal.shape[0] != cfg.horizon:
        raise ValueError(f"nominal length {nominal.shape[0]} != horizon "
                         f"{cfg.horizon}")
    d_u = nominal.shape[1]
    if perturbations is None:
        std = np.sqrt(cfg.control_variance)
        perturbations = np.empty((cfg.n_samples, cfg.horizon, d_u))
        for k in range(cfg.n_samples):
            perturbations[k] = std * rng.offset(k).normal((cfg.horizon, d_u))
    else:
        perturbations = np.asarray(perturbations, dtype=float)
    candidates = np.clip(nominal[None, :, :] + perturbations,
                         cfg.u_min, cfg.u_max)
    total = rollout_cost(oracle, cost, x0, candidates)
    w = np.exp(-(total - total.min()) / cfg.temperature)
    w /= w.sum()
    # the average of in-bound candidates can drift a few ulp past the
    # bounds; clamp so envs with strict control validation accept it
    return np.clip(np.einsum("k,khd->hd", w, candidates),
                   cfg.u_min, cfg.u_max)


def receding_horizon_step(oracle: DynamicsOracle, cost, x, warm, cfg: MppiConfig,
                          rng: RngStream):
    """Plan from x, return (first control, shifted warm start)."""
    plan = mppi_plan(oracle, cost, x, warm, cfg, rng)
    next_warm = np.concatenate([plan[1:], plan[-1:]], axis=0)
    return plan[0], next_warm


def exhaustive_plan(oracle: DynamicsOracle, cost, x0, action_set, horizon: int):
    """Exact minimizer over all |action_set|^horizon open-loop sequences.

    Deterministic mean dynamics only. Ties go to the lexicographically
    smallest action-index sequence (enumeration order makes the first
    minimum exactly that). Budget capped at 1e6 sequences.
    """
    actions = np.asarray(action_set, dtype=float)
    if actions.ndim == 1:
        actions = actions[:, None]
    n_actions = len(actions)
    n_seq = n_actions**horizon
    if n_seq > 10**6:
        raise ValueError(f"exhaustive_plan budget exceeded: {n_actions}^{horizon} "
                         f"= {n_seq} > 1e6 sequences")
    # index grid in lexicographic order, leftmost step most significant
    seqs = np.array(list(product(range(n_actions), repeat=horizon)), dtype=np.int64)
    controls = actions[seqs]  # (n_seq, horizon, d_u)
    total = rollout_cost(oracle, cost, x0, controls)
    best = int(np.argmin(total))  # first occurrence = lexicographic tie-break
    return controls[best], float(total[best])


def optimistic_plan(candidates, spec: BallSpec, m: KnrModel, plan_fn, cost, x0):
    """Pick the in-ball candidate whose plan promises the least cost.

    plan_fn(w, cost, x0) -> (plan, planned_cost) embeds the dynamics oracle
    construction for a candidate weight matrix. Candidates outside the
    confidence ball are discarded before any planning; if none survive,
    the ridge center is used.
    """
    if len(candidates) == 0:
        raise ValueError("optimistic_plan needs at least one candidate")
    inside = [w for w in candidates if m.ball_contains(spec, w)]
    if not inside:
        inside = [m.wbar.copy()]
    best_w, best_plan, best_cost = None, None, np.inf
    for w in inside:
        plan, planned = plan_fn(w, cost, x0)
        if planned < best_cost:
            best_w, best_plan, best_cost = w, plan, planned
    return best_w, best_plan
