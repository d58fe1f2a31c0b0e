"""Ground-truth environments: LQR, grid maze, damped pendulum.

Each environment is an immutable description with a `step(x, u, rng)`
method returning (x_next, cost) and fields `horizon`, `x0`, `d_x`, `d_u`.
`rollout` executes a policy for `horizon` steps. Batched mean-dynamics
oracles for planning live in `planning_oracle`.

The maze: states on the 5x5 grid over [-1, 1]^2 (step 0.5), controls in
[-1, 1]. ceil(2u) selects the move: -1 left, 0 up (second coordinate
decreases), 1 right, 2 down (it increases); u = -1 ceils to -2 and is
clamped to "left". Moves into a wall, or off the grid, leave the state
unchanged. Cost is ||x - goal||^2 - 8 charged at the pre-move state, so
sitting on the goal earns -8 per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import RngStream, gauss_vector

GRID_STEP = 0.5
GRID_N = 5  # cells per side, coordinates -1, -0.5, 0, 0.5, 1

# displacement per action bin 0..3 (left, up, right, down)
MAZE_MOVES = np.array([[-0.5, 0.0], [0.0, -0.5], [0.5, 0.0], [0.0, 0.5]])
MAZE_LAYOUT_VERSION = "maze-layout 1"


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray    # (H+1, d_x)
    controls: np.ndarray  # (H, d_u)
    costs: np.ndarray     # (H,)

    @property
    def realized_total(self) -> float:
        return float(self.costs.sum())


# ----------------------------------------------------------------- LQR

@dataclass(frozen=True)
class LqrEnv:
    a: tuple          # d_x x d_x, row tuples (hashable for caching)
    b: tuple          # d_x x d_u
    q: tuple          # d_x x d_x
    r: tuple          # d_u x d_u
    sigma: float
    horizon: int
    x0: tuple

    @property
    def a_mat(self):
        return np.asarray(self.a, dtype=float)

    @property
    def b_mat(self):
        return np.asarray(self.b, dtype=float)

    @property
    def q_mat(self):
        return np.asarray(self.q, dtype=float)

    @property
    def r_mat(self):
        return np.asarray(self.r, dtype=float)

    @property
    def d_x(self):
        return len(self.a)

    @property
    def d_u(self):
        return len(self.b[0])

    @property
    def x0_vec(self):
        return np.asarray(self.x0, dtype=float)

    def step(self, x, u, rng):
        return lqr_step(self, x, u, rng)


def make_lqr(a, b, q, r, sigma, horizon, x0) -> LqrEnv:
    """Build an LqrEnv from array-likes (tuples keep the dataclass hashable)."""
    to_t = lambda m: tuple(tuple(float(v) for v in row) for row in np.atleast_2d(m))
    return LqrEnv(a=to_t(a), b=to_t(b), q=to_t(q), r=to_t(r), sigma=float(sigma),
                  horizon=int(horizon), x0=tuple(float(v) for v in np.atleast_1d(x0)))


def lqr_step(env: LqrEnv, x, u, rng: RngStream):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (env.d_x,) or u.shape != (env.d_u,):
        raise ValueError(f"lqr_step: got shapes {x.shape}, {u.shape}, expected "
                         f"({env.d_x},), ({env.d_u},)")
    cost = float(x @ env.q_mat @ x + u @ env.r_mat @ u)
    noise = gauss_vector(rng, env.d_x, env.sigma)
    return env.a_mat @ x + env.b_mat @ u + noise, cost


# ----------------------------------------------------------------- maze

def cell_of(x) -> tuple:
    """Grid cell (ix, iy) of an on-grid state."""
    return (int(round((x[0] + 1.0) / GRID_STEP)), int(round((x[1] + 1.0) / GRID_STEP)))


def cell_center(ix: int, iy: int) -> np.ndarray:
    return np.array([-1.0 + GRID_STEP * ix, -1.0 + GRID_STEP * iy])


def action_bin(u: float) -> int:
    return int(np.clip(math.ceil(2.0 * u), -1, 2)) + 1


@dataclass(frozen=True)
class MazeEnv:
    walls: frozenset       # of frozenset({(ix,iy), (ix,iy)}) blocked edges
    horizon: int = 30
    start: tuple = (-1.0, -1.0)
    goal: tuple = (1.0, 1.0)

    d_x = 2
    d_u = 1

    @property
    def x0(self):
        return self.start

    @property
    def x0_vec(self):
        return np.asarray(self.start, dtype=float)

    @property
    def goal_vec(self):
        return np.asarray(self.goal, dtype=float)

    def step(self, x, u, rng=None):
        return maze_step(self, x, u)

    def next_cell_table(self) -> np.ndarray:
        """(25, 4) table of successor cell indices (5*ix + iy), walls applied."""
        table = np.empty((GRID_N * GRID_N, 4), dtype=np.int64)
        for ix in range(GRID_N):
            for iy in range(GRID_N):
                c = 5 * ix + iy
                for a in range(4):
                    dx, dy = int(MAZE_MOVES[a][0] / GRID_STEP), int(MAZE_MOVES[a][1] / GRID_STEP)
                    jx, jy = ix + dx, iy + dy
                    if not (0 <= jx < GRID_N and 0 <= jy < GRID_N):
                        table[c, a] = c  # boundary acts as a wall
                    elif frozenset({(ix, iy), (jx, jy)}) in self.walls:
                        table[c, a] = c
                    else:
                        table[c, a] = 5 * jx + jy
        return table


def maze_step(env: MazeEnv, x, u):
    x = np.asarray(x, dtype=float).reshape(2)
    offgrid = np.abs((x + 1.0) / GRID_STEP - np.rint((x + 1.0) / GRID_STEP))
    if np.any(offgrid > 1e-9) or np.any(np.abs(x) > 1.0 + 1e-9):
        raise ValueError(f"maze_step: state {x} is not on the grid")
    uu = float(np.asarray(u).reshape(-1)[0])
    if uu < -1.0 or uu > 1.0:
        raise ValueError(f"maze_step: control {uu} outside [-1, 1]")
    cost = float(np.sum((x - env.goal_vec) ** 2) - 8.0)
    ix, iy = cell_of(x)
    nxt = env.next_cell_table()[5 * ix + iy, action_bin(uu)]
    return cell_center(nxt // 5, nxt % 5), cost


# maze layout files: versioned ASCII. First line is the version tag, then
# 2*GRID_N + 1 lines of 2*GRID_N + 1 characters. Cells sit at odd (row, col);
# a '|' between two cells on a cell row blocks the horizontal edge, a '-'
# directly between two cells in a separator row blocks the vertical edge.
# The outer border must be fully closed. '#' comment lines are skipped.

def parse_maze_layout(text: str) -> frozenset:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != MAZE_LAYOUT_VERSION:
        head = lines[0].strip() if lines else "<empty>"
        raise ValueError(f"unsupported maze layout header {head!r}, expected "
                         f"{MAZE_LAYOUT_VERSION!r}")
    grid = lines[1:]
    side = 2 * GRID_N + 1
    if len(grid) != side or any(len(row) != side for row in grid):
        raise ValueError(f"maze layout must be {side} lines of {side} chars")
    walls = set()
    for iy in range(GRID_N):        # file row iy=0 is the top (x1 = -1)
        for ix in range(GRID_N):
            r, c = 2 * iy + 1, 2 * ix + 1
            if ix + 1 < GRID_N and grid[r][c + 1] == "|":
                walls.add(frozenset({(ix, iy), (ix + 1, iy)}))
            if iy + 1 < GRID_N and grid[r + 1][c] == "-":
                walls.add(frozenset({(ix, iy), (ix, iy + 1)}))
    # closed outer border
    for k in range(1, side, 2):
        if grid[0][k] != "-" or grid[side - 1][k] != "-":
            raise ValueError("maze layout: top/bottom border must be closed")
        if grid[k][0] != "|" or grid[k][side - 1] != "|":
            raise ValueError("maze layout: left/right border must be closed")
    return frozenset(walls)


def render_maze_layout(walls) -> str:
    side = 2 * GRID_N + 1
    grid = [[" "] * side for _ in range(side)]
    for k in range(0, side, 2):
        for j in range(side):
            grid[k][j] = "+" if j % 2 == 0 else ("-" if k in (0, side - 1) else " ")
            grid[j][k] = "+" if j % 2 == 0 else ("|" if k in (0, side - 1) else grid[j][k])
    for iy in range(GRID_N):
        for ix in range(GRID_N):
            grid[2 * iy + 1][2 * ix + 1] = "."
            if ix + 1 < GRID_N and frozenset({(ix, iy), (ix + 1, iy)}) in walls:
                grid[2 * iy + 1][2 * ix + 2] = "|"
            if iy + 1 < GRID_N and frozenset({(ix, iy), (ix, iy + 1)}) in walls:
                grid[2 * iy + 2][2 * ix + 1] = "-"
    return MAZE_LAYOUT_VERSION + "\n" + "\n".join("".join(row) for row in grid) + "\n"


# ------------------------------------------------------------- pendulum

@dataclass(frozen=True)
class PendulumEnv:
    gravity: float = 9.8
    length: float = 1.0
    damping: float = 0.2
    dt: float = 0.05
    sigma: float = 0.01
    u_max: float = 2.0
    horizon: int = 40
    x0: tuple = (math.pi * 0.9, 0.0)

    d_x = 2
    d_u = 1

    @property
    def x0_vec(self):
        return np.asarray(self.x0, dtype=float)

    def step(self, x, u, rng):
        return pendulum_step(self, x, u, rng)


def wrap_angle(theta):
    """Wrap to [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def pendulum_mean_step(env: PendulumEnv, x, u):
    """Euler step of theta'' = -(g/l) sin theta - damping theta' + u (batched)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    theta, omega = x[:, 0], x[:, 1]
    acc = -(env.gravity / env.length) * np.sin(theta) - env.damping * omega + u[:, 0]
    return np.stack([theta + env.dt * omega, omega + env.dt * acc], axis=1)


def pendulum_cost_batch(env: PendulumEnv, x, u):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    return wrap_angle(x[:, 0]) ** 2 + 0.1 * x[:, 1] ** 2 + 0.001 * u[:, 0] ** 2


def pendulum_step(env: PendulumEnv, x, u, rng: RngStream):
    x = np.asarray(x, dtype=float).reshape(2)
    uu = float(np.asarray(u).reshape(-1)[0])
    if abs(uu) > env.u_max + 1e-12:
        raise ValueError(f"pendulum_step: |u|={abs(uu)} exceeds u_max={env.u_max}")
    cost = float(pendulum_cost_batch(env, x[None], np.array([[uu]]))[0])
    mean = pendulum_mean_step(env, x[None], np.array([[uu]]))[0]
    return mean + gauss_vector(rng, 2, env.sigma), cost


# ------------------------------------------------------------- rollouts

def rollout(env, policy: Callable, rng: RngStream) -> Trajectory:
    """Execute policy(x, h) -> u for env.horizon steps from env.x0.

    The per-step noise stream is rng.offset(h), so trajectories are
    reproducible regardless of how the caller schedules anything else.
    """
    x = env.x0_vec.copy()
    states = [x.copy()]
    controls, costs = [], []
    for h in range(env.horizon):
        u = np.atleast_1d(np.asarray(policy(x, h), dtype=float))
        x, cost = (env.step(x, u, rng.offset(h))
                   if not isinstance(env, MazeEnv) else env.step(x, u))
        states.append(np.asarray(x, dtype=float).copy())
        controls.append(u)
        costs.append(cost)
    return Trajectory(states=np.array(states),
                      controls=np.array(controls),
                      costs=np.array(costs))


def trajectory_csv_rows(traj: Trajectory, episode: int):
    """Rows (episode, h, x..., u..., cost) with full-precision decimals."""
    rows = []
    for h in range(len(traj.controls)):
        rows.append([str(episode), str(h)]
                    + [repr(float(v)) for v in traj.states[h]]
                    + [repr(float(v)) for v in traj.controls[h]]
                    + [repr(float(traj.costs[h]))])
    return rows


# ----------------------------------------------- planning-side dynamics

def planning_oracle(env):
    """Batched true-mean-dynamics oracle for planning."""
    from .planner import DynamicsOracle

    if isinstance(env, LqrEnv):
        a_t, b_t = env.a_mat.T, env.b_mat.T
        return DynamicsOracle(step=lambda x, u: x @ a_t + u @ b_t,
                              noise_std=env.sigma)
    if isinstance(env, MazeEnv):
        table = env.next_cell_table()
        centers = np.array([cell_center(c // 5, c % 5)
                            for c in range(GRID_N * GRID_N)])

        def step(x, u):
            xs = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
            bins = np.clip(np.rint((xs + 1.0) / GRID_STEP), 0, 4).astype(np.int64)
            cells = 5 * bins[:, 0] + bins[:, 1]
            acts = (np.clip(np.ceil(2.0 * np.asarray(u, dtype=float)[:, 0]), -1, 2)
                    + 1).astype(np.int64)
            return centers[table[cells, acts]]

        return DynamicsOracle(step=step, noise_std=0.0)
    if isinstance(env, PendulumEnv):
        return DynamicsOracle(step=lambda x, u: pendulum_mean_step(env, x, u),
                              noise_std=env.sigma)
    raise TypeError(f"no planning oracle for {type(env).__name__}")


def cost_batch_fn(env):
    """Batched stage cost c(x, u) of the environment, as cost(x, u, h)."""
    if isinstance(env, LqrEnv):
        q, r = env.q_mat, env.r_mat
        return lambda x, u, h: (np.einsum("ni,ij,nj->n", x, q, x)
                                + np.einsum("ni,ij,nj->n", u, r, u))
    if isinstance(env, MazeEnv):
        goal = env.goal_vec
        return lambda x, u, h: np.sum((x - goal) ** 2, axis=1) - 8.0
    if isinstance(env, PendulumEnv):
        return lambda x, u, h: pendulum_cost_batch(env, x, u)
    raise TypeError(f"no cost function for {type(env).__name__}")


def true_weight_matrix(env, feature_map) -> np.ndarray | None:
    """Exact W* with dynamics mean = W* phi(x, u), where representable.

    LQR with concat features: W* = [A B]. Maze with one-hot features: the
    column of each (cell, action) pair is its successor cell center.
    Pendulum dynamics are not linear in any shipped feature map -> None.
    """
    from .features import LqrConcatMap, MazeOneHotMap

    if isinstance(env, LqrEnv) and isinstance(feature_map, LqrConcatMap):
        return np.concatenate([env.a_mat, env.b_mat], axis=1)
    if isinstance(env, MazeEnv) and isinstance(feature_map, MazeOneHotMap):
        table = env.next_cell_table()
        w = np.zeros((2, 100))
        for cell in range(GRID_N * GRID_N):
            for a in range(4):
                nxt = table[cell, a]
                w[:, 4 * cell + a] = cell_center(nxt // 5, nxt % 5)
        return w
    return None
