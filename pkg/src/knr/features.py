"""Feature maps phi(x, u) -> R^d_phi.

Three kinds ship: random Fourier features for a Gaussian kernel, the
5x5-grid one-hot map for the maze, and plain state-control concatenation
for linear-dynamics problems. Maps are immutable after construction and
evaluation is pure, so they are safe to share across threads.

Batched evaluation (`evaluate_batch`) takes (n, d_x) states and (n, d_u)
controls and returns (n, d_phi); the planner relies on it.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import RngStream

MAZE_GRID = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
MAZE_D_PHI = 100  # 25 cells x 4 action bins


class FeatureMap:
    """Base interface: kind, d_in, d_phi, evaluate, evaluate_batch."""

    kind = "abstract"

    def __init__(self, d_in: int, d_phi: int):
        self.d_in = d_in
        self.d_phi = d_phi

    def evaluate(self, x, u) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self.evaluate_batch(x[None, :], u[None, :])[0]

    def evaluate_batch(self, xs, us) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        """Config-file serializable parameters (enough to rebuild the map)."""
        return {"kind": self.kind, "d_phi": self.d_phi}


class RffMap(FeatureMap):
    """Random Fourier features: phi_i(z) = sqrt(2/d_phi) cos(w_i . z + b_i).

    Frequencies w_i ~ N(0, I / bandwidth^2), phases b_i ~ Uniform[0, 2pi).
    The implied kernel is exp(-||z1 - z2||^2 / (2 bandwidth^2)) and
    ||phi(z)||_2 <= sqrt(2) for every z.
    """

    kind = "rff"

    def __init__(self, frequencies: np.ndarray, phases: np.ndarray, bandwidth: float,
                 seed: int | None = None):
        d_phi, d_in = frequencies.shape
        super().__init__(d_in, d_phi)
        self.frequencies = frequencies
        self.phases = phases
        self.bandwidth = bandwidth
        self.seed = seed
        self._amp = math.sqrt(2.0 / d_phi)

    def evaluate_batch(self, xs, us):
        z = np.concatenate([np.asarray(xs, dtype=float), np.asarray(us, dtype=float)],
                           axis=1)
        return self._amp * np.cos(z @ self.frequencies.T + self.phases)

    def describe(self):
        return {"kind": self.kind, "number of features": self.d_phi,
                "RFF bandwidth": self.bandwidth, "d_in": self.d_in,
                "seed": self.seed}


def rff_new(d_in: int, d_phi: int, bandwidth: float, rng: RngStream) -> RffMap:
    """Draw a fresh RFF map; identical rng gives an identical map."""
    if d_phi < 1:
        raise ValueError(f"rff_new: d_phi must be >= 1, got {d_phi}")
    if bandwidth <= 0:
        raise ValueError(f"rff_new: bandwidth must be > 0, got {bandwidth}")
    freqs = rng.normal((d_phi, d_in)) / bandwidth
    phases = rng.uniform(0.0, 2.0 * math.pi, d_phi)
    return RffMap(freqs, phases, bandwidth)


def maze_state_bins(xs) -> np.ndarray:
    """Nearest-grid-point bin (0..4) per coordinate of (n, 2) states."""
    idx = np.rint((np.asarray(xs, dtype=float) + 1.0) / 0.5)
    return np.clip(idx, 0, 4).astype(np.int64)


def maze_action_bins(us) -> np.ndarray:
    """Action bin 0..3 from control value(s): clamp(ceil(2u), -1, 2) + 1."""
    u = np.asarray(us, dtype=float)
    return (np.clip(np.ceil(2.0 * u), -1, 2) + 1).astype(np.int64)


def maze_onehot_index(x, u) -> int:
    """Index of the hot entry for a single (state, control) pair."""
    x = np.asarray(x, dtype=float).reshape(2)
    if np.any(x < -1.0) or np.any(x > 1.0):
        raise ValueError(f"onehot_maze: state {x} outside [-1, 1]^2")
    uu = float(np.asarray(u).reshape(-1)[0])
    if uu < -1.0 or uu > 1.0:
        raise ValueError(f"onehot_maze: control {uu} outside [-1, 1]")
    bx, by = maze_state_bins(x[None, :])[0]
    cell = 5 * int(bx) + int(by)
    return 4 * cell + int(maze_action_bins(uu))


def onehot_maze(x, u) -> np.ndarray:
    """100-dim one-hot feature for the maze: 25 state cells x 4 action bins.

    The state cell bins each coordinate to the nearest point of
    {-1, -0.5, 0, 0.5, 1}; the action bin is clamp(ceil(2u), -1, 2)
    shifted to 0..3 (u = -1 ceils to -2, which the clamp folds into
    "move left" so all of [-1, 1] is covered).
    """
    phi = np.zeros(MAZE_D_PHI)
    phi[maze_onehot_index(x, u)] = 1.0
    return phi


class MazeOneHotMap(FeatureMap):
    kind = "onehot-maze"

    def __init__(self):
        super().__init__(d_in=3, d_phi=MAZE_D_PHI)

    def evaluate_batch(self, xs, us):
        xs = np.asarray(xs, dtype=float)
        us = np.asarray(us, dtype=float).reshape(len(xs))
        bins = maze_state_bins(xs)
        cells = 5 * bins[:, 0] + bins[:, 1]
        idx = 4 * cells + maze_action_bins(us)
        phi = np.zeros((len(xs), MAZE_D_PHI))
        phi[np.arange(len(xs)), idx] = 1.0
        return phi

    def evaluate(self, x, u):
        return onehot_maze(x, u)  # keeps the domain check on the scalar path

    def describe(self):
        return {"kind": self.kind, "number of features": MAZE_D_PHI}


def lqr_concat(x, u) -> np.ndarray:
    """phi(x, u) = [x; u] for linear dynamics."""
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    return np.concatenate([x, u])


class LqrConcatMap(FeatureMap):
    kind = "lqr-concat"

    def __init__(self, d_x: int, d_u: int):
        super().__init__(d_in=d_x + d_u, d_phi=d_x + d_u)
        self.d_x = d_x
        self.d_u = d_u

    def evaluate_batch(self, xs, us):
        return np.concatenate([np.asarray(xs, dtype=float),
                               np.asarray(us, dtype=float)], axis=1)

    def describe(self):
        return {"kind": self.kind, "d_x": self.d_x, "d_u": self.d_u}
