"""Online ridge estimator for linearly-featurized dynamics.

The estimator ingests transitions (phi, x_next) episode by episode and
maintains

    cov  = lambda I + sum phi phi^T          (feature covariance)
    xphi = sum x_next phi^T
    wbar = xphi @ inv(cov)                   (ridge center)

together with the log-determinant bookkeeping that the confidence radius
and information gain are built from. Updates are serialized by the caller
(single writer); `copy()` gives an immutable-in-practice snapshot for
concurrent readers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import RngStream, chol_solve, cholesky, log_det_spd, spectral_norm

CHECKPOINT_VERSION = "knr-model/1"


@dataclass
class BallSpec:
    """Confidence-ball parameters: radius beta, its form, and the main-text
    multiplier c1 (unused by the appendix form)."""

    beta: float
    form: str = "appendix"  # "appendix" | "main-text"
    c1: float = 16.0


class KnrModel:
    """Ridge-regression dynamics estimator with confidence-ball geometry.

    Parameters
    ----------
    d_x : int
        State dimension (rows of the weight matrix).
    d_phi : int
        Feature dimension.
    lam : float
        Ridge regularizer; the prior covariance is lam * I.
    sigma : float
        Assumed process-noise standard deviation.
    """

    def __init__(self, d_x: int, d_phi: int, lam: float, sigma: float):
        if lam <= 0:
            raise ValueError(f"lambda must be > 0, got {lam}")
        if sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {sigma}")
        self.d_x = d_x
        self.d_phi = d_phi
        self.lam = float(lam)
        self.sigma = float(sigma)
        self.wbar = np.zeros((d_x, d_phi))
        self.cov = lam * np.eye(d_phi)
        self.xphi = np.zeros((d_x, d_phi))
        self.n_transitions = 0
        self.n_episodes = 0
        # log det of the prior cov; computed through log_det_spd so a fresh
        # model's information gain is exactly zero
        self.logdet0 = log_det_spd(self.cov)
        self._chol = None  # cached lower factor of cov

    # ------------------------------------------------------------- basics

    def copy(self) -> "KnrModel":
        m = KnrModel(self.d_x, self.d_phi, self.lam, self.sigma)
        m.wbar = self.wbar.copy()
        m.cov = self.cov.copy()
        m.xphi = self.xphi.copy()
        m.n_transitions = self.n_transitions
        m.n_episodes = self.n_episodes
        return m

    def chol(self) -> np.ndarray:
        """Lower Cholesky factor of cov (cached until the next update)."""
        if self._chol is None:
            self._chol = cholesky(self.cov)
        return self._chol

    # ------------------------------------------------------------- update

    def update_episode(self, transitions) -> "KnrModel":
        """Ingest one episode's list of (phi, x_next) pairs.

        The covariance and cross-moment accumulate; the center is re-solved
        from scratch via Cholesky, so the result matches a one-shot batch
        solve on all data seen so far.
        """
        for phi, x_next in transitions:
            phi = np.asarray(phi, dtype=float)
            x_next = np.asarray(x_next, dtype=float)
            if phi.shape != (self.d_phi,):
                raise ValueError(
                    f"transition phi has shape {phi.shape}, expected ({self.d_phi},)")
            if x_next.shape != (self.d_x,):
                raise ValueError(
                    f"transition x_next has shape {x_next.shape}, expected ({self.d_x},)")
            self.cov += np.outer(phi, phi)
            self.xphi += np.outer(x_next, phi)
            self.n_transitions += 1
        self.cov = (self.cov + self.cov.T) / 2.0
        self._chol = None
        self.wbar = chol_solve(self.chol(), self.xphi.T).T
        self.n_episodes += 1
        return self

    # -------------------------------------------------------- predictions

    def mean_next(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.d_phi,):
            raise ValueError(f"phi has shape {phi.shape}, expected ({self.d_phi},)")
        return self.wbar @ phi

    # --------------------------------------------------------- confidence

    def beta_appendix(self, w_star_norm_bound: float, t: int) -> float:
        """Fully explicit confidence radius at episode count t >= 1:

        2 lam bound^2 + 8 sigma^2 (d_x log 5 + 2 log t + log 4 + logdet-ratio)
        """
        if t < 1:
            raise ValueError("beta_appendix needs t >= 1; the t=0 ball is the "
                             "initialization ball (beta = +inf)")
        ratio = log_det_spd(self.cov) - self.logdet0
        return (2.0 * self.lam * w_star_norm_bound**2
                + 8.0 * self.sigma**2 * (self.d_x * math.log(5.0)
                                         + 2.0 * math.log(t)
                                         + math.log(4.0) + ratio))

    def beta_main(self, c1: float, t: int) -> float:
        """Main-text radius c1 (lam sigma^2 + sigma^2 (d_x + log t + logdet-ratio)).

        The log(t * det-ratio) in the displayed form is log t + log det-ratio.
        """
        if t < 1:
            raise ValueError("beta_main needs t >= 1")
        ratio = log_det_spd(self.cov) - self.logdet0
        return c1 * (self.lam * self.sigma**2
                     + self.sigma**2 * (self.d_x + math.log(t) + ratio))

    def ball_contains(self, spec: BallSpec, w) -> bool:
        """Membership test ||(w - wbar) @ L||_2^2 <= beta with L the lower
        Cholesky factor of cov (an exact square root for this quadratic form)."""
        if math.isinf(spec.beta):
            return True
        w = np.asarray(w, dtype=float)
        if w.shape != (self.d_x, self.d_phi):
            raise ValueError(f"w has shape {w.shape}, expected "
                             f"({self.d_x}, {self.d_phi})")
        dev = spectral_norm((w - self.wbar) @ self.chol())
        return dev * dev <= spec.beta

    def thompson_sample(self, reshape_scale: float, rng: RngStream) -> np.ndarray:
        """Draw W with i.i.d. rows N(wbar_row, reshape_scale * inv(cov)).

        reshape_scale = 0 returns wbar exactly (no draws consumed).
        Row construction: wbar_row + sqrt(scale) * solve(L.T, g), g ~ N(0, I),
        whose covariance is inv(L).T inv(L) = inv(cov).
        """
        if reshape_scale < 0:
            raise ValueError(f"reshape_scale must be >= 0, got {reshape_scale}")
        if reshape_scale == 0.0:
            return self.wbar.copy()
        g = rng.normal((self.d_x, self.d_phi))
        dev = np.linalg.solve(self.chol().T, g.T).T
        return self.wbar + math.sqrt(reshape_scale) * dev

    def information_gain(self) -> float:
        """Realized log(det cov / det (lam I)); zero for a fresh model."""
        return log_det_spd(self.cov) - self.logdet0


def model_new(d_x: int, d_phi: int, lam: float, sigma: float) -> KnrModel:
    return KnrModel(d_x, d_phi, lam, sigma)


# ------------------------------------------------------------- checkpoints

def save_checkpoint(model: KnrModel, path) -> None:
    """Binary checkpoint; float64 arrays round-trip bit exactly."""
    np.savez(path,
             version=np.array(CHECKPOINT_VERSION),
             d_x=np.array(model.d_x), d_phi=np.array(model.d_phi),
             lam=np.array(model.lam), sigma=np.array(model.sigma),
             wbar=model.wbar, cov=model.cov, xphi=model.xphi,
             n_transitions=np.array(model.n_transitions),
             n_episodes=np.array(model.n_episodes))


def load_checkpoint(path) -> KnrModel:
    with np.load(path) as data:
        version = str(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version!r}, "
                             f"expected {CHECKPOINT_VERSION!r}")
        m = KnrModel(int(data["d_x"]), int(data["d_phi"]),
                     float(data["lam"]), float(data["sigma"]))
        m.wbar = data["wbar"].copy()
        m.cov = data["cov"].copy()
        m.xphi = data["xphi"].copy()
        m.n_transitions = int(data["n_transitions"])
        m.n_episodes = int(data["n_episodes"])
    return m
