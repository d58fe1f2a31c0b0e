"""Numerical verification of the concentration and simulation bounds.

Each check_* function runs a closed-form comparison or a Monte-Carlo
inequality experiment and returns a LemmaCheckResult. The checks use
plain numpy linear algebra (slogdet, eigvalsh) on purpose: they are a
second opinion on quantities the model module computes with its own
Cholesky kernels, so the two paths share no code.

Monte-Carlo inequality checks allow a 3-standard-error slack; an
excursion inside that slack is inconclusive sampling noise, not a
violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import RngStream


@dataclass(frozen=True)
class RunTrace:
    """Feature history of a completed run, episode by episode.

    Parameters
    ----------
    lam : float
        Ridge prior parameter; the pre-data covariance is lam * I.
    phi_episodes : tuple of ndarray
        One (steps, d_phi) array per episode, in execution order.
    """

    lam: float
    phi_episodes: tuple

    @property
    def d_phi(self) -> int:
        return self.phi_episodes[0].shape[1] if self.phi_episodes else 0


@dataclass(frozen=True)
class LemmaCheckResult:
    """Outcome of one lemma check.

    max_slack is the smallest rhs - lhs margin seen anywhere in the check
    (negative means the bound was crossed at least once); tolerance is the
    allowed violation fraction, 0.0 for checks that permit none.
    """

    lemma: str
    trials: int
    violations: int
    max_slack: float
    tolerance: float

    @property
    def passed(self) -> bool:
        if self.trials == 0:
            return self.violations == 0
        return self.violations <= self.tolerance * self.trials + 1e-9

    def line(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return (f"{self.lemma:<18} trials={self.trials:<5d} "
                f"violations={self.violations:<4d} "
                f"worst_margin={self.max_slack:+.4e} "
                f"allowed_rate={self.tolerance:.4f}  {verdict}")


# ------------------------------------------------------- chi-squared form

def chi2_gaussian(mu1, mu2, sigma: float) -> float:
    """Chi-squared divergence between N(mu1, sigma^2 I) and N(mu2, sigma^2 I):
    exp(||mu1 - mu2||^2 / sigma^2) - 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = np.asarray(mu1, dtype=float).ravel() - np.asarray(mu2, dtype=float).ravel()
    return float(math.expm1(float(d @ d) / sigma**2))


def chi2_quadrature_1d(mu1: float, mu2: float, sigma: float,
                       lo: float = -12.0, hi: float = 12.0,
                       step: float = 1e-3) -> float:
    """Trapezoid quadrature of the 1-D chi-squared integral
    int (n1 - n2)^2 / n1 dz, for validating the closed form."""
    z = np.arange(lo, hi + step / 2.0, step)
    n1 = np.exp(-((z - mu1) ** 2) / (2.0 * sigma**2))
    n2 = np.exp(-((z - mu2) ** 2) / (2.0 * sigma**2))
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    # far tails underflow both densities to zero together; their true
    # contribution is negligible, so drop those points instead of 0/0
    integrand = np.where(n1 > 0.0, (n1 - n2) ** 2 / np.where(n1 > 0.0, n1, 1.0), 0.0)
    return float(np.trapezoid(norm * integrand, dx=step))


def check_chi2(cases=None, rtol: float = 1e-5) -> LemmaCheckResult:
    """Compare the closed form against quadrature on a pinned case grid."""
    if cases is None:
        cases = [(0.0, 1.0, 1.0), (0.0, 0.0, 1.0), (0.3, -0.4, 0.5),
                 (-1.0, 2.0, 1.5), (0.0, 3.0, 1.0), (2.0, 2.5, 0.25)]
    violations = 0
    worst = math.inf
    for mu1, mu2, sigma in cases:
        closed = chi2_gaussian([mu1], [mu2], sigma)
        span = 12.0 * max(sigma, 1.0) + abs(mu1) + abs(mu2)
        quad = chi2_quadrature_1d(mu1, mu2, sigma, -span, span)
        err = abs(closed - quad) / max(1.0, abs(closed))
        worst = min(worst, rtol - err)
        if err > rtol:
            violations += 1
    return LemmaCheckResult("chi2", len(cases), violations, worst, 0.0)


# -------------------------------------------- expectation-difference bound

def check_mean_difference(mu1, mu2, sigma: float, g: Callable,
                          n_mc: int, rng: RngStream) -> LemmaCheckResult:
    """Monte-Carlo check of E1[g] - E2[g] <= min{||mu1-mu2||/sigma, 1} sqrt(E1[g^2])
    for a non-negative test function g on batches (n, d)."""
    mu1 = np.asarray(mu1, dtype=float).ravel()
    mu2 = np.asarray(mu2, dtype=float).ravel()
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if mu1.shape != mu2.shape:
        raise ValueError("mu1 and mu2 must have the same dimension")
    z1 = mu1 + sigma * rng.normal((n_mc, mu1.size))
    z2 = mu2 + sigma * rng.normal((n_mc, mu2.size))
    g1 = np.asarray(g(z1), dtype=float)
    g2 = np.asarray(g(z2), dtype=float)
    if np.any(g1 < 0) or np.any(g2 < 0):
        raise ValueError("test function must be non-negative on the sampled support")
    lhs = float(g1.mean() - g2.mean())
    se_lhs = math.sqrt(g1.var(ddof=1) / n_mc + g2.var(ddof=1) / n_mc)
    m2 = float((g1**2).mean())
    root = math.sqrt(m2)
    se_root = float((g1**2).std(ddof=1)) / math.sqrt(n_mc) / (2.0 * root) if root > 0 else 0.0
    ratio = min(float(np.linalg.norm(mu1 - mu2)) / sigma, 1.0)
    rhs = ratio * root
    slack = rhs - lhs
    violation = 1 if lhs > rhs + 3.0 * (se_lhs + ratio * se_root) else 0
    return LemmaCheckResult("mean-difference", 1, violation, slack, 0.0)


# ------------------------------------------------- information-gain bound

def info_gain_bound(d: int, n_vectors: int, b: float, lam: float) -> float:
    """Worst-case log-det ratio for n_vectors features of norm <= b in
    dimension d with prior lam I: d * log(1 + n b^2 / (d lam))."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n_vectors < 0:
        raise ValueError(f"n_vectors must be >= 0, got {n_vectors}")
    if b <= 0 or lam <= 0:
        raise ValueError("b and lam must be positive")
    return float(d * math.log1p(n_vectors * b * b / (d * lam)))


def realized_info_gain(lam: float, phis: np.ndarray) -> float:
    """log det(lam I + sum phi phi^T) - log det(lam I) for rows phis."""
    d = phis.shape[1]
    prior = lam * np.eye(d)
    return float(np.linalg.slogdet(prior + phis.T @ phis)[1]
                 - np.linalg.slogdet(prior)[1])


def check_info_gain_bound(n_sequences: int, rng: RngStream) -> LemmaCheckResult:
    """Random bounded feature sequences never exceed the closed-form bound."""
    violations = 0
    worst = math.inf
    for k in range(n_sequences):
        stream = rng.offset(k)
        d = int(stream.integers(1, 7))
        n = int(stream.integers(0, 81))
        b = float(stream.uniform(0.1, 3.0))
        lam = float(stream.uniform(0.05, 5.0))
        phis = stream.normal((n, d))
        if n > 0:
            norms = np.linalg.norm(phis, axis=1, keepdims=True)
            # scale into the ball of radius b, some rows on the boundary
            phis = phis / np.maximum(norms / b, 1.0)
            phis[:: max(n // 3, 1)] *= b / np.maximum(
                np.linalg.norm(phis[:: max(n // 3, 1)], axis=1, keepdims=True), 1e-300)
        realized = realized_info_gain(lam, phis.reshape(n, d))
        bound = info_gain_bound(d, n, b, lam)
        slack = bound - realized
        worst = min(worst, slack)
        if realized > bound + 1e-10:
            violations += 1
    return LemmaCheckResult("info-gain", n_sequences, violations, worst, 0.0)


# ------------------------------------------------------ potential function

def check_potential_sum(trace: RunTrace) -> LemmaCheckResult:
    """Sum over episodes of min{sum_h phi^T (pre-episode cov)^-1 phi, 1}
    is at most twice the total log-det ratio."""
    lhs = 0.0
    rhs = 0.0
    if trace.phi_episodes:
        d = trace.d_phi
        cov = trace.lam * np.eye(d)
        logdet0 = float(np.linalg.slogdet(cov)[1])
        for phis in trace.phi_episodes:
            phis = np.asarray(phis, dtype=float)
            sol = np.linalg.solve(cov, phis.T)
            lhs += min(float(np.einsum("hd,dh->", phis, sol)), 1.0)
            cov = cov + phis.T @ phis
            cov = (cov + cov.T) / 2.0
        rhs = 2.0 * (float(np.linalg.slogdet(cov)[1]) - logdet0)
    slack = rhs - lhs
    violation = 1 if lhs > rhs + 1e-8 else 0
    return LemmaCheckResult("potential-sum", 1, violation, slack, 0.0)


def gamma2_statistic(trace: RunTrace) -> float:
    """Squared realized log-det ratio of the trace."""
    if not trace.phi_episodes:
        return 0.0
    gain = realized_info_gain(trace.lam,
                              np.concatenate([np.asarray(p, dtype=float)
                                              for p in trace.phi_episodes]))
    return gain * gain


# ------------------------------------------- self-normalized martingale

def _adapted_vector(d: int, i: int, past_sum: np.ndarray) -> np.ndarray:
    """Bounded (norm <= 1) regressor depending only on past noise: half a
    rotating basis vector plus half the normalized running noise sum."""
    x = np.zeros(d)
    x[i % d] = 0.5
    m = min(d, past_sum.size)
    x[:m] += 0.5 * past_sum[:m] / (np.linalg.norm(past_sum) + 1.0)
    return x


def check_self_normalized(d: int, d_x: int, n_steps: int, sigma: float,
                          delta: float, trials: int,
                          rng: RngStream) -> LemmaCheckResult:
    """Empirical failure frequency of the time-uniform bound

        ||sum_i eps_i x_i^T V_t^{-1/2}||_2^2
            <= 8 sigma^2 (d_x log 5 + log(1/delta) + (1/2) log det(V_t)/det(V))

    with V = I, noise rows eps_i ~ N(0, sigma^2 I), and adapted bounded
    regressors x_i. A trial fails if the bound is crossed at any step; the
    failure rate must stay within delta plus binomial noise.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if d < 1 or d_x < 1 or n_steps < 1 or trials < 1:
        raise ValueError("d, d_x, n_steps, trials must all be >= 1")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    base = 8.0 * sigma**2 * (d_x * math.log(5.0) + math.log(1.0 / delta))
    violations = 0
    worst = math.inf
    for k in range(trials):
        eps = sigma * rng.offset(k).normal((n_steps, d_x))
        s = np.zeros((d_x, d))
        v = np.eye(d)
        past = np.zeros(d_x)
        failed = False
        for i in range(n_steps):
            x = _adapted_vector(d, i, past)
            s += np.outer(eps[i], x)
            v += np.outer(x, x)
            past = past + eps[i]
            lhs = float(np.linalg.eigvalsh(s @ np.linalg.solve(v, s.T))[-1])
            rhs = base + 4.0 * sigma**2 * float(np.linalg.slogdet(v)[1])
            worst = min(worst, rhs - lhs)
            if lhs > rhs:
                failed = True
        if failed:
            violations += 1
    tol = delta + 3.0 * math.sqrt(delta * (1.0 - delta) / trials)
    return LemmaCheckResult("self-normalized", trials, violations, worst, tol)


# --------------------------------------------------- simulation inequality

def check_simulation_lemma(env, w, cost: Callable, n_mc: int, rng: RngStream,
                           policy: Callable | None = None) -> LemmaCheckResult:
    """Monte-Carlo check that the cost gap between the true model and an
    alternative weight matrix w is covered by

        sqrt(H * E[(sum_h c_h)^2]) * sqrt(E[sum_h min{||(W* - w) phi_h||^2 / sigma^2, 1}])

    with both expectations under the true dynamics. The policy sees a batch
    of states (n, d_x) and returns controls (n, d_u); default is zero input.
    Rollouts under both models share noise draws, which tightens the LHS
    standard error without biasing either expectation.
    """
    from .envs import LqrEnv

    if not isinstance(env, LqrEnv):
        raise TypeError("simulation-lemma check needs an LqrEnv-like true model")
    if env.sigma <= 0:
        raise ValueError("simulation-lemma check needs sigma > 0")
    w_star = np.concatenate([env.a_mat, env.b_mat], axis=1)
    w = np.asarray(w, dtype=float)
    if w.shape != w_star.shape:
        raise ValueError(f"w has shape {w.shape}, expected {w_star.shape}")
    d_x, d_u = env.d_x, env.d_u
    if policy is None:
        policy = lambda x, h: np.zeros((x.shape[0], d_u))
    delta_w = w_star - w
    x_true = np.tile(env.x0_vec, (n_mc, 1))
    x_alt = x_true.copy()
    total_true = np.zeros(n_mc)
    total_alt = np.zeros(n_mc)
    msum = np.zeros(n_mc)
    for h in range(env.horizon):
        u_true = policy(x_true, h)
        u_alt = policy(x_alt, h)
        c_true = np.asarray(cost(x_true, u_true, h), dtype=float)
        if np.any(c_true < 0) or np.any(np.asarray(cost(x_alt, u_alt, h)) < 0):
            raise ValueError("cost must be non-negative")
        total_true += c_true
        total_alt += np.asarray(cost(x_alt, u_alt, h), dtype=float)
        phi_true = np.concatenate([x_true, u_true], axis=1)
        phi_alt = np.concatenate([x_alt, u_alt], axis=1)
        dev = phi_true @ delta_w.T
        msum += np.minimum(np.einsum("ni,ni->n", dev, dev) / env.sigma**2, 1.0)
        noise = env.sigma * rng.offset(h).normal((n_mc, d_x))
        x_true = phi_true @ w_star.T + noise
        x_alt = phi_alt @ w.T + noise
    lhs = float(total_true.mean() - total_alt.mean())
    se_lhs = float((total_true - total_alt).std(ddof=1)) / math.sqrt(n_mc)
    sq = total_true**2
    rhs1 = env.horizon * float(sq.mean())
    se1 = env.horizon * float(sq.std(ddof=1)) / math.sqrt(n_mc)
    rhs2 = float(msum.mean())
    se2 = float(msum.std(ddof=1)) / math.sqrt(n_mc)
    rhs = math.sqrt(rhs1 * rhs2)
    se_rhs = (math.sqrt((rhs2 * se1) ** 2 + (rhs1 * se2) ** 2) / (2.0 * rhs)
              if rhs > 0 else 0.0)
    slack = rhs - lhs
    violation = 1 if lhs > rhs + 3.0 * (se_lhs + se_rhs) else 0
    return LemmaCheckResult("simulation-lemma", 1, violation, slack, 0.0)
