"""Dense linear-algebra kernels and seeded random streams.

Everything is float64. All functions are pure; RngStream is the only
stateful object and is cheap to construct, so the rest of the package
makes a fresh stream per use site instead of threading generator state
around. Identical (seed, stream_id) pairs reproduce identical draw
sequences on every platform and thread count (Philox is counter based).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """A named, reproducible random substream.

    Parameters
    ----------
    seed : int
        Experiment-level seed (64-bit).
    stream_id : int
        Which substream of the experiment this is (64-bit). Distinct
        stream ids give statistically independent streams.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = self.seed | (self.stream_id << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def offset(self, k: int) -> "RngStream":
        """Fresh stream with stream_id shifted by k (for per-sample streams)."""
        return RngStream(self.seed, self.stream_id + k)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


class NotPositiveDefiniteError(ValueError):
    """Raised by cholesky when a pivot is non-positive."""

    def __init__(self, pivot: int, value: float):
        self.pivot = pivot
        self.value = value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot} is {value:.6e}"
        )


def cholesky(m) -> np.ndarray:
    """Lower-triangular L with L @ L.T == m for symmetric positive-definite m.

    Column-by-column factorization with vectorized updates. Input symmetry
    is required within 1e-10 relative tolerance; the average (m + m.T)/2 is
    factored so tiny asymmetries cannot leak into the result.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"cholesky needs a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if not np.all(np.isfinite(a)):
        raise ValueError("cholesky: matrix has non-finite entries")
    if float(np.max(np.abs(a - a.T), initial=0.0)) > 1e-10 * scale:
        raise ValueError("cholesky: matrix is not symmetric")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        d = a[j, j] - L[j, :j] @ L[j, :j]
        if not (d > 0.0) or not np.isfinite(d):
            raise NotPositiveDefiniteError(j, float(d))
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def chol_solve(L: np.ndarray, b) -> np.ndarray:
    """Solve (L @ L.T) x = b given the lower Cholesky factor L.

    b may be a vector or a matrix of stacked right-hand-side columns.
    """
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def log_det_spd(m) -> float:
    """log determinant of a symmetric positive-definite matrix.

    Computed as 2 * sum(log diag(cholesky(m))), which is stable for the
    well-conditioned covariances used here.
    """
    return 2.0 * float(np.sum(np.log(np.diag(cholesky(m)))))


def _power_iterate(g: np.ndarray, v0: np.ndarray, tol: float, max_iter: int):
    """Top eigenvalue estimate of PSD g from start v0; None if v0 collapses."""
    nv = np.linalg.norm(v0)
    if nv == 0.0:
        return None
    v = v0 / nv
    lam_prev = 0.0
    for _ in range(max_iter):
        w = g @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v is (numerically) in the null space of g
            return None
        v = w / nw
        lam = float(v @ (g @ v))
        if abs(lam - lam_prev) <= tol * max(abs(lam), 1e-300):
            return lam
        lam_prev = lam
    return lam_prev


def spectral_norm(m, tol: float = 1e-9) -> float:
    """Largest singular value via power iteration on m @ m.T.

    Deterministic all-ones start vector, iteration cap 10000. If the
    all-ones start collapses (it can be annihilated by g or orthogonal to
    the top eigenspace), deterministic basis starts e_i are tried and the
    max estimate over them is returned; the top eigenvector has a nonzero
    coordinate somewhere, so some e_i always converges to it.
    """
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.size == 0:
        return 0.0
    if not np.any(a):
        return 0.0
    g = a @ a.T
    n = g.shape[0]
    lam = _power_iterate(g, np.ones(n), tol, 10000)
    if lam is None:
        best = 0.0
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            est = _power_iterate(g, e, tol, 10000)
            if est is not None:
                best = max(best, est)
        lam = best
    return float(np.sqrt(max(lam, 0.0)))


def gauss_vector(rng: RngStream, dim: int, std: float) -> np.ndarray:
    """i.i.d. N(0, std^2) vector of length dim; std=0 is an exact zero vector
    (and consumes no draws)."""
    if dim < 1:
        raise ValueError(f"gauss_vector: dim must be >= 1, got {dim}")
    if std < 0:
        raise ValueError(f"gauss_vector: std must be >= 0, got {std}")
    if std == 0.0:
        return np.zeros(dim)
    return std * rng.normal(dim)
