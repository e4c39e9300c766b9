"""Randomized fixed-rank approximation of PSD matrices, top-K eigenvalue
estimation, and computable certificates for the weighted approximation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import Array, MetricWeight, as_array, sym, sym_eig
from .errors import CholeskyFailure, IndexOutOfRange, InvalidSketchSize

__all__ = [
    "SketchConfig",
    "LowRankPsd",
    "nystrom_fixed_rank",
    "top_k_spectrum",
    "eigenvalue_error_bound",
    "gles_error_bound",
]


@dataclass(frozen=True)
class SketchConfig:
    """Sketch width, target rank, and the seed of the counter-based generator.

    The error bound's denominator needs num_random_vectors >= rank + 2.
    """

    num_random_vectors: int
    rank: int
    seed: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.num_random_vectors < self.rank + 2:
            raise InvalidSketchSize(
                f"need num_random_vectors >= rank + 2, got "
                f"{self.num_random_vectors} for rank {self.rank}"
            )


@dataclass(frozen=True, eq=False)
class LowRankPsd:
    """Rank-K PSD approximation A_hat = F F^T held in factored form."""

    factors: Array
    rank: int
    shift_used: float

    def matrix(self) -> Array:
        return self.factors @ self.factors.T

    def eigenvalues(self) -> Array:
        """The K leading eigenvalue estimates, descending."""
        s = np.linalg.svd(self.factors, compute_uv=False)
        lam = np.zeros(self.rank)
        lam[: s.size] = s * s
        return lam


def nystrom_fixed_rank(a, cfg: SketchConfig) -> LowRankPsd:
    """Stabilized fixed-rank PSD sketch: Y = A G with Gaussian G, shift
    nu = eps * ||Y||_2, core Cholesky of G^T (Y + nu G), rank-K truncation of
    the factor's SVD, and shift removal from the squared singular values.

    Deterministic for a given seed (counter-based Philox stream); the shift
    doubles on Cholesky failure and escalates after three doublings.
    """
    arr = as_array(a)
    n = arr.shape[0]
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    g = rng.standard_normal((n, cfg.num_random_vectors))
    y = arr @ g
    nu = float(np.finfo(np.float64).eps) * float(np.linalg.norm(y, 2))
    nu = max(nu, np.finfo(np.float64).tiny)
    chol = None
    for _ in range(4):
        y_nu = y + nu * g
        core = sym(g.T @ y_nu)
        try:
            chol = np.linalg.cholesky(core)
            break
        except np.linalg.LinAlgError:
            nu *= 2.0
    if chol is not None:
        b = scipy.linalg.solve_triangular(chol, y_nu.T, lower=True).T
    else:
        # a sketch wider than the matrix leaves the core rank-deficient no
        # matter the shift; apply the core's pseudo-inverse root instead
        w, v = np.linalg.eigh(core)
        keep = w > np.finfo(np.float64).eps * max(float(w.max()), 1.0)
        if not np.any(keep):
            raise CholeskyFailure(
                f"sketch core numerically zero after 3 shift doublings (nu={nu:.3e})"
            )
        inv_root = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
        b = y_nu @ (v * inv_root[None, :])
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    k = cfg.rank
    lam = np.maximum(s[:k] ** 2 - nu, 0.0)
    factors = u[:, :k] * np.sqrt(lam)[None, :]
    return LowRankPsd(factors=factors, rank=k, shift_used=nu)


def top_k_spectrum(a, k: int, method: str = "exact", sketch: SketchConfig | None = None) -> Array:
    """K leading eigenvalues, descending; exact eigensolve or Nystrom sketch."""
    arr = as_array(a)
    if k > arr.shape[0] or k < 1:
        raise IndexOutOfRange(f"need 1 <= K <= {arr.shape[0]}, got {k}")
    if method == "exact":
        return sym_eig(arr).eigenvalues[:k].copy()
    if method == "nystrom":
        if sketch is None:
            raise ValueError("nystrom method needs a SketchConfig")
        if sketch.rank < k:
            raise IndexOutOfRange(f"sketch rank {sketch.rank} below requested K={k}")
        return nystrom_fixed_rank(arr, sketch).eigenvalues()[:k]
    raise ValueError(f"unknown method {method!r}")


def _tail_bracket(tail: Array, k: int, m: int) -> float:
    if m <= k + 1:
        raise InvalidSketchSize(f"need M > K + 1, got M={m}, K={k}")
    if tail.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(tail * tail)) + k / (m - k - 1) * np.sum(tail))


def eigenvalue_error_bound(tail, k: int, m: int, weights: MetricWeight) -> float:
    """Expected weighted top-K eigenvalue error bound of the rank-K sketch:

    (sum_{i<=K} 1/(omega_i + rho)) * [ (sum_{i>K} l_i^2)^{1/2}
                                       + K/(M-K-1) * sum_{i>K} l_i ].
    """
    tail_arr = np.asarray(tail, dtype=np.float64)
    if weights.is_full:
        raise ValueError("eigenvalue_error_bound takes the diagonal weight form")
    if weights.omega.size < k:
        raise IndexOutOfRange(f"weights carry {weights.omega.size} entries, need {k}")
    inv_w_sum = float(np.sum(1.0 / (weights.omega[:k] + weights.rho)))
    return inv_w_sum * _tail_bracket(tail_arr, k, m)


def gles_error_bound(
    lambda_k: float,
    delta: float,
    omega_k: float,
    rho: float,
    tail,
    weights_tail,
    k: int,
    m: int,
) -> float:
    """Log-spectrum error bound of the rank-K sketch:

    1.5/(l_K + delta) * 1/(omega_K + rho) * alpha, with
    alpha = [ (sum_{i>K} 1/(omega_i + rho)^2) * bracket(tail) ]^{1/2};

    zero for an empty tail, and decreasing in both rho and delta.
    """
    tail_arr = np.asarray(tail, dtype=np.float64)
    w_tail = np.asarray(weights_tail, dtype=np.float64)
    bracket = _tail_bracket(tail_arr, k, m)
    inv_sq = float(np.sum(1.0 / (w_tail + rho) ** 2)) if w_tail.size else 0.0
    alpha = float(np.sqrt(inv_sq * bracket))
    return 1.5 / (lambda_k + delta) / (omega_k + rho) * alpha
