"""SPD matrix substrate: eigendecomposition, matrix functions, polar factors,
and the (extended) Mahalanobis norms every distance is built on.

All types are immutable after construction and all operations are pure
functions, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotSymmetric,
    RankDeficient,
    SingularMatrix,
)

Array = np.ndarray

SYMMETRY_RTOL = 1e-12
DEFAULT_PSD_TOL = 1e-10


def sym(a: Array) -> Array:
    """Symmetric part (A + A^T) / 2."""
    return 0.5 * (a + a.T)


def as_array(a) -> Array:
    """Accept an SpdMatrix or a raw ndarray and return a float64 ndarray."""
    if isinstance(a, SpdMatrix):
        return a.entries
    return np.asarray(a, dtype=np.float64)


def check_symmetric(a: Array, rtol: float = SYMMETRY_RTOL) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = np.maximum(1.0, np.abs(a))
    if not np.all(np.abs(a - a.T) <= rtol * scale):
        worst = np.abs(a - a.T).max()
        raise NotSymmetric(f"matrix is not symmetric (max asymmetry {worst:.3e})")


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """Dense symmetric positive semidefinite matrix with validated invariants.

    Eigenvalues down to ``-psd_tolerance * max(1, ||A||_2)`` are accepted
    (diffusion operators are PSD only up to floating-point error); consumers
    clip negatives to zero.
    """

    entries: Array
    psd_tolerance: float = DEFAULT_PSD_TOL
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        entries = np.array(as_array(self.entries), dtype=np.float64, copy=True)
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        if self.psd_tolerance < 0:
            raise ValueError("psd_tolerance must be nonnegative")
        if self.validate:
            check_symmetric(entries)
            w = np.linalg.eigvalsh(sym(entries))
            floor = -self.psd_tolerance * max(1.0, float(np.abs(w).max()))
            if w.min() < floor:
                raise SingularMatrix(
                    f"matrix is not PSD: min eigenvalue {w.min():.3e} below {floor:.3e}"
                )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(sym(self.entries)).min())


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted descending with the paired orthonormal eigenvectors
    as columns."""

    eigenvalues: Array
    eigenvectors: Array

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        vec = np.asarray(self.eigenvectors, dtype=np.float64)
        lam.flags.writeable = False
        vec.flags.writeable = False
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vec)
        if np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be sorted descending")

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]

    def reconstruct(self) -> Array:
        v = self.eigenvectors
        return v @ (self.eigenvalues[:, None] * v.T)


@dataclass(frozen=True, eq=False)
class ExtendedOperator:
    """Truncated spectrum plus a scalar shift: the computational stand-in for
    a positive definite unitized operator A + shift * I.

    ``ambient_dim=None`` marks an unbounded ambient space.
    """

    spectrum: Spectrum
    shift: float
    ambient_dim: int | None = None

    def __post_init__(self):
        if self.shift < 0:
            raise ValueError("shift must be nonnegative")
        lam = self.spectrum.eigenvalues
        if np.any(lam + self.shift <= 0):
            raise ValueError("every retained eigenvalue plus shift must be positive")
        if self.ambient_dim is not None and lam.size > self.ambient_dim:
            raise DimensionMismatch(
                f"truncation {lam.size} exceeds ambient dimension {self.ambient_dim}"
            )

    @property
    def truncation(self) -> int:
        return self.spectrum.eigenvalues.size

    @classmethod
    def from_matrix(cls, a, k: int, shift: float = 0.0) -> "ExtendedOperator":
        """Top-k truncation of a symmetric matrix plus a scalar shift."""
        spec = sym_eig(as_array(a))
        trunc = Spectrum(spec.eigenvalues[:k], spec.eigenvectors[:, :k])
        return cls(spectrum=trunc, shift=shift, ambient_dim=spec.dim)


@dataclass(frozen=True, eq=False)
class MetricWeight:
    """Mahalanobis weight: a full SPD matrix M or a diagonal eigenvalue vector
    omega (rank-paired with the data spectrum), plus the regularizer rho.

    The weight enters every formula through the inverse (M + rho I)^{-1};
    rho = 0 is allowed only in the full finite-dimensional form.
    """

    matrix: SpdMatrix | None = None
    omega: Array | None = None
    rho: float = 0.0

    def __post_init__(self):
        if (self.matrix is None) == (self.omega is None):
            raise ValueError("exactly one of matrix / omega must be given")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.omega is not None:
            om = np.asarray(self.omega, dtype=np.float64)
            om.flags.writeable = False
            object.__setattr__(self, "omega", om)
            if np.any(om < 0) or np.any(om + self.rho <= 0):
                raise ValueError("omega must be nonnegative with omega + rho > 0")
        elif self.rho == 0 and self.matrix.min_eigenvalue() <= self.matrix.psd_tolerance:
            raise SingularMatrix("full weight with rho = 0 must be strictly PD")

    @classmethod
    def full(cls, m, rho: float = 0.0) -> "MetricWeight":
        if not isinstance(m, SpdMatrix):
            m = SpdMatrix(m)
        return cls(matrix=m, rho=rho)

    @classmethod
    def diagonal(cls, omega, rho: float) -> "MetricWeight":
        return cls(omega=omega, rho=rho)

    @classmethod
    def identity(cls, dim: int) -> "MetricWeight":
        return cls.full(np.eye(dim))

    @property
    def is_full(self) -> bool:
        return self.matrix is not None

    def inverse_matrix(self, dim: int) -> Array:
        """Dense (M + rho I)^{-1}.

        The diagonal form materializes diag(1 / (omega_i + rho)) in the
        rank-paired basis; callers must present data in that basis.
        """
        if self.is_full:
            m = self.matrix.entries
            if m.shape[0] != dim:
                raise DimensionMismatch(
                    f"weight dimension {m.shape[0]} != operand dimension {dim}"
                )
            shifted = m + self.rho * np.eye(dim)
            w, v = np.linalg.eigh(sym(shifted))
            if w.min() <= 0:
                raise SingularMatrix("weight matrix plus rho*I is not invertible")
            return v @ ((1.0 / w)[:, None] * v.T)
        if self.omega.size < dim:
            raise DimensionMismatch(
                f"diagonal weight has {self.omega.size} entries, need {dim}"
            )
        return np.diag(1.0 / (self.omega[:dim] + self.rho))


def sym_eig(a, rtol: float = SYMMETRY_RTOL) -> Spectrum:
    """Symmetric eigendecomposition with a deterministic sign convention.

    Eigenvalues come back descending; each eigenvector is flipped so its
    largest-magnitude component is nonnegative.
    """
    arr = as_array(a)
    check_symmetric(arr, rtol)
    try:
        w, v = np.linalg.eigh(sym(arr))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from exc
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    idx = np.abs(v).argmax(axis=0)
    flip = v[idx, np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0
    return Spectrum(eigenvalues=w, eigenvectors=v)


def _eig_for_function(a, strict: bool, tol: float) -> tuple[Array, Array, float]:
    arr = as_array(a)
    spec = sym_eig(arr)
    w, v = spec.eigenvalues.copy(), spec.eigenvectors
    scale = max(1.0, float(np.abs(w).max()))
    if strict and w.min() <= tol * scale:
        raise SingularMatrix(
            f"matrix must be strictly positive definite (min eigenvalue {w.min():.3e})"
        )
    return w, v, scale


def spd_power(a, alpha: float, psd_tolerance: float = DEFAULT_PSD_TOL) -> SpdMatrix:
    """Matrix power V diag(lambda^alpha) V^T of a PSD matrix.

    Negative powers require strict positive definiteness; nonnegative
    fractional powers clip tiny negative eigenvalues to zero first.
    """
    strict = alpha < 0
    w, v, _ = _eig_for_function(a, strict, psd_tolerance)
    if not strict:
        w = np.maximum(w, 0.0)
    if alpha == 0:
        powered = np.ones_like(w)
    elif alpha == 1:
        powered = w
    else:
        powered = w ** alpha
    return SpdMatrix(sym(v @ (powered[:, None] * v.T)), validate=False)


def spd_sqrt(a) -> SpdMatrix:
    return spd_power(a, 0.5)


def spd_log(a, psd_tolerance: float = DEFAULT_PSD_TOL) -> Array:
    """Matrix logarithm V diag(log lambda) V^T of a strictly PD matrix."""
    w, v, _ = _eig_for_function(a, True, psd_tolerance)
    return sym(v @ (np.log(w)[:, None] * v.T))


def orthogonal_polar_factor(q, rank_rtol: float = 1e-12) -> Array:
    """Orthogonal factor U of the polar decomposition Q = U P, via SVD."""
    arr = as_array(q)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {arr.shape}")
    u, s, vt = np.linalg.svd(arr)
    if s[-1] <= rank_rtol * s[0]:
        raise RankDeficient(
            f"singular value ratio {s[-1] / s[0]:.3e} below {rank_rtol:.0e}"
        )
    return u @ vt


def mahalanobis_norm(x, weight: MetricWeight) -> float:
    """sqrt(tr(X^T (M + rho I)^{-1} X)); the Frobenius norm when M = I, rho = 0."""
    arr = as_array(x)
    p = weight.inverse_matrix(arr.shape[0])
    val = float(np.einsum("ji,jk,ki->", arr, p, arr))
    return float(np.sqrt(max(val, 0.0)))


def extended_mahalanobis_norm(op: ExtendedOperator, weight: MetricWeight) -> float:
    """Truncated extended norm sqrt(sum_i (lambda_i + shift)^2 / (omega_i + rho)).

    Spectra are paired with the weight by descending-sorted rank; with zero
    shift, rho = 0 is unreachable here (diagonal weights require rho > 0), and
    the full-spectrum case reduces to :func:`mahalanobis_norm` in the shared
    eigenbasis.
    """
    if weight.is_full:
        raise ValueError("extended norm takes the diagonal weight form")
    lam = op.spectrum.eigenvalues
    k = lam.size
    if weight.omega.size < k:
        raise DimensionMismatch(
            f"weight carries {weight.omega.size} eigenvalues, operator needs {k}"
        )
    shifted = lam + op.shift
    denom = weight.omega[:k] + weight.rho
    return float(np.sqrt(np.sum(shifted * shifted / denom)))
