"""Torus point-cloud generation and diffusion operators built from clouds.

The 2-torus is the standard donut in R^3.  The 3-torus is its iterated tube
in R^4: around each point of the 2-torus skeleton, a circle of radius r2 is
revolved into the fourth coordinate, so r2 -> 0 collapses the 3-torus onto
the 2-torus.  The minor-radius scale c shrinks each torus's tube radius (the
last radius), which is what makes cross-dimension pairs converge as c -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Array, SpdMatrix, sym
from .errors import (
    DegenerateCloud,
    InvalidBandwidth,
    InvalidParams,
    InvalidScale,
)

__all__ = [
    "TorusParams",
    "PointCloud",
    "DiffusionOperator",
    "sample_torus",
    "surface_residual",
    "scale_minor_radius",
    "median_bandwidth",
    "diffusion_operator",
]


@dataclass(frozen=True)
class TorusParams:
    """Torus geometry: radii (R, r) for the 2-torus in R^3 or (R, r1, r2) for
    the 3-torus in R^4, plus the accumulated tube-radius scale c in (0, 1].

    The base radii stay untouched; ``effective_radii`` applies the scale to
    the tube (last) radius only, keeping the major structure fixed.
    """

    intrinsic_dim: int
    radii: tuple
    minor_scale: float = 1.0

    def __post_init__(self):
        if self.intrinsic_dim not in (2, 3):
            raise InvalidParams(f"intrinsic_dim must be 2 or 3, got {self.intrinsic_dim}")
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if len(radii) != self.intrinsic_dim:
            raise InvalidParams(
                f"a {self.intrinsic_dim}-torus needs {self.intrinsic_dim} radii, "
                f"got {len(radii)}"
            )
        if any(r <= 0 for r in radii):
            raise InvalidParams(f"all radii must be positive, got {radii}")
        if not 0.0 < self.minor_scale <= 1.0:
            raise InvalidScale(f"minor_scale must lie in (0, 1], got {self.minor_scale}")

    @property
    def ambient_dim(self) -> int:
        return self.intrinsic_dim + 1

    @property
    def effective_radii(self) -> tuple:
        scaled = list(self.radii)
        scaled[-1] *= self.minor_scale
        return tuple(scaled)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """N points in R^d with generator metadata ("external" for foreign data)."""

    points: Array
    params: TorusParams | str
    seed: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise DegenerateCloud(f"need an (N>=2, d) point array, got {pts.shape}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class DiffusionOperator:
    """Symmetric degree-normalized Gaussian kernel matrix of a point cloud;
    spectrum lies in [0, 1] with top eigenvalue exactly 1."""

    matrix: SpdMatrix
    bandwidth: float
    normalization: str = "symmetric"


def scale_minor_radius(params: TorusParams, c: float) -> TorusParams:
    """Shrink the tube radius by c in (0, 1]; scales compose multiplicatively."""
    if not 0.0 < c <= 1.0:
        raise InvalidScale(f"scale must lie in (0, 1], got {c}")
    return TorusParams(
        intrinsic_dim=params.intrinsic_dim,
        radii=params.radii,
        minor_scale=params.minor_scale * c,
    )


def sample_torus(params: TorusParams, n: int, seed: int) -> PointCloud:
    """Sample N points with angles uniform on [0, 2pi); deterministic per seed.

    T2: ((R + r cos v) cos u, (R + r cos v) sin u, r sin v).
    T3: tube radius scaled to r1 + r2 cos w in the T2 formula plus the fourth
    coordinate r2 sin w.
    """
    if n < 2:
        raise InvalidParams(f"need at least 2 samples, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    if params.intrinsic_dim == 2:
        big_r, r = params.effective_radii
        u, v = rng.uniform(0.0, 2.0 * np.pi, size=(2, n))
        ring = big_r + r * np.cos(v)
        pts = np.column_stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)])
    else:
        big_r, r1, r2 = params.effective_radii
        u, v, w = rng.uniform(0.0, 2.0 * np.pi, size=(3, n))
        tube = r1 + r2 * np.cos(w)
        ring = big_r + tube * np.cos(v)
        pts = np.column_stack(
            [ring * np.cos(u), ring * np.sin(u), tube * np.sin(v), r2 * np.sin(w)]
        )
    return PointCloud(points=pts, params=params, seed=seed)


def surface_residual(cloud: PointCloud) -> Array:
    """Absolute residual of each point against the implicit surface equation
    of the cloud's torus (zero for exact samples)."""
    if not isinstance(cloud.params, TorusParams):
        raise InvalidParams("surface_residual needs a generated torus cloud")
    pts = cloud.points
    if cloud.params.intrinsic_dim == 2:
        big_r, r = cloud.params.effective_radii
        ring = np.hypot(pts[:, 0], pts[:, 1]) - big_r
        return np.abs(ring * ring + pts[:, 2] ** 2 - r * r)
    big_r, r1, r2 = cloud.params.effective_radii
    ring = np.hypot(pts[:, 0], pts[:, 1]) - big_r
    tube = np.hypot(ring, pts[:, 2]) - r1
    return np.abs(tube * tube + pts[:, 3] ** 2 - r2 * r2)


def median_bandwidth(cloud: PointCloud) -> float:
    """Median of the pairwise squared Euclidean distances (off-diagonal)."""
    d2 = _kernels.pairwise_sq_dists(cloud.points)
    iu = np.triu_indices(cloud.size, k=1)
    med = float(np.median(d2[iu]))
    if med <= 0.0:
        raise DegenerateCloud("all pairwise distances are zero")
    return med


def diffusion_operator(
    cloud: PointCloud, epsilon: float, k_affinity: int | None = None
) -> DiffusionOperator:
    """Gaussian affinity W_ij = exp(-||x_i - x_j||^2 / eps) with symmetric
    degree normalization D^{-1/2} W D^{-1/2}.

    Optional k_affinity keeps each row's k nearest affinities and then
    symmetrizes by max(W, W^T); dense kernels are the default at desk scale.
    """
    if epsilon <= 0:
        raise InvalidBandwidth(f"bandwidth must be positive, got {epsilon}")
    d2 = _kernels.pairwise_sq_dists(cloud.points)
    w = np.exp(-d2 / epsilon)
    if k_affinity is not None:
        if not 1 <= k_affinity < cloud.size:
            raise InvalidParams(f"k_affinity must lie in [1, N), got {k_affinity}")
        keep = np.zeros_like(w, dtype=bool)
        order = np.argsort(d2, axis=1)
        rows = np.arange(cloud.size)[:, None]
        keep[rows, order[:, : k_affinity + 1]] = True  # + self
        w = np.where(keep, w, 0.0)
        w = np.maximum(w, w.T)
    deg = w.sum(axis=1)
    if np.any(deg <= 0):
        raise DegenerateCloud("zero-degree point in the affinity graph")
    inv_sqrt = 1.0 / np.sqrt(deg)
    s = sym(w * np.outer(inv_sqrt, inv_sqrt))
    return DiffusionOperator(
        matrix=SpdMatrix(s, validate=False), bandwidth=float(epsilon)
    )
