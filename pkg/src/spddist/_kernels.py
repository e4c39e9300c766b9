"""Hot numeric kernels with numba-compiled and pure-numpy twins.

Every public function here dispatches to a ``@njit`` implementation unless the
environment variable ``SPDDIST_DISABLE_NUMBA`` is set (any non-empty value) or
numba is unavailable, in which case the vectorized numpy twin runs instead.
Both paths consume identical pre-drawn random inputs, so results agree to
floating-point roundoff regardless of backend.

``benchmarks/kernel_bench.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

Array = np.ndarray

_DISABLED = bool(os.environ.get("SPDDIST_DISABLE_NUMBA"))

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

NUMBA_ENABLED = not _DISABLED


# ---------------------------------------------------------------------------
# pairwise squared distances
# ---------------------------------------------------------------------------

def _pairwise_sq_dists_np(points: Array) -> Array:
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _pairwise_sq_dists_nb_impl(points):  # pragma: no cover - compiled
    n, d = points.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = points[i, k] - points[j, k]
                acc += diff * diff
            out[i, j] = acc
            out[j, i] = acc
    return out


# ---------------------------------------------------------------------------
# orthogonal-group trace scan
#
# For the Procrustes oracle the objective reduces to maximizing tr(G O) over
# O(n).  Given a batch of standard-normal matrices, each is orthogonalized by
# QR (sign-fixed so the factor is Haar on SO(n)); the scan reports tr(G Q) and
# the value for the reflected element (last column of Q negated).
# ---------------------------------------------------------------------------

def _orthogonal_trace_scan_np(g: Array, gauss: Array) -> tuple[Array, Array]:
    q, r = np.linalg.qr(gauss)
    signs = np.sign(np.einsum("bii->bi", r))
    signs[signs == 0] = 1.0
    q = q * signs[:, None, :]
    gt = g.T
    rot = np.einsum("ij,bij->b", gt, q)
    refl = rot - 2.0 * np.einsum("i,bi->b", gt[:, -1], q[:, :, -1])
    return rot, refl


def _orthogonal_trace_scan_nb_impl(g, gauss):  # pragma: no cover - compiled
    b, n, _ = gauss.shape
    rot = np.empty(b)
    refl = np.empty(b)
    for s in range(b):
        q, r = np.linalg.qr(gauss[s])
        for c in range(n):
            if r[c, c] < 0.0:
                for i in range(n):
                    q[i, c] = -q[i, c]
        tr = 0.0
        last = 0.0
        for i in range(n):
            for j in range(n):
                tr += g[i, j] * q[j, i]
            last += g[n - 1, i] * q[i, n - 1]
        rot[s] = tr
        refl[s] = tr - 2.0 * last
    return rot, refl


# ---------------------------------------------------------------------------
# batched weighted log-spectrum sums (squared GLES distances)
# ---------------------------------------------------------------------------

def _weighted_sq_sums_np(diffs: Array, inv_w_sq: Array) -> Array:
    return (diffs * diffs) @ inv_w_sq


def _weighted_sq_sums_nb_impl(diffs, inv_w_sq):  # pragma: no cover - compiled
    p, k = diffs.shape
    out = np.empty(p)
    for i in range(p):
        acc = 0.0
        for j in range(k):
            acc += diffs[i, j] * diffs[i, j] * inv_w_sq[j]
        out[i] = acc
    return out


if NUMBA_ENABLED:
    _pairwise_sq_dists_nb = njit(cache=True)(_pairwise_sq_dists_nb_impl)
    _orthogonal_trace_scan_nb = njit(cache=True)(_orthogonal_trace_scan_nb_impl)
    _weighted_sq_sums_nb = njit(cache=True)(_weighted_sq_sums_nb_impl)


def pairwise_sq_dists(points: Array) -> Array:
    """All-pairs squared Euclidean distances of an (N, d) point array."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if NUMBA_ENABLED:
        return _pairwise_sq_dists_nb(points)
    return _pairwise_sq_dists_np(points)


def orthogonal_trace_scan(g: Array, gauss: Array) -> tuple[Array, Array]:
    """tr(G O) for Haar-ish orthogonal O built by QR from each Gaussian slab.

    Returns the trace for the rotation component and for its reflection
    (last column negated), as two length-B arrays.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    gauss = np.ascontiguousarray(gauss, dtype=np.float64)
    if NUMBA_ENABLED:
        return _orthogonal_trace_scan_nb(g, gauss)
    return _orthogonal_trace_scan_np(g, gauss)


def weighted_sq_sums(diffs: Array, inv_w_sq: Array) -> Array:
    """Row sums of diffs**2 weighted by inv_w_sq: batched squared distances."""
    diffs = np.ascontiguousarray(diffs, dtype=np.float64)
    inv_w_sq = np.ascontiguousarray(inv_w_sq, dtype=np.float64)
    if NUMBA_ENABLED:
        return _weighted_sq_sums_nb(diffs, inv_w_sq)
    return _weighted_sq_sums_np(diffs, inv_w_sq)
