"""Learning the diagonal spectral weights for a fixed regularizer rho so the
truncated log-spectral distance separates the pairs that should separate while
keeping geometrically convergent pairs close.

Positivity of the weights comes from the exponential reparametrization
omega = exp(raw); training is full-batch gradient descent on raw with the
step halved whenever a step would increase the loss, so the recorded loss
trace never increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Array
from .errors import DivergedLoss, InsufficientPairs, NonPositiveShiftedEigenvalue

__all__ = [
    "LearnConfig",
    "WeightParams",
    "LabeledSpectrum",
    "build_pair_diffs",
    "separation_loss",
    "separation_loss_grad",
    "learn_weights",
]

CLOSE_PAIRS = (("T2", "T3Sc"),)
SEPARATE_PAIRS = (("T2", "T2Sc"),)


@dataclass(frozen=True)
class LearnConfig:
    k: int
    rho: float
    learning_rate: float
    max_epochs: int
    margin: float
    seed: int

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True, eq=False)
class WeightParams:
    """Raw weight parameters; the materialized weights are omega = exp(raw)."""

    raw: Array

    def __post_init__(self):
        raw = np.asarray(self.raw, dtype=np.float64)
        raw.flags.writeable = False
        object.__setattr__(self, "raw", raw)

    @property
    def omega(self) -> Array:
        return np.exp(self.raw)

    @classmethod
    def random_init(cls, k: int, seed: int) -> "WeightParams":
        rng = np.random.Generator(np.random.Philox(seed))
        return cls(raw=rng.uniform(-1.0, 1.0, size=k))


@dataclass(frozen=True, eq=False)
class LabeledSpectrum:
    """Top-K eigenvalues of one dataset's operator, its shift, and a group tag."""

    eigenvalues: Array
    shift: float
    tag: str


def build_pair_diffs(
    spectra,
    k: int,
    close_pairs=CLOSE_PAIRS,
    separate_pairs=SEPARATE_PAIRS,
) -> tuple[Array, Array]:
    """Log-spectrum difference rows for every (tagA, tagB) sample pair in the
    close and separating taxonomies.  Returns (close_diffs, sep_diffs) with
    one row per pair and K columns."""
    logs: dict[str, list[Array]] = {}
    for s in spectra:
        lam = np.asarray(s.eigenvalues, dtype=np.float64)
        if lam.size < k:
            raise InsufficientPairs(f"spectrum of length {lam.size} below K={k}")
        shifted = lam[:k] + s.shift
        if np.any(shifted <= 0):
            raise NonPositiveShiftedEigenvalue(
                f"spectrum tagged {s.tag!r} has nonpositive shifted eigenvalues"
            )
        logs.setdefault(s.tag, []).append(np.log(shifted))

    def collect(tag_pairs):
        rows = []
        for tag_a, tag_b in tag_pairs:
            for la in logs.get(tag_a, ()):
                for lb in logs.get(tag_b, ()):
                    rows.append(la - lb)
        return np.asarray(rows)

    close = collect(close_pairs)
    sep = collect(separate_pairs)
    if close.size == 0 or sep.size == 0:
        raise InsufficientPairs(
            "need at least one close pair and one separating pair; "
            f"got tags {sorted(logs)}"
        )
    return close, sep


def _loss_grad(
    raw: Array, rho: float, close: Array, sep: Array, margin: float
) -> tuple[float, Array]:
    omega = np.exp(raw)
    inv_w_sq = 1.0 / (omega + rho) ** 2
    d2_close = _kernels.weighted_sq_sums(close, inv_w_sq)
    d2_sep = _kernels.weighted_sq_sums(sep, inv_w_sq)
    hinge = margin + d2_close[:, None] - d2_sep[None, :]
    active = hinge > 0
    total = float(hinge[active].sum())
    count = hinge.size
    # d(d^2)/d omega_i = -2 diff_i^2 / (omega_i + rho)^3, chained through
    # d omega / d raw = omega; active close rows push omega up, sep rows down
    row_counts = active.sum(axis=1).astype(np.float64)
    col_counts = active.sum(axis=0).astype(np.float64)
    sq_close = row_counts @ (close * close)
    sq_sep = col_counts @ (sep * sep)
    grad = -2.0 * (sq_close - sq_sep) / (omega + rho) ** 3 * omega
    return total / count, grad / count


def separation_loss(
    weights: WeightParams,
    rho: float,
    spectra,
    margin: float,
    close_pairs=CLOSE_PAIRS,
    separate_pairs=SEPARATE_PAIRS,
) -> float:
    """Mean hinge max(0, margin + d2_close - d2_sep) over all combinations of
    one close pair and one separating pair, with squared truncated
    log-spectral distances under the current weights."""
    k = weights.raw.size
    close, sep = build_pair_diffs(spectra, k, close_pairs, separate_pairs)
    loss, _ = _loss_grad(weights.raw, rho, close, sep, margin)
    return loss


def separation_loss_grad(
    weights: WeightParams,
    rho: float,
    spectra,
    margin: float,
    close_pairs=CLOSE_PAIRS,
    separate_pairs=SEPARATE_PAIRS,
) -> Array:
    """Analytic gradient of :func:`separation_loss` with respect to raw."""
    k = weights.raw.size
    close, sep = build_pair_diffs(spectra, k, close_pairs, separate_pairs)
    _, grad = _loss_grad(weights.raw, rho, close, sep, margin)
    return grad


def learn_weights(
    cfg: LearnConfig,
    spectra,
    close_pairs=CLOSE_PAIRS,
    separate_pairs=SEPARATE_PAIRS,
    init: WeightParams | None = None,
) -> tuple[WeightParams, Array]:
    """Full-batch gradient descent on the raw weights.

    The learning rate halves whenever a proposed step would increase the
    loss (retrying the same epoch); training stops at max_epochs, at zero
    loss, or when no step size yields an improvement.  Returns the final
    weights and the per-epoch loss trace (nonincreasing).
    """
    close, sep = build_pair_diffs(spectra, cfg.k, close_pairs, separate_pairs)
    weights = init if init is not None else WeightParams.random_init(cfg.k, cfg.seed)
    raw = weights.raw.copy()
    lr = cfg.learning_rate
    loss, grad = _loss_grad(raw, cfg.rho, close, sep, cfg.margin)
    trace = [loss]
    for _ in range(cfg.max_epochs):
        if loss == 0.0 or not np.all(np.isfinite(grad)):
            break
        stepped = False
        while lr > 1e-14:
            cand = raw - lr * grad
            cand_loss, cand_grad = _loss_grad(cand, cfg.rho, close, sep, cfg.margin)
            if not np.isfinite(cand_loss):
                raise DivergedLoss(f"loss became non-finite at lr={lr:.3e}")
            if cand_loss <= loss + 1e-12:
                raw, loss, grad = cand, cand_loss, cand_grad
                stepped = True
                break
            lr *= 0.5
        if not stepped:
            break
        trace.append(loss)
    final = WeightParams(raw=raw)
    if not np.all(np.isfinite(final.omega)):
        raise DivergedLoss("learned weights are not finite")
    return final, np.asarray(trace)
