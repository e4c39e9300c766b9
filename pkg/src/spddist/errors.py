"""Exception hierarchy shared by all spddist modules."""


class SpdDistError(Exception):
    """Base class for all spddist errors."""


class NotSymmetric(SpdDistError):
    """Input matrix violates the symmetry tolerance."""


class NoConvergence(SpdDistError):
    """Iterative eigensolver failed to converge."""


class SingularMatrix(SpdDistError):
    """Matrix is singular (or numerically so) where strict positivity is required."""


class RankDeficient(SpdDistError):
    """Polar factor requested for a rank-deficient matrix."""


class DimensionMismatch(SpdDistError):
    """Operands have incompatible dimensions."""


class InvalidAlpha(SpdDistError):
    """Power-family parameter alpha must be strictly positive."""


class DimensionTooLarge(SpdDistError):
    """Brute-force oracle only supports small dimensions."""


class NonPositiveShiftedEigenvalue(SpdDistError):
    """A shifted eigenvalue (lambda + shift) is not strictly positive."""


class IndexOutOfRange(SpdDistError):
    """Requested truncation exceeds the available spectrum."""


class InfeasibleBudget(SpdDistError):
    """Trace budget is infeasible for the constraint set."""


class NoAscent(SpdDistError):
    """No feasible ascent step exists at the starting point."""


class InvalidSketchSize(SpdDistError):
    """Sketch size must exceed rank + 1."""


class CholeskyFailure(SpdDistError):
    """Cholesky factorization failed despite shift escalation."""


class InvalidParams(SpdDistError):
    """Invalid torus parameters."""


class InvalidScale(SpdDistError):
    """Minor-radius scale must lie in (0, 1]."""


class DegenerateCloud(SpdDistError):
    """Point cloud carries no usable pairwise distances."""


class InvalidBandwidth(SpdDistError):
    """Kernel bandwidth must be strictly positive."""


class InsufficientPairs(SpdDistError):
    """Separation loss needs at least one close pair and one separating pair."""


class DivergedLoss(SpdDistError):
    """Training loss became non-finite."""


class ConfigError(SpdDistError):
    """Malformed benchmark configuration."""
