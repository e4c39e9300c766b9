import numpy as np
import pytest


def rand_spd(rng, n, lo=0.5, hi=2.0):
    """Random SPD matrix with eigenvalues uniform in [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = q @ np.diag(rng.uniform(lo, hi, n)) @ q.T
    return 0.5 * (a + a.T)


def rand_spd_pair(rng, n, lo=0.5, hi=2.0):
    return rand_spd(rng, n, lo, hi), rand_spd(rng, n, lo, hi)


def commuting_family(rng, n, count, lo=0.5, hi=2.0):
    """SPD matrices sharing one random eigenbasis."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    out = []
    for _ in range(count):
        a = q @ np.diag(rng.uniform(lo, hi, n)) @ q.T
        out.append(0.5 * (a + a.T))
    return out


def rand_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
