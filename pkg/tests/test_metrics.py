import numpy as np
import pytest

from spddist import (
    MetricWeight,
    ExtendedOperator,
    alpha_procrustes_closed,
    alpha_procrustes_numeric,
    bures_wasserstein,
    gaussian_w2_generalized,
    generalized_bw,
    generalized_log_euclidean,
    generalized_log_hs,
    gles_distance,
    spd_power,
)
from spddist.errors import (
    DimensionMismatch,
    DimensionTooLarge,
    IndexOutOfRange,
    InvalidAlpha,
    NonPositiveShiftedEigenvalue,
)

from conftest import commuting_family, rand_spd, rand_spd_pair


def procrustes_grid_oracle(x, y, m_inv, budget=200_000):
    """min over O(2) of ||X^{1/2} - Y^{1/2} O||_{M^{-1}} by dense angle grid."""
    xh = spd_power(x, 0.5).entries
    yh = spd_power(y, 0.5).entries
    thetas = np.linspace(0.0, 2 * np.pi, budget, endpoint=False)
    best = np.inf
    for reflect in (False, True):
        for t in thetas:
            c, s = np.cos(t), np.sin(t)
            o = np.array([[c, -s], [s, c]])
            if reflect:
                o = o @ np.diag([1.0, -1.0])
            d = xh - yh @ o
            val = np.sqrt(np.trace(d.T @ m_inv @ d))
            best = min(best, val)
    return best


class TestBuresWasserstein:
    def test_zero_on_equal(self, rng):
        for _ in range(5):
            x = rand_spd(rng, 4)
            assert bures_wasserstein(x, x).value <= 1e-8

    def test_commuting_example(self):
        # commuting case reduces to the Frobenius gap of the square roots
        d = bures_wasserstein(np.diag([4.0, 1.0]), np.diag([1.0, 4.0]))
        assert np.isclose(d.value, np.sqrt(2.0), atol=1e-12)

    def test_commuting_example_vs_procrustes_grid(self):
        # cross-check against the orthogonal-search formulation with M = I
        x, y = np.diag([4.0, 1.0]), np.diag([1.0, 4.0])
        oracle = procrustes_grid_oracle(x, y, np.eye(2), budget=100_000)
        assert abs(bures_wasserstein(x, y).value - oracle) < 1e-6

    def test_scaled_identity(self):
        d = bures_wasserstein(np.eye(2), 4.0 * np.eye(2))
        assert np.isclose(d.value, np.sqrt(2.0 + 8.0 - 2.0 * 4.0))

    def test_breakdown_identity(self, rng):
        x, y = rand_spd_pair(rng, 3)
        res = bures_wasserstein(x, y)
        b = res.breakdown
        lhs = res.value**2
        rhs = b["trace_X"] + b["trace_Y"] - 2 * b["cross_term"]
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            bures_wasserstein(np.eye(2), np.eye(3))


class TestGeneralizedBw:
    def test_identity_weight_reduces(self, rng):
        for _ in range(20):
            x, y = rand_spd_pair(rng, 4)
            d_w = generalized_bw(x, y, MetricWeight.identity(4)).value
            d_b = bures_wasserstein(x, y).value
            assert abs(d_w - d_b) <= 1e-12

    def test_scalar_example(self):
        w = MetricWeight.full(np.diag([2.0]))
        d = generalized_bw(np.diag([4.0]), np.diag([1.0]), w)
        assert np.isclose(d.value, np.sqrt(0.5), atol=1e-12)

    def test_zero_on_equal(self, rng):
        x = rand_spd(rng, 4)
        w = MetricWeight.full(rand_spd(rng, 4))
        assert generalized_bw(x, x, w).value <= 1e-8

    def test_grid_oracle_2d(self, rng):
        # the closed form solves the orthogonal-search problem
        for _ in range(3):
            x, y = rand_spd_pair(rng, 2)
            m = rand_spd(rng, 2)
            w = MetricWeight.full(m)
            oracle = procrustes_grid_oracle(x, y, np.linalg.inv(m), budget=100_000)
            assert abs(generalized_bw(x, y, w).value - oracle) < 1e-6

    def test_congruence_transform_oracle(self, rng):
        # transport change of variables: the weighted ground cost is the
        # plain one after mapping z -> M^{-1/2} z, so the weighted distance
        # of (X, Y) equals the plain distance of (LXL, LYL) with L = M^{-1/2}
        for n in (2, 4, 6):
            x, y = rand_spd_pair(rng, n)
            m = rand_spd(rng, n)
            ell = spd_power(m, -0.5).entries
            weighted = generalized_bw(x, y, MetricWeight.full(m)).value
            plain = bures_wasserstein(ell @ x @ ell, ell @ y @ ell).value
            assert abs(weighted - plain) <= 1e-10 * (1.0 + plain)

    def test_one_dimensional_closed_form(self, rng):
        # scalar case: d^2 = (sqrt(x) - sqrt(y))^2 / m
        for _ in range(20):
            x, y, m = rng.uniform(0.1, 5.0, 3)
            d = generalized_bw(np.diag([x]), np.diag([y]), MetricWeight.full(np.diag([m])))
            assert np.isclose(d.value, abs(np.sqrt(x) - np.sqrt(y)) / np.sqrt(m))


class TestAlphaProcrustesClosed:
    def test_half_alpha_is_twice_gbw(self, rng):
        for _ in range(20):
            x, y = rand_spd_pair(rng, 4)
            w = MetricWeight.full(rand_spd(rng, 4))
            d_a = alpha_procrustes_closed(x, y, 0.5, w).value
            d_g = generalized_bw(x, y, w).value
            assert abs(d_a - 2.0 * d_g) <= 1e-9 * (1.0 + d_a)

    def test_zero_on_equal(self, rng):
        x = rand_spd(rng, 3)
        w = MetricWeight.full(rand_spd(rng, 3))
        for alpha in (0.25, 0.5, 1.0, 2.0):
            assert alpha_procrustes_closed(x, x, alpha, w).value <= 1e-7

    def test_alpha_must_be_positive(self, rng):
        x, y = rand_spd_pair(rng, 2)
        with pytest.raises(InvalidAlpha):
            alpha_procrustes_closed(x, y, 0.0, MetricWeight.identity(2))

    def test_symmetry(self, rng):
        x, y = rand_spd_pair(rng, 4)
        w = MetricWeight.full(rand_spd(rng, 4))
        d1 = alpha_procrustes_closed(x, y, 0.75, w).value
        d2 = alpha_procrustes_closed(y, x, 0.75, w).value
        assert abs(d1 - d2) <= 1e-10 * (1.0 + d1)


class TestAlphaProcrustesNumeric:
    def test_equal_inputs_zero(self, rng):
        x = rand_spd(rng, 2)
        d = alpha_procrustes_numeric(x, x, 1.0, MetricWeight.identity(2), 10_000)
        assert d.value <= 1e-6

    def test_commuting_frobenius(self):
        # diagonal pair, alpha = 1, M = I: the optimum is O = I
        x, y = np.diag([4.0, 1.0]), np.diag([1.0, 2.0])
        d = alpha_procrustes_numeric(x, y, 1.0, MetricWeight.identity(2), 100_000)
        assert abs(d.value - np.linalg.norm(x - y, "fro")) < 1e-5

    def test_matches_closed_form(self, rng):
        w2 = MetricWeight.full(rand_spd(rng, 2))
        w3 = MetricWeight.full(rand_spd(rng, 3))
        for n, w, budget in ((2, w2, 100_000), (3, w3, 300_000)):
            for alpha in (0.5, 1.0):
                x, y = rand_spd_pair(rng, n)
                closed = alpha_procrustes_closed(x, y, alpha, w).value
                numeric = alpha_procrustes_numeric(x, y, alpha, w, budget, seed=5).value
                assert abs(closed - numeric) <= 1e-5 * (1.0 + closed)
                assert numeric >= closed - 1e-9  # never beats the true minimum

    def test_half_alpha_matches_twice_gbw_3d(self, rng):
        x, y = rand_spd_pair(rng, 3)
        w = MetricWeight.full(rand_spd(rng, 3))
        numeric = alpha_procrustes_numeric(x, y, 0.5, w, 1_000_000, seed=3).value
        assert abs(numeric - 2.0 * generalized_bw(x, y, w).value) <= 1e-4

    def test_four_dimensional_sampling_path(self, rng):
        x, y = rand_spd_pair(rng, 4)
        w = MetricWeight.full(rand_spd(rng, 4))
        closed = alpha_procrustes_closed(x, y, 0.5, w).value
        numeric = alpha_procrustes_numeric(x, y, 0.5, w, 300_000, seed=8).value
        assert abs(closed - numeric) <= 1e-5 * (1.0 + closed)

    def test_too_large_dimension(self, rng):
        x, y = rand_spd_pair(rng, 5)
        with pytest.raises(DimensionTooLarge):
            alpha_procrustes_numeric(x, y, 1.0, MetricWeight.identity(5), 10)


class TestGeneralizedLogEu:
    def test_zero_on_equal(self, rng):
        x = rand_spd(rng, 4)
        w = MetricWeight.full(rand_spd(rng, 4))
        assert generalized_log_euclidean(x, x, w).value <= 1e-8

    def test_commuting_example(self):
        d = generalized_log_euclidean(
            np.diag([np.e, 1.0]), np.diag([1.0, np.e]), MetricWeight.identity(2)
        )
        assert np.isclose(d.value, np.sqrt(2.0), atol=1e-12)

    def test_alpha_limit_on_commuting_family(self, rng):
        # the small-alpha family approaches the log distance on jointly
        # commuting triples; the gap shrinks linearly in alpha
        for _ in range(5):
            x, y, m = commuting_family(rng, 4, 3)
            w = MetricWeight.full(m)
            target = generalized_log_euclidean(x, y, w).value
            gaps = [
                abs(alpha_procrustes_closed(x, y, a, w).value - target)
                for a in (1e-1, 1e-2, 1e-3, 1e-4)
            ]
            assert gaps[0] > gaps[1] > gaps[2]
            assert gaps[3] <= 1e-3 * (1.0 + target)

    def test_symmetry(self, rng):
        x, y = rand_spd_pair(rng, 3)
        w = MetricWeight.full(rand_spd(rng, 3))
        assert np.isclose(
            generalized_log_euclidean(x, y, w).value,
            generalized_log_euclidean(y, x, w).value,
        )


class TestGles:
    def test_identical_spectra(self):
        lam = np.array([0.9, 0.5, 0.1])
        w = MetricWeight.diagonal(np.zeros(3), 1.0)
        assert gles_distance(lam, 1e-8, lam, 1e-8, w, 3).value == 0.0

    def test_hand_arithmetic(self):
        # log gaps (1, 1), weights (1, 2): d^2 = 1 + 1/4
        lx = np.array([np.e, np.e])
        ly = np.array([1.0, 1.0])
        w = MetricWeight.diagonal(np.array([0.0, 1.0]), 1.0)
        d = gles_distance(lx, 0.0, ly, 0.0, w, 2)
        assert np.isclose(d.value, np.sqrt(1.25))

    def test_weight_scaling(self, rng):
        lx = np.sort(rng.uniform(0.3, 1.0, 4))[::-1]
        ly = np.sort(rng.uniform(0.3, 1.0, 4))[::-1]
        omega = rng.uniform(0.2, 1.0, 4)
        s = 2.5
        d1 = gles_distance(lx, 0.0, ly, 0.0, MetricWeight.diagonal(omega, 1.0), 4).value
        d2 = gles_distance(
            lx, 0.0, ly, 0.0, MetricWeight.diagonal(s * (omega + 1.0), 0.0), 4
        ).value
        assert np.isclose(d2, d1 / s)

    def test_short_spectrum_raises(self):
        w = MetricWeight.diagonal(np.zeros(3), 1.0)
        with pytest.raises(IndexOutOfRange):
            gles_distance(np.array([1.0]), 0.0, np.array([1.0]), 0.0, w, 3)

    def test_nonpositive_shifted_raises(self):
        w = MetricWeight.diagonal(np.zeros(2), 1.0)
        with pytest.raises(NonPositiveShiftedEigenvalue):
            gles_distance(np.array([1.0, 0.0]), 0.0, np.array([1.0, 1.0]), 0.0, w, 2)


class TestGeneralizedLogHs:
    def test_zero_on_equal(self, rng):
        op = ExtendedOperator.from_matrix(rand_spd(rng, 4), k=3, shift=1e-8)
        w = MetricWeight.diagonal(np.zeros(3), 1.0)
        assert generalized_log_hs(op, op, w).value == 0.0

    def test_scalar_example(self):
        tx = ExtendedOperator.from_matrix(np.diag([np.e - 0.5]), k=1, shift=0.5)
        ty = ExtendedOperator.from_matrix(np.diag([0.5]), k=1, shift=0.5)
        w = MetricWeight.diagonal(np.zeros(1), 1.0)
        assert np.isclose(generalized_log_hs(tx, ty, w).value, 1.0)

    def test_matches_log_euclidean_on_commuting_pair(self, rng):
        # full co-sorted spectra on a shared eigenbasis (the rank-paired
        # representation's alignment regime), tiny equal shifts, unit weights
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        lam_x = np.sort(rng.uniform(0.5, 2.0, 5))[::-1]
        lam_y = np.sort(rng.uniform(0.5, 2.0, 5))[::-1]
        x = q @ np.diag(lam_x) @ q.T
        y = q @ np.diag(lam_y) @ q.T
        x, y = 0.5 * (x + x.T), 0.5 * (y + y.T)
        tx = ExtendedOperator.from_matrix(x, k=5, shift=1e-8)
        ty = ExtendedOperator.from_matrix(y, k=5, shift=1e-8)
        w = MetricWeight.diagonal(np.ones(5), 0.0)
        d_hs = generalized_log_hs(tx, ty, w).value
        d_le = generalized_log_euclidean(x, y, MetricWeight.identity(5)).value
        assert abs(d_hs - d_le) <= 1e-6

    def test_unequal_truncations_rejected(self, rng):
        a = rand_spd(rng, 4)
        w = MetricWeight.diagonal(np.zeros(3), 1.0)
        with pytest.raises(DimensionMismatch):
            generalized_log_hs(
                ExtendedOperator.from_matrix(a, k=3, shift=0.0),
                ExtendedOperator.from_matrix(a, k=2, shift=0.0),
                w,
            )


class TestGaussianW2:
    def test_zero_on_equal(self, rng):
        x = rand_spd(rng, 3)
        m = rng.standard_normal(3)
        w = MetricWeight.full(rand_spd(rng, 3))
        assert gaussian_w2_generalized(m, x, m, x, w).value <= 1e-8

    def test_zero_means_identity_weight(self, rng):
        x, y = rand_spd_pair(rng, 3)
        z = np.zeros(3)
        d = gaussian_w2_generalized(z, x, z, y, MetricWeight.identity(3)).value
        assert abs(d - bures_wasserstein(x, y).value) <= 1e-12

    def test_scalar_example(self):
        w = MetricWeight.full(np.diag([1.0]))
        d = gaussian_w2_generalized([0.0], np.diag([1.0]), [1.0], np.diag([1.0]), w)
        assert np.isclose(d.value, 1.0)

    def test_mean_dimension_checked(self, rng):
        x, y = rand_spd_pair(rng, 3)
        with pytest.raises(DimensionMismatch):
            gaussian_w2_generalized([0.0], x, [0.0], y, MetricWeight.identity(3))


class TestMetricAxioms:
    def test_axioms_across_distances(self, rng):
        w_cache = {}

        def weight(n):
            if n not in w_cache:
                w_cache[n] = MetricWeight.full(rand_spd(rng, n))
            return w_cache[n]

        distances = {
            "bw": lambda a, b, n: bures_wasserstein(a, b).value,
            "gbw": lambda a, b, n: generalized_bw(a, b, weight(n)).value,
            "alpha": lambda a, b, n: alpha_procrustes_closed(a, b, 0.75, weight(n)).value,
            "logeu": lambda a, b, n: generalized_log_euclidean(a, b, weight(n)).value,
        }
        for _ in range(200):
            n = int(rng.integers(2, 7))
            x, y = rand_spd_pair(rng, n)
            z = rand_spd(rng, n)
            for name, dist in distances.items():
                dxy, dyx = dist(x, y, n), dist(y, x, n)
                assert dxy >= 0
                assert abs(dxy - dyx) <= 1e-10 * (1.0 + dxy), name
                assert dist(x, x, n) <= 1e-8, name
                assert dxy <= dist(x, z, n) + dist(z, y, n) + 1e-8, name
