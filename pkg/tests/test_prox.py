import numpy as np
import pytest

from robustgraph import InvalidInputError, NumericalError, soft_threshold, solve_spd, svt


def nuclear_objective(d, h, mu):
    return np.linalg.svd(d, compute_uv=False).sum() + mu * np.linalg.norm(d - h) ** 2


def l1_objective(e, g, alpha, mu):
    return alpha * np.abs(e).sum() + 0.5 * mu * np.linalg.norm(e - g) ** 2


class TestSvt:
    def test_zero_threshold_is_identity(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((8, 5))
        assert np.allclose(svt(h, 0.0), h, atol=1e-12)

    def test_diagonal_fixture(self):
        # singular values of a nonnegative diagonal matrix are its diagonal
        assert np.allclose(svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]), atol=1e-12)

    def test_zero_matrix(self):
        assert np.array_equal(svt(np.zeros((4, 6)), 0.7), np.zeros((4, 6)))

    def test_shrinks_singular_values(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m, n = int(rng.integers(2, 51)), int(rng.integers(2, 41))
            h = rng.standard_normal((m, n))
            tau = float(rng.uniform(0.0, 2.0))
            got = np.linalg.svd(svt(h, tau), compute_uv=False)
            want = np.maximum(np.linalg.svd(h, compute_uv=False) - tau, 0.0)
            assert np.allclose(got, want, atol=1e-8)

    def test_prox_optimality_against_perturbations(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal((12, 9))
        mu = 0.8
        d = svt(h, 1.0 / (2.0 * mu))
        base = nuclear_objective(d, h, mu)
        for _ in range(200):
            scale = 10.0 ** rng.uniform(-6, 0)
            other = d + scale * rng.standard_normal(d.shape)
            assert nuclear_objective(other, h, mu) >= base - 1e-10

    def test_negative_threshold_rejected(self):
        with pytest.raises(InvalidInputError):
            svt(np.eye(3), -0.1)

    def test_empty_and_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            svt(np.zeros((0, 3)), 0.5)
        bad = np.ones((2, 2))
        bad[1, 0] = np.nan
        with pytest.raises(InvalidInputError):
            svt(bad, 0.5)


class TestSoftThreshold:
    def test_zero_threshold_is_identity(self):
        rng = np.random.default_rng(3)
        g = rng.standard_normal((6, 7))
        assert np.array_equal(soft_threshold(g, 0.0), g)

    def test_hand_values(self):
        g = np.array([[1.5, -0.3]])
        assert np.allclose(soft_threshold(g, 0.5), [[1.0, 0.0]])

    def test_odd_symmetry(self):
        rng = np.random.default_rng(4)
        g = rng.standard_normal((5, 5))
        assert np.array_equal(soft_threshold(-g, 0.3), -soft_threshold(g, 0.3))

    def test_never_increases_magnitude_and_keeps_sign(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((30, 20)) * 3
        out = soft_threshold(g, 0.7)
        assert (np.abs(out) <= np.abs(g)).all()
        assert ((out == 0) | (np.sign(out) == np.sign(g))).all()

    def test_prox_optimality_against_perturbations(self):
        rng = np.random.default_rng(6)
        g = rng.standard_normal((10, 8))
        alpha, mu = 0.4, 1.3
        e = soft_threshold(g, alpha / mu)
        base = l1_objective(e, g, alpha, mu)
        for _ in range(200):
            scale = 10.0 ** rng.uniform(-6, 0)
            other = e + scale * rng.standard_normal(e.shape)
            assert l1_objective(other, g, alpha, mu) >= base - 1e-10

    def test_negative_threshold_rejected(self):
        with pytest.raises(InvalidInputError):
            soft_threshold(np.eye(2), -1.0)


class TestSolveSpd:
    def test_identity_system(self):
        rng = np.random.default_rng(7)
        b = rng.standard_normal((3, 5))
        assert np.allclose(solve_spd(np.eye(5), b), b, atol=1e-12)

    def test_diagonal_fixture(self):
        out = solve_spd(np.array([[2.0, 0.0], [0.0, 4.0]]), np.array([[2.0, 4.0]]))
        assert np.allclose(out, [[1.0, 1.0]], atol=1e-12)

    def test_round_trip_recovers_solution(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(2, 30))
            q = np.linalg.qr(rng.standard_normal((n, n)))[0]
            a = q @ np.diag(rng.uniform(0.5, 5.0, n)) @ q.T
            a = 0.5 * (a + a.T)
            m = rng.standard_normal((4, n))
            got = solve_spd(a, m @ a)
            assert np.allclose(got, m, atol=1e-8)

    def test_residual_contract(self):
        rng = np.random.default_rng(9)
        n = 25
        q = np.linalg.qr(rng.standard_normal((n, n)))[0]
        a = q @ np.diag(rng.uniform(0.1, 10.0, n)) @ q.T
        a = 0.5 * (a + a.T)
        b = rng.standard_normal((6, n))
        m = solve_spd(a, b)
        assert np.linalg.norm(m @ a - b) / np.linalg.norm(b) < 1e-10

    def test_indefinite_matrix_names_eigenvalue(self):
        with pytest.raises(NumericalError, match="eigenvalue"):
            solve_spd(np.diag([1.0, -1.0]), np.ones((1, 2)))

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidInputError):
            solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones((1, 2)))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidInputError):
            solve_spd(np.eye(3), np.ones((2, 4)))
