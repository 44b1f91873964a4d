import numpy as np
import pytest

from morbench import linalg
from morbench.exceptions import DimensionMismatch, NonFinite, NotPSD, SingularMatrix


class TestLuFactor:
    def test_diagonal(self):
        f = linalg.lu_factor(np.array([[2.0, 0.0], [0.0, 4.0]]))
        assert np.allclose(linalg.solve(f, np.array([2.0, 4.0])), [1.0, 1.0])

    def test_permutation(self):
        f = linalg.lu_factor(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(linalg.solve(f, np.array([3.0, 5.0])), [5.0, 3.0])

    def test_rank_deficient(self):
        with pytest.raises(SingularMatrix):
            linalg.lu_factor(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_zero_matrix(self):
        with pytest.raises(SingularMatrix):
            linalg.lu_factor(np.zeros((3, 3)))

    def test_complex(self):
        m = np.array([[1.0 + 1.0j, 0.0], [0.0, 2.0]])
        f = linalg.lu_factor(m)
        assert f.is_complex
        x = linalg.solve(f, np.array([1.0 + 1.0j, 4.0]))
        assert np.allclose(x, [1.0, 2.0])

    def test_nonsquare_rejected(self):
        with pytest.raises(DimensionMismatch):
            linalg.lu_factor(np.zeros((2, 3)))


class TestSolve:
    def test_identity(self, rng):
        f = linalg.lu_factor(np.eye(3))
        b = rng.standard_normal((3, 4))
        assert np.allclose(linalg.solve(f, b), b)

    def test_inverse(self):
        f = linalg.lu_factor(np.array([[2.0, 0.0], [0.0, 2.0]]))
        assert np.allclose(linalg.solve(f, np.eye(2)), 0.5 * np.eye(2))

    def test_column(self):
        f = linalg.lu_factor(np.array([[4.0, 0.0], [0.0, 5.0]]))
        assert np.allclose(linalg.solve(f, np.array([[8.0], [10.0]])), [[2.0], [2.0]])

    def test_row_mismatch(self):
        f = linalg.lu_factor(np.eye(2))
        with pytest.raises(DimensionMismatch):
            linalg.solve(f, np.zeros((3, 1)))

    def test_roundtrip_well_conditioned(self, rng):
        # random matrices with condition <= 1e6 via an SVD construction
        for trial in range(25):
            n = int(rng.integers(2, 25))
            q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
            q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
            cond = 10.0 ** rng.uniform(0, 6)
            svals = np.geomspace(cond, 1.0, n)
            m = (q1 * svals) @ q2
            x0 = rng.standard_normal((n, 3))
            x = linalg.solve(linalg.lu_factor(m), m @ x0)
            assert np.linalg.norm(x - x0) <= 1e-8 * np.linalg.norm(x0)


class TestCholeskyPsd:
    def test_full_rank(self):
        s = np.array([[4.0, 2.0], [2.0, 2.0]])
        ell, k = linalg.cholesky_psd(s)
        assert k == 2
        assert np.allclose(ell @ ell.T, s)

    def test_rank_one(self):
        s = np.array([[1.0, 1.0], [1.0, 1.0]])
        ell, k = linalg.cholesky_psd(s, rank_tol=1e-10)
        assert k == 1
        assert np.allclose(ell @ ell.T, s)

    def test_indefinite(self):
        with pytest.raises(NotPSD):
            linalg.cholesky_psd(np.array([[1.0, 0.0], [0.0, -1.0]]))

    def test_indefinite_hidden(self):
        # positive diagonal but a negative eigenvalue
        with pytest.raises(NotPSD):
            linalg.cholesky_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_zero_matrix(self):
        ell, k = linalg.cholesky_psd(np.zeros((3, 3)))
        assert k == 0 and ell.shape == (3, 0)

    def test_random_gram_matrices(self, rng):
        for trial in range(30):
            n = int(rng.integers(1, 30))
            p = int(rng.integers(1, n + 3))
            r_mat = rng.standard_normal((n, p))
            g = r_mat @ r_mat.T
            ell, k = linalg.cholesky_psd(g)
            assert k <= min(n, p)
            rel = np.linalg.norm(ell @ ell.T - g) / np.linalg.norm(g)
            assert rel <= 1e-10

    def test_rank_revealed(self, rng):
        r_mat = rng.standard_normal((8, 3))
        g = r_mat @ r_mat.T
        _, k = linalg.cholesky_psd(g)
        assert k == 3


class TestJacobiSvd:
    def test_diagonal_with_sign(self):
        _, sigma, _ = linalg.jacobi_svd(np.array([[3.0, 0.0], [0.0, -2.0]]))
        assert np.allclose(sigma, [3.0, 2.0])

    def test_zero_matrix(self):
        u, sigma, v = linalg.jacobi_svd(np.zeros((3, 2)))
        assert np.allclose(sigma, 0.0)
        assert np.allclose(u.T @ u, np.eye(2))
        assert np.allclose(v.T @ v, np.eye(2))

    def test_rank_one_ones(self):
        # oracle: eigenvalues of M^T M = [[2, 2], [2, 2]] are 4 and 0
        m = np.array([[1.0, 1.0], [1.0, 1.0]])
        eig = np.linalg.eigvalsh(m.T @ m)
        expected = np.sqrt(np.clip(eig, 0.0, None))[::-1]
        _, sigma, _ = linalg.jacobi_svd(m)
        assert np.allclose(sigma, expected)
        assert np.allclose(sigma, [2.0, 0.0])

    def test_nonfinite(self):
        with pytest.raises(NonFinite):
            linalg.jacobi_svd(np.array([[np.inf, 1.0], [0.0, 1.0]]))

    def test_wide_input(self, rng):
        m = rng.standard_normal((3, 7))
        u, sigma, v = linalg.jacobi_svd(m)
        assert u.shape == (3, 3) and v.shape == (7, 3)
        assert np.allclose((u * sigma) @ v.T, m)

    def test_contract_on_many_random_matrices(self, rng):
        # orthogonality and reconstruction bounds over 1000 draws up to 50 x 30
        for trial in range(1000):
            p = int(rng.integers(1, 51))
            r = int(rng.integers(1, 31))
            scale = 10.0 ** rng.uniform(-3, 3)
            m = scale * rng.standard_normal((p, r))
            u, sigma, v = linalg.jacobi_svd(m)
            k = min(p, r)
            assert sigma.shape == (k,)
            assert np.all(np.diff(sigma) <= 0) and np.all(sigma >= 0)
            norm = np.linalg.norm(m)
            assert np.linalg.norm((u * sigma) @ v.T - m) <= 1e-12 * norm * max(p, r) + 1e-300
            assert np.max(np.abs(u.T @ u - np.eye(k))) <= 1e-12
            assert np.max(np.abs(v.T @ v - np.eye(k))) <= 1e-12

    def test_against_lapack(self, rng):
        for trial in range(20):
            m = rng.standard_normal((int(rng.integers(2, 40)), int(rng.integers(2, 40))))
            _, sigma, _ = linalg.jacobi_svd(m)
            ref = np.linalg.svd(m, compute_uv=False)
            assert np.allclose(sigma, ref, rtol=1e-10, atol=1e-12 * ref[0])
