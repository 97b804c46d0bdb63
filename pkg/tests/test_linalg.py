"""Dense linear algebra primitives against independent oracles."""

import numpy as np
import pytest

from semisep.errors import ContractError, DimensionError
from semisep.linalg import det, det2_matrix, herm_eigs, polar_factor

from conftest import char_poly_coefficients


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


class TestDet:
    def test_identity(self):
        assert det(np.eye(3)) == 1.0

    def test_diagonal_exact(self):
        assert det(np.diag([2.0, 5.0])) == 10.0

    def test_eigenvalue_product_oracle(self):
        rng = np.random.default_rng(101)
        m = random_complex(rng, 4)
        oracle = np.prod(np.linalg.eigvals(m))
        assert abs(det(m) - oracle) <= 1e-10 * abs(oracle)

    def test_multiplicative(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            m, n = random_complex(rng, 5), random_complex(rng, 5)
            lhs = det(m @ n)
            rhs = det(m) * det(n)
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)

    def test_strictly_triangular_of_identity_shift(self):
        m = np.array([[0, 0], [3.0, 0]])
        assert det(np.eye(2) - m) == 1.0

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            det(np.ones((2, 3)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ContractError):
            det(np.array([[np.nan, 0], [0, 1.0]]))


class TestDet2Matrix:
    def test_zero_operator(self):
        for n in (1, 3, 6):
            assert det2_matrix(np.zeros((n, n))) == 1.0

    def test_rank_one_single_eigenvalue(self):
        alpha = 0.37 + 0.21j
        m = np.zeros((3, 3), dtype=complex)
        m[0, 0] = alpha
        expected = (1 - alpha) * np.exp(alpha)
        assert abs(det2_matrix(m) - expected) < 1e-14

    def test_eigenvalue_oracle_random(self):
        rng = np.random.default_rng(11)
        m = random_complex(rng, 5)
        lam = np.linalg.eigvals(m)
        oracle = np.prod((1 - lam) * np.exp(lam))
        assert abs(det2_matrix(m) - oracle) <= 1e-9 * abs(oracle)

    def test_eigenvalue_oracle_battery(self):
        rng = np.random.default_rng(23)
        for n in range(2, 9):
            m = 0.6 * random_complex(rng, n)
            lam = np.linalg.eigvals(m)
            oracle = np.prod((1 - lam) * np.exp(lam))
            assert abs(det2_matrix(m) - oracle) <= 1e-9 * max(abs(oracle), 1e-3)

    def test_strictly_triangular_is_one(self):
        rng = np.random.default_rng(5)
        m = np.tril(random_complex(rng, 6), -1)
        assert det2_matrix(m) == 1.0


class TestPolarFactor:
    def test_zero(self):
        u, v = polar_factor(np.zeros((2, 2)))
        assert not u.any() and not v.any()

    def test_scalar_negative(self):
        u, v = polar_factor(np.array([[-4.0]]))
        assert abs(u[0, 0] + 2.0) < 1e-14
        assert abs(v[0, 0] - 2.0) < 1e-14

    def test_hermitian_reconstruction(self):
        rng = np.random.default_rng(42)
        a = random_complex(rng, 3)
        m = a + a.conj().T
        u, v = polar_factor(m)
        assert np.linalg.norm(u @ v - m) < 1e-12
        assert np.linalg.norm(v @ u - m) < 1e-12

    def test_general_reconstruction_and_psd(self):
        rng = np.random.default_rng(43)
        for _ in range(5):
            m = random_complex(rng, 4)
            u, v = polar_factor(m)
            assert np.linalg.norm(u @ v - m) <= 1e-11 * (1 + np.linalg.norm(m))
            assert np.linalg.norm(v - v.conj().T) < 1e-12
            assert np.linalg.eigvalsh(v).min() > -1e-12

    def test_singular_input_partial_isometry(self):
        m = np.array([[1.0, 0.0], [0.0, 0.0]])
        u, v = polar_factor(m)
        assert np.linalg.norm(u @ v - m) < 1e-14
        # the isometry is zero-extended on the kernel
        assert abs(u[1, 1]) < 1e-14


class TestHermEigs:
    def test_diagonal(self):
        evals, _ = herm_eigs(np.diag([1.0, 2.0, 3.0]))
        assert np.allclose(evals, [1, 2, 3])

    def test_flip_spectrum(self):
        evals, _ = herm_eigs(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(evals, [-1.0, 1.0])

    def test_char_poly_root_oracle(self):
        rng = np.random.default_rng(77)
        a = random_complex(rng, 6)
        m = 0.5 * (a + a.conj().T)
        evals, _ = herm_eigs(m)
        roots = np.sort(np.roots(char_poly_coefficients(m)).real)
        assert np.allclose(evals, roots, atol=1e-8)

    def test_residual_bound(self):
        rng = np.random.default_rng(78)
        a = random_complex(rng, 6)
        m = 0.5 * (a + a.conj().T)
        evals, vecs = herm_eigs(m)
        for i in range(6):
            r = np.linalg.norm(m @ vecs[:, i] - evals[i] * vecs[:, i])
            assert r <= 1e-10 * np.linalg.norm(m)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractError, match="not Hermitian"):
            herm_eigs(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_tolerance_configurable(self):
        m = np.array([[1.0, 1e-6], [0.0, 1.0]])
        with pytest.raises(ContractError):
            herm_eigs(m)
        evals, _ = herm_eigs(m, rtol=1e-3)
        assert np.allclose(evals, [1, 1], atol=1e-5)
