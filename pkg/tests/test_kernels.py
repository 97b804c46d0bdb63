"""Kernel data model: factor functions, branch evaluation, block structure."""

import numpy as np
import pytest

from semisep.errors import ContractError, DimensionError, DomainError
from semisep.kernels import (
    DIAG_LOWER,
    DIAG_UPPER,
    OperatorFunction,
    SemiSeparableKernel,
)

from conftest import make_continuous_kernel

IV = (0.0, 1.0)


def constant_kernel(f1, g1, f2, g2):
    return SemiSeparableKernel(
        OperatorFunction.constant([[f1]], IV),
        OperatorFunction.constant([[g1]], IV),
        OperatorFunction.constant([[f2]], IV),
        OperatorFunction.constant([[g2]], IV),
    )


class TestOperatorFunction:
    def test_shape_enforced(self):
        f = OperatorFunction.from_callable(lambda x: np.ones((2, 2)), 2, 3, IV)
        with pytest.raises(DimensionError):
            f(0.5)

    def test_domain_error(self):
        f = OperatorFunction.constant([[1.0]], IV)
        with pytest.raises(DomainError):
            f(1.5)

    def test_sampled_interpolation(self):
        xs = np.linspace(0, 1, 40)
        mats = np.stack([np.array([[np.sin(2 * x), x**2], [x, 1.0]], dtype=complex)
                         for x in xs])
        f = OperatorFunction.from_samples(xs, mats, degree=3)
        assert f.degree == 3
        val = f(0.437)
        assert abs(val[0, 0] - np.sin(2 * 0.437)) < 1e-5
        assert abs(val[0, 1] - 0.437**2) < 1e-9

    def test_csv_roundtrip(self, tmp_path):
        xs = np.linspace(0, 1, 30)
        mats = np.stack([np.array([[np.exp(1j * x), x], [0, 1]], dtype=complex)
                         for x in xs])
        f = OperatorFunction.from_samples(xs, mats)
        path = tmp_path / "factor.csv"
        f.to_csv(path, xs)
        g = OperatorFunction.from_csv(path)
        assert (g.rows, g.cols) == (2, 2)
        for x in (0.1, 0.5, 0.9):
            assert np.allclose(f(x), g(x), atol=1e-9)

    def test_csv_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,1.0,0.0\n1.0,2.0,0.0\n")
        with pytest.raises(ContractError):
            OperatorFunction.from_csv(path)


class TestEvalKernel:
    def test_zero_factors(self):
        z = OperatorFunction.zero(2, 1, IV)
        zt = OperatorFunction.zero(1, 2, IV)
        k = SemiSeparableKernel(z, zt, z, zt)
        assert not k.eval(0.7, 0.2).any()

    def test_separable_exponential(self):
        grow = OperatorFunction.from_callable(
            lambda x: np.array([[np.exp(x)]]), 1, 1, IV)
        decay = OperatorFunction.from_callable(
            lambda x: np.array([[np.exp(-x)]]), 1, 1, IV)
        k = SemiSeparableKernel(grow, decay, grow, decay)
        # frozen: exp(0.3)
        assert abs(k.eval(0.5, 0.2)[0, 0] - 1.3498588075760032) < 1e-12

    def test_diagonal_conventions(self):
        k = constant_kernel(2.0, 1.0, 4.0, 1.0)
        assert k.eval(0.5, 0.5)[0, 0] == 3.0
        assert k.with_diagonal(DIAG_LOWER).eval(0.5, 0.5)[0, 0] == 2.0
        assert k.with_diagonal(DIAG_UPPER).eval(0.5, 0.5)[0, 0] == 4.0

    def test_branch_values(self):
        k = constant_kernel(2.0, 1.0, 4.0, 1.0)
        assert k.eval(0.6, 0.2)[0, 0] == 2.0
        assert k.eval(0.2, 0.6)[0, 0] == 4.0


class TestHAndBlocks:
    def test_h_separable_cancels(self):
        grow = OperatorFunction.from_callable(
            lambda x: np.array([[np.exp(x)]]), 1, 1, IV)
        decay = OperatorFunction.from_callable(
            lambda x: np.array([[np.exp(-x)]]), 1, 1, IV)
        k = SemiSeparableKernel(grow, decay, grow, decay)
        for (x, xp) in [(0.3, 0.8), (0.9, 0.1)]:
            assert abs(k.eval_h(x, xp)[0, 0]) < 1e-14

    def test_h_constant(self):
        k = constant_kernel(1.0, 1.0, 2.0, 1.0)
        assert k.eval_h(0.4, 0.9)[0, 0] == -1.0

    def test_h_equals_c_times_b(self):
        k = make_continuous_kernel(3, d=2, n=2)
        rng = np.random.default_rng(1)
        for _ in range(5):
            x, xp = rng.uniform(0, 1, 2)
            lhs = k.eval_h(x, xp)
            rhs = k.block_c(x) @ k.block_b(xp)
            scale = 1 + np.linalg.norm(k.block_b(xp)) * np.linalg.norm(k.block_c(x))
            assert np.linalg.norm(lhs - rhs) <= 1e-13 * scale

    def test_block_a_equals_b_times_c(self):
        k = make_continuous_kernel(4, d=2, n=2)
        for x in (0.1, 0.5, 0.9):
            a = k.block_a(x)
            bc = k.block_b(x) @ k.block_c(x)
            scale = 1 + np.linalg.norm(k.block_b(x)) * np.linalg.norm(k.block_c(x))
            assert np.linalg.norm(a - bc) <= 1e-13 * scale

    def test_block_a_nilpotent_example(self):
        k = constant_kernel(1.0, 1.0, 1.0, 1.0)
        a = k.block_a(0.5)
        assert np.allclose(a, [[1, 1], [-1, -1]])
        assert np.allclose(a @ a, 0)

    def test_block_trace_identity(self):
        k = make_continuous_kernel(5, d=2, n=2)
        for x in (0.2, 0.7):
            lhs = np.trace(k.block_a(x))
            rhs = np.trace(k.G1(x) @ k.F1(x)) - np.trace(k.G2(x) @ k.F2(x))
            assert abs(lhs - rhs) < 1e-13

    def test_projector_split(self):
        k = make_continuous_kernel(6, d=2, n=2)
        p0 = k.p0
        assert np.allclose(p0 @ p0, p0)
        rng = np.random.default_rng(2)
        eye = np.eye(k.n1 + k.n2)
        for _ in range(4):
            x, xp = np.sort(rng.uniform(0, 1, 2))
            below = k.block_c(xp + 1e-9) if False else None
            # x' < x branch
            lhs = k.eval(xp + 0.3 if xp + 0.3 < 1 else 0.99, xp)
            xx = xp + 0.3 if xp + 0.3 < 1 else 0.99
            rhs = k.block_c(xx) @ (eye - p0) @ k.block_b(xp)
            assert np.linalg.norm(lhs - rhs) < 1e-13 * (1 + np.linalg.norm(rhs))
            # x < x' branch
            lhs2 = k.eval(xp * 0.5, xp)
            rhs2 = -k.block_c(xp * 0.5) @ p0 @ k.block_b(xp)
            assert np.linalg.norm(lhs2 - rhs2) < 1e-13 * (1 + np.linalg.norm(rhs2))

    def test_blocks_named_tuple(self):
        k = make_continuous_kernel(7, d=1, n=1)
        blocks = k.blocks()
        assert blocks.p0.shape == (2, 2)
        assert blocks.a(0.5).shape == (2, 2)


class TestValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            SemiSeparableKernel(
                OperatorFunction.zero(2, 1, IV),
                OperatorFunction.zero(2, 2, IV),
                OperatorFunction.zero(2, 1, IV),
                OperatorFunction.zero(1, 2, IV),
            )

    def test_interval_mismatch(self):
        with pytest.raises(DomainError):
            SemiSeparableKernel(
                OperatorFunction.zero(1, 1, (0, 1)),
                OperatorFunction.zero(1, 1, (0, 2)),
                OperatorFunction.zero(1, 1, (0, 1)),
                OperatorFunction.zero(1, 1, (0, 1)),
            )

    def test_shape_stability(self):
        k = make_continuous_kernel(8, d=3, n=2)
        assert k.eval(0.5, 0.2).shape == (3, 3)
        assert k.eval_h(0.2, 0.5).shape == (3, 3)
        assert k.block_a(0.4).shape == (4, 4)
        assert k.block_c(0.4).shape == (3, 4)
        assert k.block_b(0.4).shape == (4, 3)
