import numpy as np
import pytest

from hinv.operators import (
    BlockOp,
    LinearOp,
    block_assemble,
    block_extract,
    norms,
    tensor_product,
)
from hinv.spaces import BasisSpace, Curve, StackedCurve, stack_curves


@pytest.fixture
def s2():
    return BasisSpace(2)


@pytest.fixture
def s3():
    return BasisSpace(3)


class TestTensorProduct:
    def test_basis_vectors(self, s2):
        # x = e1, y = e2: single 1 at row 2, col 1 (matrix y x^T)
        T = tensor_product(Curve(s2, [1, 0]), Curve(s2, [0, 1]))
        assert np.array_equal(T.mat, [[0, 0], [1, 0]])

    def test_zero_factor(self, s2):
        T = tensor_product(Curve(s2, [0, 0]), Curve(s2, [3, -4]))
        assert np.array_equal(T.mat, np.zeros((2, 2)))

    def test_hand_evaluation(self, s2):
        # x = (1,1)/sqrt2, y = (1,-1)/sqrt2, z = (1,0):
        # <x,z> y = (1/2, -1/2), computed by hand before coding.
        r = np.sqrt(2.0)
        x = Curve(s2, [1 / r, 1 / r])
        y = Curve(s2, [1 / r, -1 / r])
        T = tensor_product(x, y)
        assert norms(T).hs == pytest.approx(1.0, abs=1e-15)
        out = T(Curve(s2, [1, 0]))
        assert np.allclose(out.coeffs, [0.5, -0.5], atol=1e-15)

    def test_defining_identity_and_norm(self, s2):
        rng = np.random.default_rng(7)
        for _ in range(25):
            x = Curve(s2, rng.standard_normal(2))
            y = Curve(s2, rng.standard_normal(2))
            z = Curve(s2, rng.standard_normal(2))
            T = tensor_product(x, y)
            assert np.allclose(T(z).coeffs, x.inner(z) * y.coeffs, atol=1e-14)
            assert norms(T).hs == pytest.approx(x.norm() * y.norm(), rel=1e-13)

    def test_adjoint_swaps_factors(self, s2):
        rng = np.random.default_rng(8)
        x = Curve(s2, rng.standard_normal(2))
        y = Curve(s2, rng.standard_normal(2))
        assert np.array_equal(
            tensor_product(x, y).adjoint().mat, tensor_product(y, x).mat
        )

    def test_dimension_mismatch(self, s2, s3):
        with pytest.raises(ValueError):
            tensor_product(Curve(s2, [1, 0]), Curve(s3, [1, 0, 0]))


class TestNorms:
    def test_identity_dim3(self, s3):
        n = norms(LinearOp.identity(s3))
        assert n.op == pytest.approx(1.0, abs=1e-14)
        assert n.hs == pytest.approx(np.sqrt(3.0), abs=1e-14)
        assert n.nuclear == pytest.approx(3.0, abs=1e-14)

    def test_diagonal(self, s2):
        n = norms(LinearOp(s2, np.diag([2.0, 1.0])))
        assert n.op == pytest.approx(2.0, abs=1e-14)
        assert n.hs == pytest.approx(np.sqrt(5.0), abs=1e-14)
        assert n.nuclear == pytest.approx(3.0, abs=1e-14)

    def test_zero(self, s3):
        n = norms(LinearOp.zero(s3))
        assert (n.op, n.hs, n.nuclear) == (0.0, 0.0, 0.0)

    def test_ordering_on_random_draws(self):
        space = BasisSpace(5)
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = norms(LinearOp(space, rng.standard_normal((5, 5))))
            assert n.op <= n.hs + 1e-12
            assert n.hs <= n.nuclear + 1e-12

    def test_nonfinite_rejected(self, s2):
        with pytest.raises(ValueError):
            LinearOp(s2, [[np.nan, 0], [0, 1]])
        with pytest.raises(ValueError):
            BlockOp(s2, 1, 1, [[np.inf, 0], [0, 1]])


class TestBlockOp:
    def test_assemble_extract_roundtrip(self, s2):
        rng = np.random.default_rng(5)
        grid = [[LinearOp(s2, rng.standard_normal((2, 2))) for _ in range(3)] for _ in range(2)]
        B = block_assemble(grid)
        assert (B.rows, B.cols) == (2, 3)
        for i in range(2):
            for j in range(3):
                assert np.array_equal(block_extract(B, i, j).mat, grid[i][j].mat)

    def test_row_of_two_blocks(self, s2):
        psi1 = LinearOp(s2, [[1, 2], [3, 4]])
        psi2 = LinearOp(s2, [[5, 6], [7, 8]])
        B = block_assemble([[psi1, psi2]])
        assert B.mat.shape == (2, 4)
        assert np.array_equal(block_extract(B, 0, 1).mat, psi2.mat)

    def test_zero_grid(self, s2):
        B = block_assemble([[LinearOp.zero(s2)] * 2] * 2)
        assert np.array_equal(B.mat, np.zeros((4, 4)))

    def test_ragged_grid_rejected(self, s2):
        with pytest.raises(ValueError):
            block_assemble([[LinearOp.zero(s2)], [LinearOp.zero(s2), LinearOp.zero(s2)]])

    def test_hs_additivity_over_blocks(self):
        # ||S||_HS^2 == sum of block HS norms squared, exactly.
        space = BasisSpace(3)
        rng = np.random.default_rng(42)
        for _ in range(100):
            grid = [
                [LinearOp(space, rng.standard_normal((3, 3))) for _ in range(2)]
                for _ in range(3)
            ]
            B = block_assemble(grid)
            total = sum(b.hs_norm() ** 2 for row in grid for b in row)
            assert B.hs_norm() ** 2 == pytest.approx(total, rel=1e-13)

    def test_row_block_operator_norm_bound(self):
        # ||stacked grid||_op <= sum over rows of row operator norms.
        space = BasisSpace(2)
        rng = np.random.default_rng(99)
        for _ in range(50):
            grid = [
                [LinearOp(space, rng.standard_normal((2, 2))) for _ in range(3)]
                for _ in range(2)
            ]
            B = block_assemble(grid)
            row_sum = sum(block_assemble([row]).op_norm() for row in grid)
            assert B.op_norm() <= row_sum + 1e-12

    def test_row_vector_operator_norm_bound(self):
        # ||(A_1 ... A_m)||_op <= sqrt(sum ||A_i||_op^2)
        space = BasisSpace(3)
        rng = np.random.default_rng(17)
        for _ in range(50):
            ops = [LinearOp(space, rng.standard_normal((3, 3))) for _ in range(4)]
            row = block_assemble([ops])
            bound = np.sqrt(sum(a.op_norm() ** 2 for a in ops))
            assert row.op_norm() <= bound + 1e-12

    def test_adjoint_transposes_grid(self, s2):
        rng = np.random.default_rng(3)
        grid = [[LinearOp(s2, rng.standard_normal((2, 2))) for _ in range(2)]]
        B = block_assemble(grid)
        A = B.adjoint()
        assert (A.rows, A.cols) == (2, 1)
        for j in range(2):
            assert np.array_equal(A.block(j, 0).mat, grid[0][j].mat.T)

    def test_apply_stacked(self, s2):
        psi1 = LinearOp(s2, [[1, 0], [0, 2]])
        psi2 = LinearOp(s2, [[0, 1], [1, 0]])
        B = block_assemble([[psi1, psi2]])
        x = stack_curves([Curve(s2, [1, 2]), Curve(s2, [3, 4])])
        out = B(x)
        assert isinstance(out, Curve)
        assert np.allclose(out.coeffs, psi1.mat @ [1, 2] + psi2.mat @ [3, 4])

    def test_immutability(self, s2):
        A = LinearOp.identity(s2)
        with pytest.raises(ValueError):
            A.mat[0, 0] = 5.0


class TestStackedCurve:
    def test_block_order_and_norm(self, s2):
        a = Curve(s2, [1, 2])
        b = Curve(s2, [3, 4])
        x = stack_curves([a, b])
        assert x.L == 2
        assert np.array_equal(x.block(0).coeffs, a.coeffs)
        assert np.array_equal(x.block(1).coeffs, b.coeffs)
        assert x.norm() ** 2 == pytest.approx(a.norm() ** 2 + b.norm() ** 2, rel=1e-14)

    def test_mixed_spaces_rejected(self, s2, s3):
        with pytest.raises(ValueError):
            stack_curves([Curve(s2, [1, 0]), Curve(s3, [1, 0, 0])])

    def test_bad_length(self, s2):
        with pytest.raises(ValueError):
            StackedCurve(s2, 2, [1.0, 2.0, 3.0])
