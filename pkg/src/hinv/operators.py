"""Bounded operators on the discretized space and on its Cartesian powers.

A LinearOp is a dense square matrix acting on coefficient vectors; a BlockOp
is an operator between Cartesian powers H^cols -> H^rows, stored flat with a
(rows x cols) block structure.  Because the basis is orthonormal, the
Hilbert-Schmidt norm is the Frobenius norm, the operator norm is the largest
singular value, and the nuclear norm is the sum of singular values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import BasisSpace, Curve, StackedCurve


def _frozen_matrix(mat, shape=None) -> np.ndarray:
    m = np.array(mat, dtype=float, copy=True)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if shape is not None and m.shape != shape:
        raise ValueError(f"expected matrix of shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class LinearOp:
    """Bounded operator on the discretized space; y = mat @ x in coefficients."""

    space: BasisSpace
    mat: np.ndarray

    def __post_init__(self):
        d = self.space.dim
        object.__setattr__(self, "mat", _frozen_matrix(self.mat, (d, d)))

    @classmethod
    def zero(cls, space: BasisSpace) -> "LinearOp":
        return cls(space, np.zeros((space.dim, space.dim)))

    @classmethod
    def identity(cls, space: BasisSpace) -> "LinearOp":
        return cls(space, np.eye(space.dim))

    def apply(self, x: Curve) -> Curve:
        if x.space != self.space:
            raise ValueError("curve space does not match operator space")
        return Curve(self.space, self.mat @ x.coeffs)

    __call__ = apply

    def adjoint(self) -> "LinearOp":
        return LinearOp(self.space, self.mat.T)

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.mat, "fro"))

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.mat, 2))

    def nuclear_norm(self) -> float:
        return float(np.linalg.svd(self.mat, compute_uv=False).sum())

    def __add__(self, other: "LinearOp") -> "LinearOp":
        _check_same_space(self, other)
        return LinearOp(self.space, self.mat + other.mat)

    def __sub__(self, other: "LinearOp") -> "LinearOp":
        _check_same_space(self, other)
        return LinearOp(self.space, self.mat - other.mat)

    def __mul__(self, c: float) -> "LinearOp":
        return LinearOp(self.space, self.mat * float(c))

    __rmul__ = __mul__

    def __matmul__(self, other: "LinearOp") -> "LinearOp":
        _check_same_space(self, other)
        return LinearOp(self.space, self.mat @ other.mat)


def _check_same_space(a, b):
    if a.space != b.space:
        raise ValueError("operands live in different spaces")


@dataclass(frozen=True, eq=False)
class BlockOp:
    """Operator H^cols -> H^rows stored as a flat (rows*dim x cols*dim) matrix.

    The flat storage makes the block Hilbert-Schmidt identity
    ||S||_HS^2 = sum_ij ||S_ij||_HS^2 exact by construction, and the adjoint of
    the flat matrix is the transposed block grid with each block adjointed.
    """

    space: BasisSpace
    rows: int
    cols: int
    mat: np.ndarray

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"rows/cols must be >= 1, got {self.rows}x{self.cols}")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        d = self.space.dim
        object.__setattr__(
            self, "mat", _frozen_matrix(self.mat, (self.rows * d, self.cols * d))
        )

    @classmethod
    def zero(cls, space: BasisSpace, rows: int, cols: int) -> "BlockOp":
        return cls(space, rows, cols, np.zeros((rows * space.dim, cols * space.dim)))

    @classmethod
    def identity(cls, space: BasisSpace, rows: int) -> "BlockOp":
        return cls(space, rows, rows, np.eye(rows * space.dim))

    def block(self, i: int, j: int) -> LinearOp:
        """Extract block (i, j), 0-based."""
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise ValueError(
                f"block index ({i}, {j}) out of range for {self.rows}x{self.cols} grid"
            )
        d = self.space.dim
        return LinearOp(self.space, self.mat[i * d : (i + 1) * d, j * d : (j + 1) * d])

    @property
    def blocks(self) -> list:
        return [[self.block(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def apply(self, x: StackedCurve):
        if x.space != self.space or x.L != self.cols:
            raise ValueError("stacked curve does not match operator domain")
        y = self.mat @ x.coeffs
        if self.rows == 1:
            return Curve(self.space, y)
        return StackedCurve(self.space, self.rows, y)

    __call__ = apply

    def adjoint(self) -> "BlockOp":
        return BlockOp(self.space, self.cols, self.rows, self.mat.T)

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.mat, "fro"))

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.mat, 2))

    def nuclear_norm(self) -> float:
        return float(np.linalg.svd(self.mat, compute_uv=False).sum())

    def __add__(self, other: "BlockOp") -> "BlockOp":
        _check_block_compat(self, other)
        return BlockOp(self.space, self.rows, self.cols, self.mat + other.mat)

    def __sub__(self, other: "BlockOp") -> "BlockOp":
        _check_block_compat(self, other)
        return BlockOp(self.space, self.rows, self.cols, self.mat - other.mat)

    def __mul__(self, c: float) -> "BlockOp":
        return BlockOp(self.space, self.rows, self.cols, self.mat * float(c))

    __rmul__ = __mul__

    def __matmul__(self, other: "BlockOp") -> "BlockOp":
        _check_same_space(self, other)
        if self.cols != other.rows:
            raise ValueError(
                f"block shapes do not compose: {self.rows}x{self.cols} @ {other.rows}x{other.cols}"
            )
        return BlockOp(self.space, self.rows, other.cols, self.mat @ other.mat)


def _check_block_compat(a: BlockOp, b: BlockOp):
    _check_same_space(a, b)
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ValueError(
            f"block shapes differ: {a.rows}x{a.cols} vs {b.rows}x{b.cols}"
        )


@dataclass(frozen=True)
class OperatorNorms:
    op: float
    hs: float
    nuclear: float


def norms(A) -> OperatorNorms:
    """Operator, Hilbert-Schmidt, and nuclear norms of a LinearOp or BlockOp.

    Always satisfies op <= hs <= nuclear; a zero operator yields all zeros.
    """
    mat = A.mat
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix entries must be finite")
    sv = np.linalg.svd(mat, compute_uv=False)
    return OperatorNorms(
        op=float(sv[0]) if sv.size else 0.0,
        hs=float(np.linalg.norm(mat, "fro")),
        nuclear=float(sv.sum()),
    )


def tensor_product(x: Curve, y: Curve) -> LinearOp:
    """Tensorial product x (x) y := <x, .> y; matrix form y x^T in coefficients.

    Satisfies (x (x) y)(z) = <x, z> y and ||x (x) y||_HS = ||x|| ||y||; the
    adjoint is y (x) x.
    """
    if x.space != y.space:
        raise ValueError("tensor factors live in different spaces")
    return LinearOp(x.space, np.outer(y.coeffs, x.coeffs))


def block_assemble(blocks) -> BlockOp:
    """Assemble a rows x cols grid of LinearOp into a BlockOp.

    Raises on ragged grids or mismatched spaces.
    """
    grid = [list(row) for row in blocks]
    if not grid or not grid[0]:
        raise ValueError("block grid must be non-empty")
    rows = len(grid)
    cols = len(grid[0])
    if any(len(row) != cols for row in grid):
        raise ValueError("ragged block grid")
    space = grid[0][0].space
    for row in grid:
        for b in row:
            if b.space != space:
                raise ValueError("all blocks must share one space")
    flat = np.block([[b.mat for b in row] for row in grid])
    return BlockOp(space, rows, cols, flat)


def block_extract(B: BlockOp, i: int, j: int) -> LinearOp:
    """Extract block (i, j) of a BlockOp, 0-based."""
    return B.block(i, j)
