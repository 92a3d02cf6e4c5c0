"""Discretized separable Hilbert space: curves as orthonormal basis coefficients.

All algebra is exact in coefficient space; the basis is orthonormal, so inner
products reduce to Euclidean dot products.  The basis tag only matters when a
curve is evaluated as a function on [0, 1] for I/O or plotting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIS_IDS = ("fourier", "indicator-grid")


def _frozen_vector(x, length: int | None = None) -> np.ndarray:
    v = np.array(x, dtype=float, copy=True).reshape(-1)
    if length is not None and v.shape[0] != length:
        raise ValueError(f"expected vector of length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class BasisSpace:
    """Finite orthonormal-basis truncation of a separable Hilbert space.

    Parameters
    ----------
    dim : int
        Number of retained basis coefficients (>= 1).
    basis_id : str
        "fourier" or "indicator-grid"; used only to evaluate curves on [0, 1].
    """

    dim: int
    basis_id: str = "fourier"

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if self.basis_id not in BASIS_IDS:
            raise ValueError(f"unknown basis_id {self.basis_id!r}; expected one of {BASIS_IDS}")
        object.__setattr__(self, "dim", int(self.dim))

    def __eq__(self, other):
        return (
            isinstance(other, BasisSpace)
            and self.dim == other.dim
            and self.basis_id == other.basis_id
        )

    def __hash__(self):
        return hash((self.dim, self.basis_id))

    def basis_values(self, t: np.ndarray) -> np.ndarray:
        """Evaluate the dim basis functions at points t in [0, 1], shape (dim, len(t))."""
        t = np.asarray(t, dtype=float).reshape(-1)
        out = np.empty((self.dim, t.size))
        if self.basis_id == "fourier":
            out[0] = 1.0
            for j in range(1, self.dim):
                k = (j + 1) // 2
                if j % 2 == 1:
                    out[j] = np.sqrt(2.0) * np.cos(2.0 * np.pi * k * t)
                else:
                    out[j] = np.sqrt(2.0) * np.sin(2.0 * np.pi * k * t)
        else:  # indicator-grid: dim cells, L2-normalized indicators
            cell = np.minimum((t * self.dim).astype(int), self.dim - 1)
            out[:] = 0.0
            out[cell, np.arange(t.size)] = np.sqrt(float(self.dim))
        return out


@dataclass(frozen=True, eq=False)
class Curve:
    """Element of the discretized space: coefficient vector w.r.t. the fixed basis."""

    space: BasisSpace
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen_vector(self.coeffs, self.space.dim))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "Curve") -> float:
        if self.space != other.space:
            raise ValueError("curves live in different spaces")
        return float(self.coeffs @ other.coeffs)

    def evaluate(self, t) -> np.ndarray:
        """Evaluate the curve as a function on [0, 1] at points t."""
        return self.coeffs @ self.space.basis_values(t)

    def __add__(self, other: "Curve") -> "Curve":
        if self.space != other.space:
            raise ValueError("curves live in different spaces")
        return Curve(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other: "Curve") -> "Curve":
        if self.space != other.space:
            raise ValueError("curves live in different spaces")
        return Curve(self.space, self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "Curve":
        return Curve(self.space, self.coeffs * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class StackedCurve:
    """Point of the Cartesian power H^L, blocks ordered (X_k, X_{k-1}, ..., X_{k-L+1})."""

    space: BasisSpace
    L: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(
            self, "coeffs", _frozen_vector(self.coeffs, self.L * self.space.dim)
        )

    def block(self, j: int) -> Curve:
        """Return block j (0-based): block 0 is the most recent curve."""
        if not 0 <= j < self.L:
            raise ValueError(f"block index {j} out of range for L={self.L}")
        d = self.space.dim
        return Curve(self.space, self.coeffs[j * d : (j + 1) * d])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def stack_curves(curves) -> StackedCurve:
    """Stack curves (most recent first) into a point of H^L."""
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one curve to stack")
    space = curves[0].space
    for c in curves:
        if c.space != space:
            raise ValueError("all stacked curves must share one space")
    return StackedCurve(space, len(curves), np.concatenate([c.coeffs for c in curves]))
