"""Symmetric eigendecomposition, ridge resolvents, and spectral projectors.

Everything here is deterministic given the input: eigenvalues are sorted
descending, exact ties are ordered by the lexicographically largest
eigenvector, and every eigenvector is normalized to have its first nonzero
entry positive.  The estimators downstream are invariant under eigenvector
sign flips, so the convention only pins reproducible output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import BlockOp, LinearOp

SYM_TOL = 1e-10          # relative asymmetry tolerated before erroring
PSD_TOL = 1e-8           # relative negativity tolerated before erroring
DEGENERATE_GAP_TOL = 1e-12  # gaps below this times lambda_1 flag degeneracy


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Descending eigenvalues and orthonormal eigenvectors of a symmetric PSD operator.

    Gap statistics follow the convention lambda_{n+1} := 0 past the last
    eigenvalue; `degenerate` is set when any gap among the leading `k_max`
    falls below 1e-12 * lambda_1.  Negative round-off eigenvalues are clamped
    to zero and their total magnitude recorded in `clamped_mass`.
    """

    values: np.ndarray      # clamped, non-increasing
    vectors: np.ndarray     # orthonormal columns aligned with values
    space: object
    rows: int               # operator acts on H^rows
    is_block: bool
    k_max: int
    clamped_mass: float
    degenerate: bool
    k_clamped: bool = False

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def value_after(self, j: int) -> float:
        """lambda_{j+1} with the zero extension past the spectrum (j is 1-based)."""
        return float(self.values[j]) if j < self.n else 0.0

    def gap(self, j: int) -> float:
        """lambda_j - lambda_{j+1} for 1-based j."""
        if not 1 <= j <= self.n:
            raise ValueError(f"gap index {j} out of range 1..{self.n}")
        return float(self.values[j - 1]) - self.value_after(j)

    def alpha(self, j: int) -> float:
        """Isolation gap of eigenvalue j: alpha_1 = l1-l2, else min of adjacent gaps."""
        if j == 1:
            return self.gap(1)
        return min(self.gap(j - 1), self.gap(j))

    def Lambda(self, k: int) -> float:
        """Maximal reciprocal gap among the leading k eigenvalues (inf if a gap is 0)."""
        if not 1 <= k <= self.n:
            raise ValueError(f"k={k} out of range 1..{self.n}")
        gaps = np.array([self.gap(j) for j in range(1, k + 1)])
        if np.any(gaps <= 0.0):
            return float("inf")
        return float(np.max(1.0 / gaps))


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0.0:
            out[:, j] = -col
    return out


def _order_ties(values: np.ndarray, vectors: np.ndarray):
    """Within runs of exactly equal eigenvalues, put the lexicographically largest vector first."""
    n = values.shape[0]
    order = list(range(n))
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j > i:
            tied = sorted(order[i : j + 1], key=lambda c: tuple(-vectors[:, c]))
            order[i : j + 1] = tied
        i = j + 1
    return values[order], vectors[:, order]


def sym_eigen(A, k_max: int | None = None) -> EigenSystem:
    """Full symmetric eigendecomposition of a LinearOp or BlockOp.

    The input is symmetrized by averaging with its adjoint; asymmetry beyond
    1e-10 (relative) is an error, as is an eigenvalue below -1e-8 relative to
    the largest.  `k_max` limits how many leading gaps feed the degeneracy
    flag; values beyond the dimension are clamped with `k_clamped` set.
    """
    mat = A.mat
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"operator must be square, got shape {mat.shape}")
    n = mat.shape[0]
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    asym = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
    if asym > SYM_TOL * max(scale, 1.0):
        raise ValueError(
            f"operator is not symmetric: max asymmetry {asym:.3e} exceeds tolerance"
        )
    sym = 0.5 * (mat + mat.T)

    raw_values, vecs = np.linalg.eigh(sym)
    values = raw_values[::-1].copy()
    vecs = vecs[:, ::-1].copy()

    floor = -PSD_TOL * max(float(np.max(np.abs(values), initial=0.0)), 1.0)
    if np.min(values, initial=0.0) < floor:
        raise ValueError(
            f"operator is not PSD: eigenvalue {np.min(values):.6e} below tolerance"
        )
    clamped_mass = float(-values[values < 0.0].sum())
    values = np.maximum(values, 0.0)

    vecs = _normalize_signs(vecs)
    values, vecs = _order_ties(values, vecs)

    if k_max is None:
        k_max = n
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    k_clamped = k_max > n
    k_eff = min(k_max, n)

    lam1 = float(values[0]) if n else 0.0
    ext = np.concatenate([values, [0.0]])
    gaps = ext[:k_eff] - ext[1 : k_eff + 1]
    degenerate = (
        bool(np.any(gaps < DEGENERATE_GAP_TOL * lam1)) if lam1 > 0 else bool(np.any(gaps <= 0.0))
    )

    values.setflags(write=False)
    vecs.setflags(write=False)
    return EigenSystem(
        values=values,
        vectors=vecs,
        space=A.space,
        rows=getattr(A, "rows", 1),
        is_block=isinstance(A, BlockOp),
        k_max=k_eff,
        clamped_mass=clamped_mass,
        degenerate=degenerate,
        k_clamped=k_clamped,
    )


def _wrap_like(es: EigenSystem, mat: np.ndarray):
    if es.is_block:
        return BlockOp(es.space, es.rows, es.rows, mat)
    return LinearOp(es.space, mat)


def resolvent_from_eigen(es: EigenSystem, theta: float):
    """(A + theta I)^{-1} assembled from an eigendecomposition of A."""
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    inv = 1.0 / (es.values + theta)
    return _wrap_like(es, (es.vectors * inv) @ es.vectors.T)


def ridge_resolvent(A, theta: float, eigen: EigenSystem | None = None):
    """Tikhonov resolvent (A + theta I)^{-1} of a symmetric PSD operator.

    Computed through the eigendecomposition, so the result is symmetric with
    eigenvalues (lambda_j + theta)^{-1} and commutes with spectral projectors
    built from the same EigenSystem.
    """
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    es = eigen if eigen is not None else sym_eigen(A)
    return resolvent_from_eigen(es, theta)


def spectral_projector(es: EigenSystem, K: int):
    """Orthogonal projector onto the span of the leading K eigenvectors.

    Idempotent, symmetric, rank K, and bitwise invariant under sign flips of
    any eigenvector.
    """
    if not 1 <= K <= es.n:
        raise ValueError(f"K={K} out of range 1..{es.n}")
    V = es.vectors[:, :K]
    return _wrap_like(es, V @ V.T)


@dataclass(frozen=True)
class GapStats:
    Lambda_K: float
    alpha: np.ndarray = field(repr=False)
    degenerate: bool


def eigen_gap_stats(es: EigenSystem, K: int) -> GapStats:
    """Reciprocal-gap statistic Lambda_K and isolation gaps alpha_j for j <= K.

    Requires K < number of eigenvalues so every gap uses an actual successor.
    Degeneracy means some leading gap is below 1e-12 * lambda_1.
    """
    if not 1 <= K < es.n:
        raise ValueError(f"K={K} out of range 1..{es.n - 1}")
    gaps = np.array([es.gap(j) for j in range(1, K + 1)])
    alpha = np.array([es.alpha(j) for j in range(1, K + 1)])
    lam1 = float(es.values[0])
    degenerate = bool(np.any(gaps < DEGENERATE_GAP_TOL * lam1)) if lam1 > 0 else True
    with np.errstate(divide="ignore"):
        Lambda_K = float(np.max(np.where(gaps > 0.0, 1.0 / gaps, np.inf)))
    return GapStats(Lambda_K=Lambda_K, alpha=alpha, degenerate=degenerate)
