"""Empirical and population lagged (cross-)covariance operators of the stacked process.

Conventions: the stacked vector at time k is (X_k, X_{k-1}, ..., X_{k-L+1});
the stacked covariance averages over k = L..N with denominator N-L+1, the
lag-1 cross-covariance over k = L..N-1 with denominator N-L; the lag-h
operator uses denominator N-|h| and the adjoint convention
(C^h)^* = C^{-h}.  Accumulation is a deterministic sequential reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import EigenSystem, sym_eigen
from .operators import BlockOp, LinearOp
from .simulate import ModelSpec, SamplePath

#: truncation level for the causal-series tail in population operators
POP_TAIL_TOL = 1e-12
#: convergence level for the fAR(1) covariance fixed point
FAR1_FIXED_POINT_TOL = 1e-14


def _path_data(s: SamplePath, center: bool) -> np.ndarray:
    data = s.data
    if center:
        data = data - data.mean(axis=0)
    return data


def stacked_matrix(s: SamplePath, L: int, center: bool = False) -> np.ndarray:
    """Rows t = 0..N-L of (X_{L+t}, X_{L+t-1}, ..., X_{t+1}) coefficients, shape (N-L+1, L*dim)."""
    N = s.N
    if not 1 <= L <= N:
        raise ValueError(f"need 1 <= L <= N, got L={L}, N={N}")
    data = _path_data(s, center)
    return np.concatenate([data[L - 1 - j : N - j] for j in range(L)], axis=1)


def emp_cov_stacked(s: SamplePath, L: int, center: bool = False) -> BlockOp:
    """Empirical covariance of the stacked process, an L x L symmetric PSD block operator."""
    S = stacked_matrix(s, L, center)
    C = S.T @ S / S.shape[0]
    return BlockOp(s.space, L, L, C)


def emp_crosscov_lag1(s: SamplePath, L: int, center: bool = False) -> BlockOp:
    """Empirical lag-1 cross-covariance of the stacked process with the process, 1 x L blocks."""
    N = s.N
    if not 1 <= L < N:
        raise ValueError(f"need 1 <= L < N, got L={L}, N={N}")
    data = _path_data(s, center)
    S = np.concatenate([data[L - 1 - j : N - 1 - j] for j in range(L)], axis=1)
    D = data[L:].T @ S / (N - L)
    return BlockOp(s.space, 1, L, D)


def emp_lag_cov(s: SamplePath, h: int, center: bool = False) -> LinearOp:
    """Empirical lag-h covariance operator; C^{-h} is defined as the adjoint of C^{h}."""
    N = s.N
    if abs(h) >= N:
        raise ValueError(f"need |h| < N, got h={h}, N={N}")
    if h < 0:
        return emp_lag_cov(s, -h, center).adjoint()
    data = _path_data(s, center)
    mat = data[h:].T @ data[: N - h] / (N - h)
    return LinearOp(s.space, mat)


@dataclass(frozen=True, eq=False)
class CovEstimate:
    """Stacked covariance, lag-1 cross-covariance, and the eigensystem of the former."""

    C_stacked: BlockOp
    D_cross: BlockOp
    L: int
    N: int
    eigen: EigenSystem
    centered: bool

    def __post_init__(self):
        if self.C_stacked.rows != self.L or self.C_stacked.cols != self.L:
            raise ValueError("C_stacked block shape does not match L")
        if self.D_cross.rows != 1 or self.D_cross.cols != self.L:
            raise ValueError("D_cross must be a 1 x L block row")


def estimate_covariance(
    s: SamplePath, L: int, center: bool = False, k_max: int | None = None
) -> CovEstimate:
    """Compute the empirical stacked covariance, cross-covariance, and eigensystem."""
    C = emp_cov_stacked(s, L, center)
    D = emp_crosscov_lag1(s, L, center)
    eigen = sym_eigen(C, k_max=k_max)
    return CovEstimate(C, D, L, s.N, eigen, center)


# --- population operators ----------------------------------------------------


def causal_coefficients(model: ModelSpec, tail_tol: float = POP_TAIL_TOL, max_terms: int = 100_000):
    """Matrices phi_0 = I, phi_1, ... of the causal representation, truncated.

    For MA and truncated-LP models the list is exact and finite.  For models
    with an AR part, phi_m = beta_m + sum_i alpha_i phi_{m-i}; the list is cut
    once the geometric tail bound on the remaining Hilbert-Schmidt mass drops
    below `tail_tol`.
    """
    d = model.space.dim
    eye = np.eye(d)
    if model.kind == "wn":
        return [eye]
    if model.kind == "lp":
        return [eye] + [op.mat.copy() for op in model.lp_ops]
    if model.kind == "fma":
        return [eye] + [op.mat.copy() for op in model.ma_ops]

    ar = [op.mat for op in model.ar_ops]
    ma = [op.mat for op in model.ma_ops]
    p = len(ar)
    s = float(sum(np.linalg.norm(a, 2) for a in ar))
    if s >= 1.0:
        raise ValueError(f"sum of AR operator norms is {s:.6g} >= 1; series does not converge")
    phis = [eye]
    m = 0
    while True:
        m += 1
        acc = ma[m - 1].copy() if m <= len(ma) else np.zeros((d, d))
        for i, a in enumerate(ar, start=1):
            if m - i >= 0:
                acc = acc + a @ phis[m - i]
        phis.append(acc)
        if m >= max(p, len(ma)):
            if s == 0.0:
                break
            # ||phi_{m+r}|| <= R s^{ceil(r/p)} with R the max over the last p
            # norms, so the remaining HS mass is at most R p s / (1 - s)
            recent = max(np.linalg.norm(phis[-j], "fro") for j in range(1, p + 1))
            if recent * p * s / (1.0 - s) < tail_tol:
                break
        if m >= max_terms:
            raise ValueError("causal series did not reach the tail tolerance")
    return phis


def _population_lag_mats(model: ModelSpec, h_max: int) -> list:
    """Matrices of C^h for h = 0..h_max from the causal representation."""
    phis = causal_coefficients(model)
    ce = np.diag(model.noise.eig)
    out = []
    for h in range(h_max + 1):
        acc = np.zeros((model.space.dim,) * 2)
        for j in range(len(phis) - h):
            acc += phis[h + j] @ ce @ phis[j].T
        out.append(acc)
    return out


def far1_covariance_fixed_point(model: ModelSpec) -> LinearOp:
    """C_X of an fAR(1) model via the fixed point C = alpha C alpha^* + C_eps."""
    if model.kind != "far" or model.p != 1:
        raise ValueError("fixed-point covariance is defined for fAR(1) models")
    a = model.ar_ops[0].mat
    ce = np.diag(model.noise.eig)
    C = ce.copy()
    for _ in range(100_000):
        nxt = a @ C @ a.T + ce
        if np.max(np.abs(nxt - C)) < FAR1_FIXED_POINT_TOL * max(1.0, np.max(np.abs(nxt))):
            return LinearOp(model.space, nxt)
        C = nxt
    raise ValueError("fAR(1) covariance fixed point did not converge")


def population_operators(model: ModelSpec, L: int):
    """Population stacked covariance (L x L) and cross-covariance (1 x L) of the model.

    fAR(1) takes the fixed-point route C^h = alpha^h C_X; everything else goes
    through the truncated causal series.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    d = model.space.dim
    if model.kind == "far" and model.p == 1:
        CX = far1_covariance_fixed_point(model).mat
        a = model.ar_ops[0].mat
        lags = [CX]
        for _ in range(L):
            lags.append(a @ lags[-1])
    else:
        lags = _population_lag_mats(model, L)

    C = np.zeros((L * d, L * d))
    for a in range(L):
        for b in range(L):
            h = b - a
            blockmat = lags[h] if h >= 0 else lags[-h].T
            C[a * d : (a + 1) * d, b * d : (b + 1) * d] = blockmat
    D = np.concatenate([lags[j + 1] for j in range(L)], axis=1)
    return BlockOp(model.space, L, L, C), BlockOp(model.space, 1, L, D)
