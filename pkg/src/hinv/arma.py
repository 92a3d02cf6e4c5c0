"""Model-specific estimators for fAR(p), fMA(q), and fARMA(p,q) operators.

fAR fitting is the stacked Yule-Walker solve at depth L = p.  fMA fitting
converts fitted inverted-representation operators into causal ones.  fARMA
fitting runs a second ridge-regularized stage: the MA block row solves
PsiPrime_[q] = -B_q Pi against the block-Hankel matrix Pi of fitted psi
components, and the AR operators follow from the inversion recursion
alpha_i = psi_i - beta_i + sum_{j<i} beta_j psi_{i-j}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import EigenSystem, resolvent_from_eigen, spectral_projector, sym_eigen
from .invertible import (
    PsiEstimate,
    TuningPlan,
    choose_spectral_cut,
    default_stack_depth,
    fit_psi,
    fit_psi_default,
)
from .operators import BlockOp, LinearOp
from .simulate import SamplePath

#: second-stage spectra flatter than this ratio trigger an identifiability warning
PI_CONDITIONING_WARN = 1e-10


@dataclass(frozen=True)
class ArmaTuning:
    """First-stage plan plus the second-stage truncation M and ridge gamma."""

    base: TuningPlan
    M: int
    gamma: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class ArmaFit:
    """Fitted AR and MA operator lists plus the first-stage estimate and diagnostics."""

    alpha: list
    beta: list
    psi_source: PsiEstimate | None = None
    pi_hat: BlockOp | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)


def _second_stage_defaults(gram_eigen: EigenSystem, N: int):
    """M by the 95%-trace rule on the second-stage spectrum, gamma = zeta_M / sqrt(N)."""
    M = choose_spectral_cut(gram_eigen.values)
    zeta_M = float(gram_eigen.values[M - 1])
    gamma = zeta_M / math.sqrt(N) if zeta_M > 0.0 else 1e-12
    return M, gamma


def fit_far(s: SamplePath, p: int, tuning: TuningPlan | None = None,
            center: bool = False) -> ArmaFit:
    """Fit an fAR(p) model: the Yule-Walker system at stacking depth L = p."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if s.N <= p:
        raise ValueError(f"need N > p, got N={s.N}, p={p}")
    if tuning is None:
        est, tuning = fit_psi_default(s, center=center, L=p)
    else:
        if tuning.L != p:
            raise ValueError(f"fAR({p}) requires tuning with L = p, got L={tuning.L}")
        est = fit_psi(s, tuning, center=center)
    return ArmaFit(alpha=est.psi, beta=[], psi_source=est, diagnostics=dict(est.diagnostics))


def fit_fma(s: SamplePath, q: int, tuning: TuningPlan | None = None,
            L_override: int | None = None, center: bool = False) -> ArmaFit:
    """Fit an fMA(q) model: convert fitted psi components to causal operators."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    from .invertible import phi_from_psi

    if tuning is None:
        L = L_override if L_override is not None else default_stack_depth(s.N)
        est, tuning = fit_psi_default(s, center=center, L=L)
    else:
        if L_override is not None and L_override != tuning.L:
            raise ValueError("L_override conflicts with tuning.L")
        est = fit_psi(s, tuning, center=center)
    phi = phi_from_psi(est.psi, q)
    return ArmaFit(alpha=[], beta=phi[:q], psi_source=est, diagnostics=dict(est.diagnostics))


def farma11_from_psi(psi: list, M: int, gamma: float):
    """Second stage of the fARMA(1,1) estimator from fitted psi components.

    beta_1 = -psi_2 psi_1^* (psi_1 psi_1^* + gamma I)^{-1} Proj_M with the
    projector onto the leading M eigenfunctions of psi_1 psi_1^*, and
    alpha_1 = psi_1 - beta_1 by construction.
    """
    if len(psi) < 2:
        raise ValueError("fARMA(1,1) needs at least psi_1 and psi_2")
    if gamma <= 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    space = psi[0].space
    d = space.dim
    if not 1 <= M <= d:
        raise ValueError(f"M={M} out of range 1..{d}")
    psi1, psi2 = psi[0].mat, psi[1].mat
    gram = LinearOp(space, psi1 @ psi1.T)
    es = sym_eigen(gram, k_max=M)
    res = resolvent_from_eigen(es, gamma)
    proj = spectral_projector(es, M)
    beta1 = LinearOp(space, -psi2 @ psi1.T @ res.mat @ proj.mat)
    alpha1 = LinearOp(space, psi1 - beta1.mat)
    diagnostics = {
        "rho_M": float(es.values[M - 1]),
        "rho_1": float(es.values[0]),
        "second_stage_degenerate": es.degenerate,
    }
    return alpha1, beta1, es, diagnostics


def fit_farma11(s: SamplePath, tuning: ArmaTuning | None = None,
                center: bool = False) -> ArmaFit:
    """Fit an fARMA(1,1) model through the direct two-operator construction."""
    if tuning is None:
        L = max(default_stack_depth(s.N), 2)
        est, base = fit_psi_default(s, center=center, L=L)
        gram = LinearOp(s.space, est.psi_mats()[0] @ est.psi_mats()[0].T)
        M, gamma = _second_stage_defaults(sym_eigen(gram), s.N)
    else:
        base, M, gamma = tuning.base, tuning.M, tuning.gamma
        if base.L < 2:
            raise ValueError(f"fARMA(1,1) needs L >= 2, got L={base.L}")
        est = fit_psi(s, base, center=center)
    alpha1, beta1, es, diag = farma11_from_psi(est.psi, M, gamma)
    diag.update({"M": M, "gamma": gamma})
    return ArmaFit(alpha=[alpha1], beta=[beta1], psi_source=est, diagnostics=diag)


def build_pi_hat(psi: list, p: int, q: int) -> BlockOp:
    """Block-Hankel matrix of psi components: block (r, c) = psi_{p+2q-r-c} (1-based r, c).

    Blocks are constant along anti-diagonals; for q = 1 it reduces to the
    1 x 1 matrix (psi_p).
    """
    if p < 1 or q < 1:
        raise ValueError(f"need p >= 1 and q >= 1, got p={p}, q={q}")
    needed = p + 2 * q - 2
    if len(psi) < needed:
        raise ValueError(
            f"psi list too short: fARMA({p},{q}) needs psi_1..psi_{needed}, got {len(psi)}"
        )
    space = psi[0].space
    d = space.dim
    mat = np.empty((q * d, q * d))
    for r in range(1, q + 1):
        for c in range(1, q + 1):
            idx = p + 2 * q - r - c  # >= p >= 1
            mat[(r - 1) * d : r * d, (c - 1) * d : c * d] = psi[idx - 1].mat
    return BlockOp(space, q, q, mat)


def _psi_prime(psi: list, p: int, q: int, i: int) -> np.ndarray:
    """Flat matrix of the 1 x q block row (psi_{p+q+i-1}, ..., psi_{p+i})."""
    needed = p + q + i - 1
    if len(psi) < needed:
        raise ValueError(
            f"psi list too short: block row [{i}] needs psi_1..psi_{needed}, got {len(psi)}"
        )
    return np.concatenate([psi[p + q + i - 1 - c].mat for c in range(1, q + 1)], axis=1)


def fit_Bq(psi: list, p: int, q: int, M: int, gamma: float):
    """Ridge-regularized solve of PsiPrime_[q] = -B_q Pi for the MA block row.

    Returns the 1 x q block row B_hat, the eigensystem of Pi Pi^*, and
    conditioning diagnostics.  Sends B_hat -> 0 as gamma -> infinity.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    space = psi[0].space
    d = space.dim
    if not 1 <= M <= q * d:
        raise ValueError(f"M={M} out of range 1..{q * d}")
    Pi = build_pi_hat(psi, p, q)
    prime_q = _psi_prime(psi, p, q, q)
    gram = BlockOp(space, q, q, Pi.mat @ Pi.mat.T)
    es = sym_eigen(gram, k_max=M)
    res = resolvent_from_eigen(es, gamma)
    proj = spectral_projector(es, M)
    B_mat = -prime_q @ Pi.mat.T @ res.mat @ proj.mat
    B_hat = BlockOp(space, 1, q, B_mat)
    zeta_M = float(es.values[M - 1])
    zeta_1 = float(es.values[0])
    diagnostics = {
        "zeta_M": zeta_M,
        "zeta_1": zeta_1,
        "pi_conditioning": zeta_M / zeta_1 if zeta_1 > 0.0 else 0.0,
        "pi_near_singular": (zeta_1 <= 0.0) or (zeta_M / zeta_1 < PI_CONDITIONING_WARN),
        "second_stage_degenerate": es.degenerate,
    }
    return B_hat, es, Pi, diagnostics


def farma_pq_from_psi(psi: list, p: int, q: int, M: int, gamma: float,
                      psi_source: PsiEstimate | None = None) -> ArmaFit:
    """Assemble fARMA(p,q) operator estimates from fitted psi components.

    beta_j is component j of the second-stage block row; the AR operators
    come from the inversion recursion solved for alpha_i, with beta_i := 0
    past q.  For p = q = 1 this reproduces the direct fARMA(1,1) construction.
    """
    if len(psi) < p + 2 * q - 1:
        raise ValueError(
            f"psi list too short: fARMA({p},{q}) needs psi_1..psi_{p + 2 * q - 1}, got {len(psi)}"
        )
    space = psi[0].space
    B_hat, es, Pi, diagnostics = fit_Bq(psi, p, q, M, gamma)
    beta = [B_hat.block(0, j) for j in range(q)]
    psi_mats = [op.mat for op in psi]
    alpha = []
    for i in range(1, p + 1):
        acc = psi_mats[i - 1].copy()
        if i <= q:
            acc -= beta[i - 1].mat
        for j in range(1, min(i - 1, q) + 1):
            acc += beta[j - 1].mat @ psi_mats[i - j - 1]
        alpha.append(LinearOp(space, acc))
    diagnostics = dict(diagnostics)
    diagnostics.update({"M": M, "gamma": gamma})
    return ArmaFit(alpha=alpha, beta=beta, psi_source=psi_source, pi_hat=Pi,
                   diagnostics=diagnostics)


def fit_farma_pq(s: SamplePath, p: int, q: int, tuning: ArmaTuning | None = None,
                 center: bool = False) -> ArmaFit:
    """Fit an fARMA(p,q) model; degenerate orders delegate to fit_far / fit_fma."""
    if p < 0 or q < 0 or (p == 0 and q == 0):
        raise ValueError(f"invalid orders p={p}, q={q}")
    if q == 0:
        return fit_far(s, p, tuning.base if tuning else None, center=center)
    if p == 0:
        return fit_fma(s, q, tuning.base if tuning else None, center=center)

    min_L = p + 2 * q - 1
    if tuning is None:
        L = max(default_stack_depth(s.N), p + 2 * q + 3)
        est, base = fit_psi_default(s, center=center, L=L)
        Pi = build_pi_hat(est.psi, p, q)
        gram = BlockOp(s.space, q, q, Pi.mat @ Pi.mat.T)
        M, gamma = _second_stage_defaults(sym_eigen(gram), s.N)
    else:
        base, M, gamma = tuning.base, tuning.M, tuning.gamma
        if base.L < min_L:
            raise ValueError(
                f"fARMA({p},{q}) needs L >= {min_L}, got L={base.L}"
            )
        est = fit_psi(s, base, center=center)
    return farma_pq_from_psi(est.psi, p, q, M, gamma, psi_source=est)
