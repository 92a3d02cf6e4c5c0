"""Ridge-regularized Yule-Walker estimation of the inverted-representation operators.

The estimator solves the stacked Yule-Walker system with a Tikhonov resolvent
and a spectral cut-off:

    Psi_hat = D_hat (C_hat + theta I)^{-1} Proj_K,

where C_hat and D_hat are the empirical stacked covariance and lag-1
cross-covariance, and Proj_K projects onto the leading K eigenfunctions of
C_hat.  The causal-representation operators follow from the fitted components
through the convolution recursion phi_i = sum_{j<=i} psi_j phi_{i-j}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covariance import emp_cov_stacked, emp_crosscov_lag1
from .eigen import EigenSystem, resolvent_from_eigen, spectral_projector, sym_eigen
from .operators import BlockOp, LinearOp
from .simulate import ModelSpec, SamplePath

#: spectral-cut fraction used by the default tuning schedule
DEFAULT_TRACE_FRACTION = 0.95
#: eigenvalues below this fraction of the top one are never kept
DEFAULT_EIGEN_FLOOR = 1e-6


@dataclass(frozen=True)
class TuningPlan:
    """Stacking depth L, spectral truncation K, and ridge parameter theta."""

    L: int
    K: int
    theta: float
    schedule_id: str = "manual"

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not self.theta > 0.0:
            raise ValueError(f"theta must be > 0, got {self.theta}")


@dataclass(frozen=True, eq=False)
class PsiEstimate:
    """Fitted inverted-representation operators and the tuning that produced them."""

    Psi_L: BlockOp                 # 1 x L block row
    tuning: TuningPlan
    eigen: EigenSystem
    diagnostics: dict = field(default_factory=dict)

    @property
    def psi(self) -> list:
        return [self.Psi_L.block(0, j) for j in range(self.Psi_L.cols)]

    def psi_mats(self) -> list:
        d = self.Psi_L.space.dim
        return [self.Psi_L.mat[:, j * d : (j + 1) * d] for j in range(self.Psi_L.cols)]


def _iceil(x: float) -> int:
    return math.ceil(x - 1e-9)


def default_stack_depth(N: int) -> int:
    """Default L = max(1, ceil(N^{1/4})), which keeps L = o(N^{1/3})."""
    return max(1, _iceil(N ** 0.25))


def choose_spectral_cut(values: np.ndarray, fraction: float = DEFAULT_TRACE_FRACTION,
                        floor: float = DEFAULT_EIGEN_FLOOR) -> int:
    """Smallest k capturing `fraction` of the trace, capped where the spectrum
    falls below `floor` times the top eigenvalue."""
    v = np.asarray(values, dtype=float)
    total = float(v.sum())
    if total <= 0.0:
        return 1
    csum = np.cumsum(v)
    k_trace = int(np.searchsorted(csum, fraction * total) + 1)
    k_floor = int(np.sum(v >= floor * v[0]))
    return max(1, min(k_trace, k_floor, v.size))


def default_tuning(N: int, dim: int, eigen: EigenSystem, L: int | None = None) -> TuningPlan:
    """Concrete default schedule: L = ceil(N^{1/4}), K by 95% of trace, theta = lambda_K / sqrt(N).

    The eigensystem must belong to the stacked covariance at the chosen L.
    """
    if N < 20:
        raise ValueError(f"default tuning needs N >= 20, got {N}")
    L = default_stack_depth(N) if L is None else int(L)
    if eigen.n != L * dim:
        raise ValueError(
            f"eigensystem has {eigen.n} values but L*dim = {L * dim}; "
            "compute it from the stacked covariance at this L"
        )
    K = choose_spectral_cut(eigen.values)
    lam_K = float(eigen.values[K - 1])
    theta = lam_K / math.sqrt(N) if lam_K > 0.0 else 1e-12
    return TuningPlan(L=L, K=K, theta=theta, schedule_id="default-v1")


def fit_psi_from_operators(
    C_stacked: BlockOp,
    D_cross: BlockOp,
    tuning: TuningPlan,
    eigen: EigenSystem | None = None,
) -> PsiEstimate:
    """Run the ridge-regularized Yule-Walker solve on given covariance operators.

    Exposed separately so population operators can be injected in place of the
    empirical ones (exact-recovery checks) and so tests can substitute an
    eigensystem with flipped eigenvector signs.
    """
    L = tuning.L
    if C_stacked.rows != L or C_stacked.cols != L:
        raise ValueError(f"C_stacked is {C_stacked.rows}x{C_stacked.cols}, expected {L}x{L}")
    if D_cross.rows != 1 or D_cross.cols != L:
        raise ValueError(f"D_cross is {D_cross.rows}x{D_cross.cols}, expected 1x{L}")
    n = L * C_stacked.space.dim
    if tuning.K > n:
        raise ValueError(f"K={tuning.K} exceeds stacked dimension {n}")

    es = eigen if eigen is not None else sym_eigen(C_stacked, k_max=tuning.K)
    resolvent = resolvent_from_eigen(es, tuning.theta)
    projector = spectral_projector(es, tuning.K)
    Psi_mat = D_cross.mat @ resolvent.mat @ projector.mat
    Psi_L = BlockOp(C_stacked.space, 1, L, Psi_mat)

    lam_K = float(es.values[tuning.K - 1])
    diagnostics = {
        "lambda_K": lam_K,
        "Lambda_K": es.Lambda(tuning.K),
        "clamped_mass": es.clamped_mass,
        "degenerate": es.degenerate,
    }
    return PsiEstimate(Psi_L=Psi_L, tuning=tuning, eigen=es, diagnostics=diagnostics)


def fit_psi(s: SamplePath, tuning: TuningPlan, center: bool = False) -> PsiEstimate:
    """Fit the inverted-representation operators from a sample path."""
    if s.N <= tuning.L:
        raise ValueError(f"need N > L, got N={s.N}, L={tuning.L}")
    C = emp_cov_stacked(s, tuning.L, center)
    D = emp_crosscov_lag1(s, tuning.L, center)
    return fit_psi_from_operators(C, D, tuning)


def fit_psi_default(s: SamplePath, center: bool = False, L: int | None = None):
    """Fit with the default tuning schedule; returns (estimate, tuning)."""
    L = default_stack_depth(s.N) if L is None else L
    if s.N <= L:
        raise ValueError(f"need N > L, got N={s.N}, L={L}")
    C = emp_cov_stacked(s, L, center)
    D = emp_crosscov_lag1(s, L, center)
    es = sym_eigen(C)
    tuning = default_tuning(s.N, s.space.dim, es, L=L)
    return fit_psi_from_operators(C, D, tuning, eigen=es), tuning


# --- population recursions ----------------------------------------------------


def _psi_mats_from_arma(ar, ma, j_max: int, dim: int) -> list:
    """psi_i = alpha_i + beta_i - sum_{j=1}^{min(i-1,q)} beta_j psi_{i-j}."""
    psis = []
    for i in range(1, j_max + 1):
        acc = np.zeros((dim, dim))
        if i <= len(ar):
            acc += ar[i - 1]
        if i <= len(ma):
            acc += ma[i - 1]
        for j in range(1, min(i - 1, len(ma)) + 1):
            acc -= ma[j - 1] @ psis[i - j - 1]
        psis.append(acc)
    return psis


def population_psi(model: ModelSpec, j_max: int) -> list:
    """Exact inverted-representation operators psi_1..psi_{j_max} of the model.

    fAR(p) gives (alpha_1, ..., alpha_p, 0, ...); MA-bearing models use the
    inversion recursion, which converges geometrically under the declared
    invertibility bound; truncated causal LPs are inverted through
    psi_i = phi_i - sum_{j<i} psi_j phi_{i-j} and require sum ||phi||_op < 1.
    """
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    d = model.space.dim
    zero = np.zeros((d, d))
    if model.kind == "wn":
        mats = [zero] * j_max
    elif model.kind == "far":
        mats = [op.mat for op in model.ar_ops[:j_max]]
        mats += [zero] * (j_max - len(mats))
    elif model.kind in ("fma", "farma"):
        ma_sum = sum(op.op_norm() for op in model.ma_ops)
        if ma_sum >= 1.0:
            raise ValueError(
                f"sum of MA operator norms is {ma_sum:.6g} >= 1; inversion diverges"
            )
        mats = _psi_mats_from_arma(
            [op.mat for op in model.ar_ops], [op.mat for op in model.ma_ops], j_max, d
        )
    else:  # lp
        lp_sum = sum(op.op_norm() for op in model.lp_ops)
        if lp_sum >= 1.0:
            raise ValueError(
                f"sum of LP operator norms is {lp_sum:.6g} >= 1; inversion diverges"
            )
        phis = [op.mat for op in model.lp_ops]
        mats = []
        for i in range(1, j_max + 1):
            acc = phis[i - 1].copy() if i <= len(phis) else zero.copy()
            for j in range(1, i):
                if i - j <= len(phis):
                    acc -= mats[j - 1] @ phis[i - j - 1]
            mats.append(acc)
    return [LinearOp(model.space, m) for m in mats]


def psi_tail_norms(model: ModelSpec, L: int, horizon: int = 200) -> dict:
    """Diagnostic: HS norms of the exact psi components beyond the stacking depth.

    Quantifies, for a simulated model, how much inverted-representation mass
    the depth-L fit ignores.  `horizon` caps the enumeration; the components
    decay geometrically for invertible models, so the default covers the mass
    down to numerical noise.
    """
    if horizon <= L:
        raise ValueError(f"horizon must exceed L, got horizon={horizon}, L={L}")
    psi = population_psi(model, horizon)
    tail = [float(np.linalg.norm(op.mat, "fro")) for op in psi[L:]]
    return {"L": L, "horizon": horizon, "tail_hs_norms": tail, "tail_hs_sum": float(sum(tail))}


def phi_from_psi(psi: list, i_max: int) -> list:
    """Causal-representation operators phi_1..phi_{i_max} from inverted ones.

    phi_0 = I and phi_i = sum_{j=1}^{i} psi_j phi_{i-j}, with the psi list
    padded by zeros past its length.
    """
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")
    if not psi:
        raise ValueError("psi list must be non-empty")
    space = psi[0].space
    d = space.dim
    psi_mats = [op.mat for op in psi]
    phis = [np.eye(d)]
    for i in range(1, i_max + 1):
        acc = np.zeros((d, d))
        for j in range(1, min(i, len(psi_mats)) + 1):
            acc += psi_mats[j - 1] @ phis[i - j]
        phis.append(acc)
    return [LinearOp(space, m) for m in phis[1:]]
