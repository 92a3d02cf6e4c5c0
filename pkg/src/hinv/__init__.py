"""Yule-Walker/Tikhonov estimation of invertible linear processes in discretized Hilbert spaces."""

from .arma import (
    ArmaFit,
    ArmaTuning,
    build_pi_hat,
    farma11_from_psi,
    farma_pq_from_psi,
    fit_Bq,
    fit_far,
    fit_farma11,
    fit_farma_pq,
    fit_fma,
)
from .covariance import (
    CovEstimate,
    emp_cov_stacked,
    emp_crosscov_lag1,
    emp_lag_cov,
    estimate_covariance,
    population_operators,
)
from .eigen import (
    EigenSystem,
    eigen_gap_stats,
    ridge_resolvent,
    spectral_projector,
    sym_eigen,
)
from .invertible import (
    PsiEstimate,
    TuningPlan,
    default_stack_depth,
    default_tuning,
    fit_psi,
    fit_psi_default,
    fit_psi_from_operators,
    phi_from_psi,
    population_psi,
    psi_tail_norms,
)
from .operators import (
    BlockOp,
    LinearOp,
    block_assemble,
    block_extract,
    norms,
    tensor_product,
)
from .simulate import (
    ModelSpec,
    NoiseSpec,
    SamplePath,
    draw_white_noise,
    poly_decay_eigenvalues,
    random_hs_operator,
    simulate,
)
from .spaces import BasisSpace, Curve, StackedCurve, stack_curves

__version__ = "0.1.0"

__all__ = [
    "ArmaFit",
    "ArmaTuning",
    "BasisSpace",
    "BlockOp",
    "CovEstimate",
    "Curve",
    "EigenSystem",
    "LinearOp",
    "ModelSpec",
    "NoiseSpec",
    "PsiEstimate",
    "SamplePath",
    "StackedCurve",
    "TuningPlan",
    "block_assemble",
    "block_extract",
    "build_pi_hat",
    "default_stack_depth",
    "default_tuning",
    "draw_white_noise",
    "eigen_gap_stats",
    "emp_cov_stacked",
    "emp_crosscov_lag1",
    "emp_lag_cov",
    "estimate_covariance",
    "farma11_from_psi",
    "farma_pq_from_psi",
    "fit_Bq",
    "fit_far",
    "fit_farma11",
    "fit_farma_pq",
    "fit_fma",
    "fit_psi",
    "fit_psi_default",
    "fit_psi_from_operators",
    "norms",
    "phi_from_psi",
    "poly_decay_eigenvalues",
    "population_operators",
    "population_psi",
    "psi_tail_norms",
    "random_hs_operator",
    "ridge_resolvent",
    "simulate",
    "spectral_projector",
    "stack_curves",
    "sym_eigen",
    "tensor_product",
]
