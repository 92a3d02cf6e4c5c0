"""Samplers for functional white noise, causal linear processes, and fAR/fMA/fARMA models.

Innovations are i.i.d. centered Gaussian curves whose covariance is diagonal
in the coefficient basis; that is a strictly stationary ergodic white noise
with finite fourth moment, and it keeps exact population formulas available
for the test oracles.

Seeding layout: the N output innovations are always the first N draws of the
generator, and any lead-in innovations (moving-average history, autoregressive
burn-in) are drawn afterwards and prepended in time.  Consequently a model
whose operators are all zero reproduces the plain white-noise path bitwise for
the same seed, and dropping the MA (resp. AR) part of an fARMA model
reproduces the fAR (resp. fMA) path bitwise.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import LinearOp
from .spaces import BasisSpace, Curve

MODEL_KINDS = ("far", "fma", "farma", "lp", "wn")

#: burn-in is chosen so the AR transient decays below this level
BURNIN_DECAY = 1e-8
BURNIN_FLOOR = 500


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """White-noise law: eigenvalues of the innovation covariance, plus a seed.

    The eigenvalues are the variances of the independent Gaussian coefficient
    loadings; they must be strictly positive (injective covariance) and sorted
    descending.
    """

    space: BasisSpace
    eig: np.ndarray
    seed: int = 0

    def __post_init__(self):
        eig = np.array(self.eig, dtype=float, copy=True).reshape(-1)
        if eig.shape[0] != self.space.dim:
            raise ValueError(
                f"need {self.space.dim} covariance eigenvalues, got {eig.shape[0]}"
            )
        if not np.all(np.isfinite(eig)) or np.any(eig <= 0.0):
            raise ValueError("covariance eigenvalues must be finite and > 0")
        if np.any(np.diff(eig) > 0.0):
            raise ValueError("covariance eigenvalues must be sorted descending")
        eig.setflags(write=False)
        object.__setattr__(self, "eig", eig)
        object.__setattr__(self, "seed", int(self.seed))

    def with_seed(self, seed: int) -> "NoiseSpec":
        return NoiseSpec(self.space, self.eig, seed)

    def covariance(self) -> LinearOp:
        return LinearOp(self.space, np.diag(self.eig))


def _op_norm_sum(ops) -> float:
    return float(sum(op.op_norm() for op in ops))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Declarative model: fAR(p), fMA(q), fARMA(p,q), truncated causal LP, or white noise.

    Stationarity of the AR part is enforced through the sufficient bound
    sum_i ||alpha_i||_op < 1, and invertibility of the MA part through
    sum_j ||beta_j||_op < 1.
    """

    kind: str
    noise: NoiseSpec
    ar_ops: tuple = ()
    ma_ops: tuple = ()
    lp_ops: tuple = ()

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        object.__setattr__(self, "ar_ops", tuple(self.ar_ops))
        object.__setattr__(self, "ma_ops", tuple(self.ma_ops))
        object.__setattr__(self, "lp_ops", tuple(self.lp_ops))
        space = self.noise.space
        for name, ops in (("ar", self.ar_ops), ("ma", self.ma_ops), ("lp", self.lp_ops)):
            for op in ops:
                if op.space != space:
                    raise ValueError(f"{name} operator space does not match noise space")
        if self.kind == "wn" and (self.ar_ops or self.ma_ops or self.lp_ops):
            raise ValueError("white-noise model takes no operators")
        if self.kind == "far" and (self.ma_ops or self.lp_ops):
            raise ValueError("far model takes only ar operators")
        if self.kind == "fma" and (self.ar_ops or self.lp_ops):
            raise ValueError("fma model takes only ma operators")
        if self.kind == "farma" and self.lp_ops:
            raise ValueError("farma model takes ar and ma operators only")
        if self.kind == "lp" and (self.ar_ops or self.ma_ops):
            raise ValueError("lp model takes only lp operators")
        ar_sum = _op_norm_sum(self.ar_ops)
        ma_sum = _op_norm_sum(self.ma_ops)
        if self.kind in ("far", "farma") and ar_sum >= 1.0:
            raise ValueError(
                f"sum of AR operator norms is {ar_sum:.6g} >= 1; "
                "stationarity bound violated"
            )
        if self.kind in ("fma", "farma") and ma_sum >= 1.0:
            raise ValueError(
                f"sum of MA operator norms is {ma_sum:.6g} >= 1; "
                "invertibility bound violated"
            )

    @property
    def space(self) -> BasisSpace:
        return self.noise.space

    @property
    def p(self) -> int:
        return len(self.ar_ops)

    @property
    def q(self) -> int:
        return len(self.ma_ops)

    def with_seed(self, seed: int) -> "ModelSpec":
        return ModelSpec(self.kind, self.noise.with_seed(seed), self.ar_ops, self.ma_ops, self.lp_ops)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.kind.encode())
        h.update(np.int64(self.space.dim).tobytes())
        h.update(self.space.basis_id.encode())
        h.update(np.ascontiguousarray(self.noise.eig).tobytes())
        for ops in (self.ar_ops, self.ma_ops, self.lp_ops):
            h.update(np.int64(len(ops)).tobytes())
            for op in ops:
                h.update(np.ascontiguousarray(op.mat).tobytes())
        return h.hexdigest()[:16]

    def default_burnin(self) -> int:
        """Smallest b with (sum ||alpha_i||_op)^{b/p} < 1e-8, floored at 500.

        Models with no effective AR memory need no warm-up: the MA part is
        handled exactly through lead-in draws, so they return 0.
        """
        if self.kind in ("wn", "fma", "lp") or not self.ar_ops:
            return 0
        s = _op_norm_sum(self.ar_ops)
        if s == 0.0:
            return 0
        b = math.ceil(self.p * math.log(BURNIN_DECAY) / math.log(s))
        return max(BURNIN_FLOOR, b)


@dataclass(frozen=True, eq=False)
class SamplePath:
    """N consecutive curves plus a provenance record of how they were made."""

    space: BasisSpace
    data: np.ndarray  # (N, dim)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim != 2 or data.shape[1] != self.space.dim:
            raise ValueError(f"data must be (N, {self.space.dim}), got {data.shape}")
        if data.shape[0] < 1:
            raise ValueError("sample must contain at least one curve")
        if not np.all(np.isfinite(data)):
            raise ValueError("sample values must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def N(self) -> int:
        return int(self.data.shape[0])

    def curve(self, k: int) -> Curve:
        """Curve at 1-based time index k (the sample is X_1, ..., X_N)."""
        if not 1 <= k <= self.N:
            raise ValueError(f"time index {k} out of range 1..{self.N}")
        return Curve(self.space, self.data[k - 1])

    @property
    def curves(self) -> list:
        return [Curve(self.space, row) for row in self.data]

    def centered(self) -> "SamplePath":
        mean = self.data.mean(axis=0)
        prov = dict(self.provenance)
        prov["centered"] = True
        return SamplePath(self.space, self.data - mean, prov)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _draw_gaussian(rng, n, eig) -> np.ndarray:
    return rng.standard_normal((n, eig.shape[0])) * np.sqrt(eig)


def draw_white_noise(spec: NoiseSpec, N: int) -> SamplePath:
    """I.i.d. centered Gaussian curves with the given diagonal covariance."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    rng = _generator(spec.seed)
    data = _draw_gaussian(rng, N, spec.eig)
    return SamplePath(
        spec.space,
        data,
        {"kind": "wn", "seed": spec.seed, "N": N, "burnin": 0, "dim": spec.space.dim},
    )


def simulate(model: ModelSpec, N: int, burnin: int | None = None) -> SamplePath:
    """Simulate N curves from the model after discarding the transient.

    fMA and causal-LP paths are exact: enough past innovations are drawn to
    cover every moving-average term.  Recursive (AR) models start from the
    zero state and discard `burnin` steps (default: enough for the AR
    transient to decay below 1e-8, floored at 500; an explicit burnin is
    raised to the MA order so moving-average terms stay exact).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if burnin is not None and burnin < 0:
        raise ValueError(f"burnin must be >= 0, got {burnin}")

    noise = model.noise
    rng = _generator(noise.seed)
    main = _draw_gaussian(rng, N, noise.eig)

    if model.kind == "wn":
        lead = 0 if burnin is None else burnin
    elif model.kind == "fma":
        lead = model.q + (0 if burnin is None else burnin)
    elif model.kind == "lp":
        lead = len(model.lp_ops) + (0 if burnin is None else burnin)
    else:  # far / farma: burn-in for the recursion, but never less than the MA history
        base = model.default_burnin() if burnin is None else burnin
        lead = max(base, model.q)

    if lead > 0:
        past = _draw_gaussian(rng, lead, noise.eig)
        eps = np.concatenate([past, main], axis=0)
    else:
        eps = main

    T = eps.shape[0]
    if model.kind in ("wn",):
        X = eps
    elif model.kind == "lp":
        X = eps.copy()
        for j, op in enumerate(model.lp_ops, start=1):
            X[j:] += eps[:T - j] @ op.mat.T
    elif model.kind == "fma":
        X = eps.copy()
        for j, op in enumerate(model.ma_ops, start=1):
            X[j:] += eps[:T - j] @ op.mat.T
    else:  # far / farma: Z holds the innovation-plus-MA part, then recurse
        Z = eps.copy()
        for j, op in enumerate(model.ma_ops, start=1):
            Z[j:] += eps[:T - j] @ op.mat.T
        X = np.zeros_like(Z)
        ar_mats = [op.mat for op in model.ar_ops]
        for k in range(T):
            acc = Z[k].copy()
            for i, mat in enumerate(ar_mats, start=1):
                if k - i >= 0:
                    acc += mat @ X[k - i]
            X[k] = acc

    return SamplePath(
        model.space,
        X[lead:],
        {
            "kind": model.kind,
            "model_hash": model.content_hash(),
            "seed": noise.seed,
            "N": N,
            "burnin": lead,
            "dim": model.space.dim,
        },
    )


def random_hs_operator(space: BasisSpace, target_hs_norm: float, seed: int) -> LinearOp:
    """Random operator with exactly the requested Hilbert-Schmidt norm.

    Entries decay like (i*j)^{-1} before rescaling, so the operator is smooth
    relative to the basis ordering.
    """
    if target_hs_norm <= 0.0:
        raise ValueError(f"target_hs_norm must be > 0, got {target_hs_norm}")
    rng = _generator(seed)
    d = space.dim
    idx = np.arange(1, d + 1, dtype=float)
    M = rng.standard_normal((d, d)) / np.outer(idx, idx)
    M *= target_hs_norm / np.linalg.norm(M, "fro")
    return LinearOp(space, M)


def poly_decay_eigenvalues(dim: int, decay: float = 2.0, scale: float = 1.0) -> np.ndarray:
    """Noise covariance eigenvalues j^{-decay}, j = 1..dim, times scale."""
    if decay < 0:
        raise ValueError("decay must be >= 0")
    return scale * np.arange(1, dim + 1, dtype=float) ** (-decay)
