"""Declarative TOML configs for models and Monte Carlo experiments.

Model table::

    [model]
    kind = "farma"          # far | fma | farma | lp | wn
    dim = 10
    basis = "fourier"

    [model.noise]
    seed = 1
    decay = 2.0             # eigenvalues j^-decay; or eig = [1.0, 0.5, ...]
    scale = 1.0

    [[model.ar]]            # one table per operator, in lag order
    hs_norm = 0.5           # random operator with this HS norm ...
    seed = 11
    # matrix = [[...], ...] # ... or an explicit matrix

Experiment table::

    [experiment]
    Ns = [250, 1000, 4000]
    reps = 20
    seed_base = 20240716

    [experiment.tuning]     # optional overrides; omitted fields use defaults
    L = 6
    K = 12
    theta = 1e-3
    M = 4
    gamma = 1e-4
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .operators import LinearOp
from .simulate import ModelSpec, NoiseSpec, poly_decay_eigenvalues, random_hs_operator
from .spaces import BasisSpace


def _load_toml(path_or_dict) -> dict:
    if isinstance(path_or_dict, dict):
        return path_or_dict
    with open(path_or_dict, "rb") as fh:
        return tomllib.load(fh)


def _build_operator(space: BasisSpace, table: dict, role: str, index: int) -> LinearOp:
    if "matrix" in table:
        return LinearOp(space, np.asarray(table["matrix"], dtype=float))
    if "hs_norm" in table:
        seed = int(table.get("seed", 0))
        return LinearOp(space, random_hs_operator(space, float(table["hs_norm"]), seed).mat)
    raise ValueError(f"{role} operator {index}: needs either 'matrix' or 'hs_norm'")


def model_from_table(table: dict) -> ModelSpec:
    """Construct a ModelSpec from the [model] table."""
    try:
        kind = table["kind"]
        dim = int(table["dim"])
    except KeyError as exc:
        raise ValueError(f"model table is missing required key {exc}") from None
    space = BasisSpace(dim, table.get("basis", "fourier"))

    noise_tab = table.get("noise", {})
    if "eig" in noise_tab:
        eig = np.asarray(noise_tab["eig"], dtype=float)
    else:
        eig = poly_decay_eigenvalues(
            dim, float(noise_tab.get("decay", 2.0)), float(noise_tab.get("scale", 1.0))
        )
    noise = NoiseSpec(space, eig, int(noise_tab.get("seed", 0)))

    ar = tuple(
        _build_operator(space, t, "ar", i) for i, t in enumerate(table.get("ar", []), 1)
    )
    ma = tuple(
        _build_operator(space, t, "ma", i) for i, t in enumerate(table.get("ma", []), 1)
    )
    lp = tuple(
        _build_operator(space, t, "lp", i) for i, t in enumerate(table.get("lp", []), 1)
    )
    return ModelSpec(kind, noise, ar_ops=ar, ma_ops=ma, lp_ops=lp)


def load_model_spec(path_or_dict) -> ModelSpec:
    doc = _load_toml(path_or_dict)
    if "model" not in doc:
        raise ValueError("config has no [model] table")
    return model_from_table(doc["model"])


@dataclass(frozen=True)
class TuningOverrides:
    """Optional fixed tuning values; None means use the default schedule."""

    L: int | None = None
    K: int | None = None
    theta: float | None = None
    M: int | None = None
    gamma: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Monte Carlo experiment: model, sample sizes, replications, seeding."""

    model: ModelSpec
    Ns: tuple
    reps: int
    seed_base: int
    tuning: TuningOverrides = field(default_factory=TuningOverrides)
    burnin: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "Ns", tuple(int(n) for n in self.Ns))
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not self.Ns:
            raise ValueError("Ns must be non-empty")
        if any(b <= a for a, b in zip(self.Ns, self.Ns[1:])):
            raise ValueError(f"Ns must be strictly increasing, got {self.Ns}")


def load_experiment_config(path_or_dict) -> ExperimentConfig:
    doc = _load_toml(path_or_dict)
    if "experiment" not in doc or "model" not in doc:
        raise ValueError("experiment config needs both [experiment] and [model] tables")
    exp = doc["experiment"]
    model = model_from_table(doc["model"])
    tun = exp.get("tuning", {})
    overrides = TuningOverrides(
        L=int(tun["L"]) if "L" in tun else None,
        K=int(tun["K"]) if "K" in tun else None,
        theta=float(tun["theta"]) if "theta" in tun else None,
        M=int(tun["M"]) if "M" in tun else None,
        gamma=float(tun["gamma"]) if "gamma" in tun else None,
    )
    return ExperimentConfig(
        model=model,
        Ns=tuple(exp.get("Ns", ())),
        reps=int(exp.get("reps", 1)),
        seed_base=int(exp.get("seed_base", 0)),
        tuning=overrides,
        burnin=int(exp["burnin"]) if "burnin" in exp else None,
    )
