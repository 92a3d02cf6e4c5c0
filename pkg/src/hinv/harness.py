"""Monte Carlo replication harness: seeded experiments, error tables, rate diagnostics.

Replication r at sample size N draws its noise seed from
SeedSequence([seed_base, N, r]), so reruns of the same config are
byte-identical and replications are independent.  Per-fit wall-clock goes to a
separate timings file: the deterministic artifacts (report.csv, summary.json)
must not contain clock values.

Errors are reported against the simulated truth as Hilbert-Schmidt norms;
medians use the lower-median convention and quartiles the 'lower' method, both
deterministic.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arma import ArmaTuning, fit_farma_pq
from .config import ExperimentConfig, TuningOverrides
from .covariance import causal_coefficients, emp_cov_stacked, emp_crosscov_lag1
from .eigen import sym_eigen
from .invertible import (
    TuningPlan,
    default_stack_depth,
    default_tuning,
    fit_psi_from_operators,
    population_psi,
)
from .serialize import format_float, write_json
from .simulate import ModelSpec, simulate

#: how many leading psi/phi component errors the report carries
PSI_REPORT_DEPTH = 2


def derive_seed(seed_base: int, N: int, rep: int) -> int:
    """Stable 64-bit replication seed mixed from (seed_base, N, rep)."""
    ss = np.random.SeedSequence([int(seed_base), int(N), int(rep)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def median_lower(values) -> float:
    """Deterministic median: for even counts, the lower of the two middle values."""
    v = sorted(float(x) for x in values)
    if not v:
        raise ValueError("median of empty sequence")
    return v[(len(v) - 1) // 2]


def quartiles_lower(values):
    """(q25, q75) with the 'lower' interpolation, deterministic."""
    v = np.sort(np.asarray(list(values), dtype=float))
    if v.size == 0:
        raise ValueError("quartiles of empty sequence")
    q25 = float(np.percentile(v, 25, method="lower"))
    q75 = float(np.percentile(v, 75, method="lower"))
    return q25, q75


@dataclass(frozen=True, eq=False)
class MCReport:
    """Replication rows, per-N medians/quartiles, and the error column names."""

    columns: list
    rows: list                      # dicts: N, rep, seed, status, tuning, errors
    summary: dict                   # per-N medians and quartiles per column
    Ns: tuple
    reps: int
    seed_base: int
    model_hash: str
    timings: list = field(default_factory=list)  # (N, rep, seconds); not deterministic


def _truth_operators(model: ModelSpec, depth: int):
    """Exact psi/phi/alpha/beta component matrices the errors are measured against."""
    psi_true = [op.mat for op in population_psi(model, depth)]
    phis = causal_coefficients(model)
    phi_true = [
        phis[i].copy() if i < len(phis) else np.zeros_like(phis[0])
        for i in range(1, depth + 1)
    ]
    alpha_true = [op.mat for op in model.ar_ops]
    beta_true = [op.mat for op in model.ma_ops]
    return psi_true, phi_true, alpha_true, beta_true


def error_columns(model: ModelSpec) -> list:
    cols = [f"psi_{j}" for j in range(1, PSI_REPORT_DEPTH + 1)]
    cols += [f"phi_{j}" for j in range(1, PSI_REPORT_DEPTH + 1)]
    cols += [f"alpha_{i}" for i in range(1, model.p + 1)]
    cols += [f"beta_{j}" for j in range(1, model.q + 1)]
    return cols


def _plan_for(model: ModelSpec, N: int, overrides: TuningOverrides):
    """Stacking depth for the first stage given the model kind and overrides."""
    if model.kind == "far":
        return model.p  # the Yule-Walker depth is pinned to the order
    L = overrides.L if overrides.L is not None else default_stack_depth(N)
    if model.kind == "farma":
        L = max(L, model.p + 2 * model.q + 3) if overrides.L is None else L
    return max(L, 1)


def fit_one(model: ModelSpec, N: int, seed: int, overrides: TuningOverrides,
            burnin: int | None = None) -> dict:
    """Simulate one path and fit it; returns psi/phi estimates plus model-specific fits."""
    from .invertible import phi_from_psi

    sample = simulate(model.with_seed(seed), N, burnin=burnin)
    L = _plan_for(model, N, overrides)
    C = emp_cov_stacked(sample, L)
    D = emp_crosscov_lag1(sample, L)
    es = sym_eigen(C)
    plan = default_tuning(N, model.space.dim, es, L=L)
    if overrides.K is not None or overrides.theta is not None:
        plan = TuningPlan(
            L=L,
            K=overrides.K if overrides.K is not None else plan.K,
            theta=overrides.theta if overrides.theta is not None else plan.theta,
            schedule_id="override",
        )
    est = fit_psi_from_operators(C, D, plan, eigen=es)

    out = {
        "psi_mats": est.psi_mats(),
        "phi_mats": [op.mat for op in phi_from_psi(est.psi, PSI_REPORT_DEPTH)],
        "tuning": {"L": plan.L, "K": plan.K, "theta": plan.theta},
        "alpha_mats": [],
        "beta_mats": [],
    }

    if model.kind == "far":
        out["alpha_mats"] = [mat for mat in est.psi_mats()[: model.p]]
    elif model.kind == "fma":
        out["beta_mats"] = [op.mat for op in phi_from_psi(est.psi, model.q)[: model.q]]
    elif model.kind == "farma":
        if overrides.M is not None and overrides.gamma is not None:
            tuning = ArmaTuning(base=plan, M=overrides.M, gamma=overrides.gamma)
            fit = fit_farma_pq(sample, model.p, model.q, tuning)
        else:
            from .arma import farma_pq_from_psi, _second_stage_defaults, build_pi_hat
            from .operators import BlockOp

            Pi = build_pi_hat(est.psi, model.p, model.q)
            gram = BlockOp(model.space, model.q, model.q, Pi.mat @ Pi.mat.T)
            M, gamma = _second_stage_defaults(sym_eigen(gram), N)
            if overrides.M is not None:
                M = overrides.M
            if overrides.gamma is not None:
                gamma = overrides.gamma
            fit = farma_pq_from_psi(est.psi, model.p, model.q, M, gamma, psi_source=est)
        out["alpha_mats"] = [op.mat for op in fit.alpha]
        out["beta_mats"] = [op.mat for op in fit.beta]
        out["tuning"].update({"M": fit.diagnostics["M"], "gamma": fit.diagnostics["gamma"]})
    return out


def _errors_for_row(fitted: dict, truth, depth: int) -> dict:
    psi_true, phi_true, alpha_true, beta_true = truth

    def hs(a, b):
        return float(np.linalg.norm(a - b, "fro"))

    row = {}
    psi_mats = fitted["psi_mats"]
    for j in range(depth):
        row[f"psi_{j + 1}"] = hs(psi_mats[j], psi_true[j]) if j < len(psi_mats) else None
    for j in range(depth):
        row[f"phi_{j + 1}"] = (
            hs(fitted["phi_mats"][j], phi_true[j]) if j < len(fitted["phi_mats"]) else None
        )
    for i, truth_mat in enumerate(alpha_true, start=1):
        got = fitted["alpha_mats"]
        row[f"alpha_{i}"] = hs(got[i - 1], truth_mat) if i <= len(got) else None
    for j, truth_mat in enumerate(beta_true, start=1):
        got = fitted["beta_mats"]
        row[f"beta_{j}"] = hs(got[j - 1], truth_mat) if j <= len(got) else None
    return row


def run_mc(config: ExperimentConfig, outdir=None, workers: int | None = None) -> MCReport:
    """Run the full replication grid and (optionally) write the report artifacts.

    A failing replication is recorded as a status row; it never aborts the run
    or corrupts the report.
    """
    model = config.model
    cols = error_columns(model)
    truth = _truth_operators(model, PSI_REPORT_DEPTH)
    tasks = [(N, rep) for N in config.Ns for rep in range(config.reps)]

    def one(task):
        N, rep = task
        seed = derive_seed(config.seed_base, N, rep)
        t0 = time.perf_counter()
        try:
            fitted = fit_one(model, N, seed, config.tuning, burnin=config.burnin)
            errs = _errors_for_row(fitted, truth, PSI_REPORT_DEPTH)
            row = {"N": N, "rep": rep, "seed": seed, "status": "ok", **fitted["tuning"], **errs}
        except Exception as exc:  # crash isolation: degenerate replication -> row
            row = {"N": N, "rep": rep, "seed": seed,
                   "status": "error: " + str(exc).splitlines()[0][:200]}
        return row, time.perf_counter() - t0

    if workers is None:
        workers = int(os.environ.get("HINV_THREADS", "1"))
    workers = max(1, min(workers, len(tasks)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(t) for t in tasks]

    rows = [r for r, _ in results]
    timings = [(t[0], t[1], dt) for t, (_, dt) in zip(tasks, results)]
    rows.sort(key=lambda r: (r["N"], r["rep"]))

    summary = {"per_N": {}}
    for N in config.Ns:
        stats = {}
        for c in cols:
            vals = [r[c] for r in rows if r["N"] == N and r.get(c) is not None]
            if vals:
                q25, q75 = quartiles_lower(vals)
                stats[c] = {"median": median_lower(vals), "q25": q25, "q75": q75,
                            "count": len(vals)}
        summary["per_N"][str(N)] = stats
    report = MCReport(
        columns=cols,
        rows=rows,
        summary=summary,
        Ns=config.Ns,
        reps=config.reps,
        seed_base=config.seed_base,
        model_hash=model.content_hash(),
        timings=timings,
    )
    if len(config.Ns) >= 3:
        summary["rate_slopes"] = rate_table(report)
    summary["config"] = {
        "Ns": list(config.Ns),
        "reps": config.reps,
        "seed_base": config.seed_base,
        "model_hash": report.model_hash,
        "kind": model.kind,
        "p": model.p,
        "q": model.q,
        "dim": model.space.dim,
        "tuning_overrides": config.tuning.as_dict(),
    }

    if outdir is not None:
        write_report(report, outdir)
    return report


def median_table(report: MCReport) -> dict:
    """column -> list of per-N medians in the order of report.Ns."""
    out = {}
    for c in report.columns:
        meds = []
        for N in report.Ns:
            entry = report.summary["per_N"][str(N)].get(c)
            meds.append(entry["median"] if entry else None)
        out[c] = meds
    return out


def rate_table(report: MCReport) -> dict:
    """Least-squares slope of log median error vs log N per column (display only)."""
    if len(report.Ns) < 3:
        raise ValueError("rate table needs at least 3 sample sizes")
    logN = np.log(np.asarray(report.Ns, dtype=float))
    slopes = {}
    for c, meds in median_table(report).items():
        if any(m is None or m <= 0.0 for m in meds):
            slopes[c] = None
            continue
        slope = np.polyfit(logN, np.log(np.asarray(meds)), 1)[0]
        slopes[c] = float(slope)
    return slopes


def oracle_check() -> list:
    """Population-injection exact-recovery suite; returns (name, passed, detail) triples.

    Every check replaces empirical covariances by population ones (or fitted
    psi components by exact ones), so failures indicate broken algebra rather
    than sampling noise.
    """
    from .arma import farma11_from_psi, farma_pq_from_psi
    from .covariance import population_operators
    from .operators import LinearOp
    from .simulate import NoiseSpec, random_hs_operator
    from .spaces import BasisSpace

    checks = []

    def record(name, err, tol):
        checks.append((name, bool(err <= tol), f"max error {err:.3e} (tol {tol:.0e})"))

    # fAR exact recovery through the stacked Yule-Walker solve
    for dim, p in ((1, 1), (3, 1), (1, 2), (3, 2)):
        space = BasisSpace(dim)
        ar = tuple(
            random_hs_operator(space, 0.35 / (i + 1), seed=90 + 7 * i + dim) for i in range(p)
        )
        noise = NoiseSpec(space, np.linspace(1.0, 0.4, dim))
        model = ModelSpec("far", noise, ar_ops=ar)
        L = max(p, 2)
        C, D = population_operators(model, L)
        est = fit_psi_from_operators(C, D, TuningPlan(L=L, K=L * dim, theta=1e-12))
        mats = est.psi_mats()
        err = 0.0
        for i in range(L):
            truth = ar[i].mat if i < p else np.zeros((dim, dim))
            err = max(err, float(np.linalg.norm(mats[i] - truth, "fro")))
        record(f"far(p={p}, dim={dim}) population recovery", err, 1e-7)

    # fARMA(1,1) scalar: alpha = 0.5, beta = 0.3 through the direct stage
    space = BasisSpace(1)
    model = ModelSpec(
        "farma",
        NoiseSpec(space, [1.0]),
        ar_ops=(LinearOp(space, [[0.5]]),),
        ma_ops=(LinearOp(space, [[0.3]]),),
    )
    psi = population_psi(model, 6)
    alpha1, beta1, _, _ = farma11_from_psi(psi, M=1, gamma=1e-12)
    err = max(abs(alpha1.mat[0, 0] - 0.5), abs(beta1.mat[0, 0] - 0.3))
    record("farma(1,1) scalar population recovery", err, 1e-6)

    # fARMA(2,1) in dim 2 through the block-Hankel stage
    space = BasisSpace(2)
    a1 = random_hs_operator(space, 0.3, seed=501)
    a2 = LinearOp(space, 0.3 * np.eye(2) + 0.05 * random_hs_operator(space, 1.0, seed=502).mat)
    b1 = random_hs_operator(space, 0.25, seed=503)
    model = ModelSpec(
        "farma", NoiseSpec(space, [1.0, 0.5]), ar_ops=(a1, a2), ma_ops=(b1,)
    )
    psi = population_psi(model, 12)
    fit = farma_pq_from_psi(psi, 2, 1, M=2, gamma=1e-12)
    err = max(
        float(np.linalg.norm(fit.alpha[0].mat - a1.mat, "fro")),
        float(np.linalg.norm(fit.alpha[1].mat - a2.mat, "fro")),
        float(np.linalg.norm(fit.beta[0].mat - b1.mat, "fro")),
    )
    record("farma(2,1) dim-2 population recovery", err, 1e-6)

    # psi/phi duality against the direct causal recursion
    from .invertible import phi_from_psi

    space = BasisSpace(3)
    model = ModelSpec(
        "farma",
        NoiseSpec(space, [1.0, 0.6, 0.3]),
        ar_ops=(random_hs_operator(space, 0.3, seed=504),),
        ma_ops=(random_hs_operator(space, 0.25, seed=505),),
    )
    phi = phi_from_psi(population_psi(model, 60), 60)
    phis = causal_coefficients(model)
    err = max(
        float(np.linalg.norm(phi[i].mat - (phis[i + 1] if i + 1 < len(phis) else 0.0), "fro"))
        for i in range(60)
    )
    record("psi/phi duality at truncation 60", err, 1e-9)
    return checks


_TUNING_COLS = ("L", "K", "theta", "M", "gamma")


def write_report(report: MCReport, outdir) -> None:
    """Write report.csv + summary.json (deterministic) and timings.csv (not)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    header = ["N", "rep", "seed", "status"] + [c for c in _TUNING_COLS] + report.columns
    lines = [",".join(header)]
    for r in report.rows:
        cells = [str(r["N"]), str(r["rep"]), str(r["seed"]), r["status"]]
        for c in _TUNING_COLS:
            v = r.get(c)
            cells.append("" if v is None else (str(v) if isinstance(v, int) else format_float(v)))
        for c in report.columns:
            v = r.get(c)
            cells.append("" if v is None else format_float(v))
        lines.append(",".join(cells))
    (outdir / "report.csv").write_text("\n".join(lines) + "\n")
    write_json(outdir / "summary.json", report.summary)
    tlines = ["N,rep,seconds"] + [
        f"{N},{rep},{format_float(dt)}" for N, rep, dt in report.timings
    ]
    (outdir / "timings.csv").write_text("\n".join(tlines) + "\n")
