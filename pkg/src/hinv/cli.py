"""Command-line interface: simulate, fit, eigen, mc, oracle-check.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hinv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a sample path from a model config")
    p_sim.add_argument("--model", required=True, help="TOML file with a [model] table")
    p_sim.add_argument("--N", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=None, help="override the noise seed")
    p_sim.add_argument("--burnin", type=int, default=None)
    p_sim.add_argument("--out", required=True, help="output CSV (sidecar JSON added)")

    p_fit = sub.add_parser("fit", help="fit far/fma/farma operators to a sample CSV")
    p_fit.add_argument("--model", choices=("far", "fma", "farma"), required=True)
    p_fit.add_argument("--p", type=int, default=0)
    p_fit.add_argument("--q", type=int, default=0)
    p_fit.add_argument("--L", type=int, default=None)
    p_fit.add_argument("--K", type=int, default=None)
    p_fit.add_argument("--theta", type=float, default=None)
    p_fit.add_argument("--M", type=int, default=None)
    p_fit.add_argument("--gamma", type=float, default=None)
    p_fit.add_argument("--center", action=argparse.BooleanOptionalAction, default=True,
                       help="subtract the sample mean (default: on for file input)")
    p_fit.add_argument("--input", required=True, help="sample CSV")
    p_fit.add_argument("--out", required=True, help="output directory")

    p_eig = sub.add_parser("eigen", help="eigenvalues and gap statistics of the stacked covariance")
    p_eig.add_argument("--input", required=True)
    p_eig.add_argument("--L", type=int, default=None)
    p_eig.add_argument("--K", type=int, default=None)
    p_eig.add_argument("--center", action=argparse.BooleanOptionalAction, default=True)
    p_eig.add_argument("--out", default=None, help="optional directory for the covariance bundle")

    p_mc = sub.add_parser("mc", help="run a Monte Carlo experiment config")
    p_mc.add_argument("--config", required=True, help="TOML with [experiment] and [model]")
    p_mc.add_argument("--out", required=True, help="output directory")
    p_mc.add_argument("--workers", type=int, default=None,
                      help="worker pool size (default: HINV_THREADS or 1)")

    sub.add_parser("oracle-check", help="run the population-injection recovery suite")

    parser.add_argument("--workdir", default=None, help="resolve relative paths against this")
    return parser


def _resolve(workdir, path):
    p = Path(path)
    if workdir is not None and not p.is_absolute():
        return Path(workdir) / p
    return p


def _cmd_simulate(args) -> int:
    from .config import load_model_spec
    from .serialize import write_sample_csv
    from .simulate import simulate

    model = load_model_spec(_resolve(args.workdir, args.model))
    if args.seed is not None:
        model = model.with_seed(args.seed)
    sample = simulate(model, args.N, burnin=args.burnin)
    out = _resolve(args.workdir, args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sample_csv(out, sample)
    print(f"wrote {sample.N} curves of dim {sample.space.dim} to {out}")
    return 0


def _tuning_from_args(args, sample):
    from .covariance import emp_cov_stacked
    from .eigen import sym_eigen
    from .invertible import TuningPlan, default_stack_depth, default_tuning

    L = args.L if args.L is not None else default_stack_depth(sample.N)
    if args.K is not None and args.theta is not None:
        return TuningPlan(L=L, K=args.K, theta=args.theta, schedule_id="cli")
    C = emp_cov_stacked(sample, L, center=args.center)
    es = sym_eigen(C)
    plan = default_tuning(sample.N, sample.space.dim, es, L=L)
    if args.K is not None or args.theta is not None:
        plan = TuningPlan(
            L=L,
            K=args.K if args.K is not None else plan.K,
            theta=args.theta if args.theta is not None else plan.theta,
            schedule_id="cli",
        )
    return plan


def _cmd_fit(args) -> int:
    from .arma import ArmaTuning, fit_far, fit_farma_pq, fit_fma
    from .serialize import read_sample_csv, save_arma_fit

    sample = read_sample_csv(_resolve(args.workdir, args.input))
    out = _resolve(args.workdir, args.out)

    if args.model == "far":
        if args.p < 1:
            raise UsageError("far fitting needs --p >= 1")
        if args.L is not None and args.L != args.p:
            raise UsageError(f"far fitting pins the stacking depth to --p; drop --L or set it to {args.p}")
        args.L = args.p
        plan = _tuning_from_args(args, sample)
        fit = fit_far(sample, args.p, plan, center=args.center)
    elif args.model == "fma":
        if args.q < 1:
            raise UsageError("fma fitting needs --q >= 1")
        plan = _tuning_from_args(args, sample)
        fit = fit_fma(sample, args.q, plan, center=args.center)
    else:
        if args.p < 1 or args.q < 1:
            raise UsageError("farma fitting needs --p >= 1 and --q >= 1")
        min_L = args.p + 2 * args.q - 1
        if args.L is None:
            from .invertible import default_stack_depth

            args.L = max(default_stack_depth(sample.N), args.p + 2 * args.q + 3)
        if args.L < min_L:
            raise UsageError(f"farma({args.p},{args.q}) needs --L >= {min_L}")
        plan = _tuning_from_args(args, sample)
        if args.M is not None and args.gamma is not None:
            tuning = ArmaTuning(base=plan, M=args.M, gamma=args.gamma)
            fit = fit_farma_pq(sample, args.p, args.q, tuning, center=args.center)
        else:
            from .arma import _second_stage_defaults, build_pi_hat, farma_pq_from_psi
            from .eigen import sym_eigen
            from .invertible import fit_psi
            from .operators import BlockOp

            est = fit_psi(sample, plan, center=args.center)
            Pi = build_pi_hat(est.psi, args.p, args.q)
            gram = BlockOp(sample.space, args.q, args.q, Pi.mat @ Pi.mat.T)
            M, gamma = _second_stage_defaults(sym_eigen(gram), sample.N)
            if args.M is not None:
                M = args.M
            if args.gamma is not None:
                gamma = args.gamma
            fit = farma_pq_from_psi(est.psi, args.p, args.q, M, gamma, psi_source=est)
    save_arma_fit(out, fit)
    if fit.psi_source is not None:
        from .serialize import save_psi_estimate

        save_psi_estimate(out / "psi", fit.psi_source)
    print(f"fit written to {out} (p={fit.p}, q={fit.q})")
    return 0


def _cmd_eigen(args) -> int:
    from .covariance import estimate_covariance
    from .eigen import eigen_gap_stats
    from .invertible import default_stack_depth
    from .serialize import read_sample_csv, save_cov_estimate

    sample = read_sample_csv(_resolve(args.workdir, args.input))
    L = args.L if args.L is not None else default_stack_depth(sample.N)
    ce = estimate_covariance(sample, L, center=args.center)
    values = ce.eigen.values
    K = args.K if args.K is not None else min(10, values.size - 1)
    print(f"stacked covariance at L={L}: dimension {values.size}")
    for j, v in enumerate(values[: min(values.size, 12)], start=1):
        print(f"  lambda_{j} = {v:.6e}")
    if 1 <= K < values.size:
        gs = eigen_gap_stats(ce.eigen, K)
        print(f"Lambda_{K} = {gs.Lambda_K:.6e}  degenerate={gs.degenerate}")
    if args.out is not None:
        save_cov_estimate(_resolve(args.workdir, args.out), ce)
    return 0


def _cmd_mc(args) -> int:
    from .config import load_experiment_config
    from .harness import run_mc

    config = load_experiment_config(_resolve(args.workdir, args.config))
    out = _resolve(args.workdir, args.out)
    report = run_mc(config, outdir=out, workers=args.workers)
    n_err = sum(1 for r in report.rows if r["status"] != "ok")
    print(f"mc complete: {len(report.rows)} replications, {n_err} failed; report in {out}")
    return 0


def _cmd_oracle_check() -> int:
    from .harness import oracle_check

    checks = oracle_check()
    worst = 0
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'}: {name} [{detail}]")
        if not passed:
            worst = 2
    return worst


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "eigen":
            return _cmd_eigen(args)
        if args.command == "mc":
            return _cmd_mc(args)
        if args.command == "oracle-check":
            return _cmd_oracle_check()
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
