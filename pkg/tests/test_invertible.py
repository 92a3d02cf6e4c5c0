import numpy as np
import pytest

from hinv.covariance import population_operators
from hinv.eigen import sym_eigen
from hinv.invertible import (
    TuningPlan,
    default_stack_depth,
    default_tuning,
    fit_psi,
    fit_psi_default,
    fit_psi_from_operators,
    phi_from_psi,
    population_psi,
)
from hinv.operators import LinearOp
from hinv.simulate import ModelSpec, NoiseSpec, draw_white_noise, random_hs_operator
from hinv.spaces import BasisSpace


def _scalar_model(kind, seed=0, alpha=None, beta=None):
    space = BasisSpace(1)
    noise = NoiseSpec(space, [1.0], seed=seed)
    ar = (LinearOp(space, [[alpha]]),) if alpha is not None else ()
    ma = (LinearOp(space, [[beta]]),) if beta is not None else ()
    return ModelSpec(kind, noise, ar_ops=ar, ma_ops=ma)


def _phi_power_series_oracle(ar_mats, ma_mats, n, d):
    """Independent causal-coefficient oracle: phi_m = beta_m + sum_i alpha_i phi_{m-i}."""
    phis = [np.eye(d)]
    for m in range(1, n + 1):
        acc = ma_mats[m - 1].copy() if m <= len(ma_mats) else np.zeros((d, d))
        for i, a in enumerate(ar_mats, start=1):
            if m - i >= 0:
                acc += a @ phis[m - i]
        phis.append(acc)
    return phis[1:]


class TestFitPsiPopulationInjection:
    def test_far1_exact_recovery(self):
        # hand solve: (psi1, psi2) [[4/3,2/3],[2/3,4/3]] = (2/3, 1/3) => (0.5, 0)
        m = _scalar_model("far", alpha=0.5)
        C, D = population_operators(m, 2)
        est = fit_psi_from_operators(C, D, TuningPlan(L=2, K=2, theta=1e-12))
        mats = est.psi_mats()
        assert abs(mats[0][0, 0] - 0.5) <= 1e-8
        assert abs(mats[1][0, 0]) <= 1e-8

    def test_theta_large_shrinks_to_zero(self):
        m = _scalar_model("far", alpha=0.5)
        C, D = population_operators(m, 2)
        theta = 1e8
        est = fit_psi_from_operators(C, D, TuningPlan(L=2, K=2, theta=theta))
        bound = np.linalg.norm(D.mat, 2) / theta
        assert np.max(np.abs(est.Psi_L.mat)) <= bound * (1 + 1e-12)

    def test_sign_invariance_bitwise(self):
        space = BasisSpace(2)
        a = random_hs_operator(space, 0.5, seed=21)
        m = ModelSpec("far", NoiseSpec(space, [1.0, 0.5]), ar_ops=(a,))
        C, D = population_operators(m, 2)
        tuning = TuningPlan(L=2, K=3, theta=1e-6)
        es = sym_eigen(C, k_max=tuning.K)
        flipped_vectors = np.array(es.vectors)
        flipped_vectors[:, 0] *= -1.0
        flipped_vectors[:, 2] *= -1.0
        es_flipped = type(es)(
            values=es.values,
            vectors=flipped_vectors,
            space=es.space,
            rows=es.rows,
            is_block=es.is_block,
            k_max=es.k_max,
            clamped_mass=es.clamped_mass,
            degenerate=es.degenerate,
        )
        e1 = fit_psi_from_operators(C, D, tuning, eigen=es)
        e2 = fit_psi_from_operators(C, D, tuning, eigen=es_flipped)
        assert np.array_equal(e1.Psi_L.mat, e2.Psi_L.mat)

    def test_exact_recovery_random_far_models(self):
        # finite-dimensional idealization: population operators, tiny theta,
        # full K recover (alpha_1..alpha_p, 0, ..., 0) within 1e-7 HS
        rng_seed = 0
        for dim, p, L in ((1, 1, 3), (3, 1, 2), (3, 2, 4), (2, 2, 2)):
            space = BasisSpace(dim)
            ar = tuple(
                random_hs_operator(space, 0.35 / (i + 1), seed=rng_seed + 13 * i + dim)
                for i in range(p)
            )
            noise = NoiseSpec(space, np.linspace(1.0, 0.4, dim))
            m = ModelSpec("far", noise, ar_ops=ar)
            C, D = population_operators(m, L)
            est = fit_psi_from_operators(C, D, TuningPlan(L=L, K=L * dim, theta=1e-12))
            mats = est.psi_mats()
            for i in range(L):
                truth = ar[i].mat if i < p else np.zeros((dim, dim))
                assert np.linalg.norm(mats[i] - truth, "fro") <= 1e-7

    def test_hs_additivity(self):
        m = _scalar_model("far", alpha=0.5)
        C, D = population_operators(m, 3)
        est = fit_psi_from_operators(C, D, TuningPlan(L=3, K=3, theta=1e-10))
        total = sum(np.linalg.norm(mat, "fro") ** 2 for mat in est.psi_mats())
        assert est.Psi_L.hs_norm() ** 2 == pytest.approx(total, rel=1e-13)

    def test_shape_validation(self):
        m = _scalar_model("far", alpha=0.5)
        C, D = population_operators(m, 2)
        with pytest.raises(ValueError):
            fit_psi_from_operators(C, D, TuningPlan(L=3, K=2, theta=1e-6))
        with pytest.raises(ValueError):
            fit_psi_from_operators(C, D, TuningPlan(L=2, K=5, theta=1e-6))


class TestFitPsiOnSamples:
    def test_white_noise_estimate_is_small(self):
        s = draw_white_noise(NoiseSpec(BasisSpace(2), [1.0, 0.5], seed=31), 100_000)
        est = fit_psi(s, TuningPlan(L=2, K=4, theta=1e-3))
        assert est.Psi_L.hs_norm() <= 0.05

    def test_requires_n_greater_than_l(self):
        s = draw_white_noise(NoiseSpec(BasisSpace(1), [1.0], seed=32), 5)
        with pytest.raises(ValueError):
            fit_psi(s, TuningPlan(L=5, K=2, theta=1e-3))

    def test_deterministic(self):
        s = draw_white_noise(NoiseSpec(BasisSpace(2), [1.0, 0.5], seed=33), 500)
        t = TuningPlan(L=3, K=4, theta=1e-3)
        assert np.array_equal(fit_psi(s, t).Psi_L.mat, fit_psi(s, t).Psi_L.mat)

    def test_diagnostics_present(self):
        s = draw_white_noise(NoiseSpec(BasisSpace(2), [1.0, 0.5], seed=34), 500)
        est = fit_psi(s, TuningPlan(L=2, K=3, theta=1e-3))
        for key in ("lambda_K", "Lambda_K", "clamped_mass", "degenerate"):
            assert key in est.diagnostics


class TestPopulationPsi:
    def test_fma1_geometric(self):
        m = _scalar_model("fma", beta=0.5)
        psi = population_psi(m, 6)
        for i, op in enumerate(psi, start=1):
            assert op.mat[0, 0] == pytest.approx((-1) ** (i + 1) * 0.5 ** i, abs=1e-15)

    def test_farma11_hand_recursion(self):
        m = _scalar_model("farma", alpha=0.5, beta=0.3)
        psi = population_psi(m, 3)
        vals = [op.mat[0, 0] for op in psi]
        assert vals[0] == pytest.approx(0.8, abs=1e-15)
        assert vals[1] == pytest.approx(-0.24, abs=1e-15)
        assert vals[2] == pytest.approx(0.072, abs=1e-15)

    def test_far2_padded(self):
        space = BasisSpace(2)
        a1 = random_hs_operator(space, 0.3, seed=41)
        a2 = random_hs_operator(space, 0.2, seed=42)
        m = ModelSpec("far", NoiseSpec(space, [1.0, 0.5]), ar_ops=(a1, a2))
        psi = population_psi(m, 4)
        assert np.array_equal(psi[0].mat, a1.mat)
        assert np.array_equal(psi[1].mat, a2.mat)
        assert np.all(psi[2].mat == 0.0) and np.all(psi[3].mat == 0.0)

    def test_recursion_closure_beyond_orders(self):
        # psi_i = -sum_j beta_j psi_{i-j} for i > max(p, q)
        space = BasisSpace(2)
        a = random_hs_operator(space, 0.4, seed=43)
        b1 = random_hs_operator(space, 0.25, seed=44)
        b2 = random_hs_operator(space, 0.15, seed=45)
        m = ModelSpec("farma", NoiseSpec(space, [1.0, 0.5]), ar_ops=(a,), ma_ops=(b1, b2))
        psi = population_psi(m, 12)
        mats = [op.mat for op in psi]
        for i in range(3, 13):  # i > max(p, q) = 2
            expect = -(b1.mat @ mats[i - 2] + b2.mat @ mats[i - 3])
            assert np.linalg.norm(mats[i - 1] - expect, "fro") <= 1e-12


class TestPhiFromPsi:
    def test_scalar_hand_values(self):
        space = BasisSpace(1)
        psi = [LinearOp(space, [[0.5]]), LinearOp(space, [[0.2]])]
        phi = phi_from_psi(psi, 3)
        vals = [op.mat[0, 0] for op in phi]
        assert vals == pytest.approx([0.5, 0.45, 0.325], abs=1e-15)

    def test_zero_psi(self):
        space = BasisSpace(2)
        phi = phi_from_psi([LinearOp.zero(space)], 4)
        assert all(np.all(op.mat == 0.0) for op in phi)

    def test_fma2_roundtrip(self):
        space = BasisSpace(2)
        b1 = random_hs_operator(space, 0.3, seed=51)
        b2 = random_hs_operator(space, 0.2, seed=52)
        m = ModelSpec("fma", NoiseSpec(space, [1.0, 0.5]), ma_ops=(b1, b2))
        psi = population_psi(m, 60)
        phi = phi_from_psi(psi, 60)
        assert np.linalg.norm(phi[0].mat - b1.mat, "fro") <= 1e-10
        assert np.linalg.norm(phi[1].mat - b2.mat, "fro") <= 1e-10
        for op in phi[2:]:
            assert np.linalg.norm(op.mat, "fro") <= 1e-10

    def test_duality_against_power_series_oracle(self):
        rng = np.random.default_rng(61)
        for trial in range(10):
            dim = int(rng.integers(1, 6))
            p = int(rng.integers(1, 3))
            q = int(rng.integers(1, 3))
            space = BasisSpace(dim)
            ar = tuple(
                random_hs_operator(space, 0.3 / (i + 1), seed=100 * trial + i)
                for i in range(p)
            )
            ma = tuple(
                random_hs_operator(space, 0.25 / (j + 1), seed=100 * trial + 50 + j)
                for j in range(q)
            )
            noise = NoiseSpec(space, np.linspace(1.0, 0.5, dim))
            m = ModelSpec("farma", noise, ar_ops=ar, ma_ops=ma)
            phi = phi_from_psi(population_psi(m, 60), 60)
            oracle = _phi_power_series_oracle([a.mat for a in ar], [b.mat for b in ma], 60, dim)
            for got, want in zip(phi, oracle):
                assert np.linalg.norm(got.mat - want, "fro") <= 1e-9

    def test_lp_inversion_roundtrip(self):
        space = BasisSpace(2)
        ops = tuple(random_hs_operator(space, 0.3 / (j + 1), seed=70 + j) for j in range(3))
        m = ModelSpec("lp", NoiseSpec(space, [1.0, 0.5]), lp_ops=ops)
        psi = population_psi(m, 40)
        phi = phi_from_psi(psi, 40)
        for j, op in enumerate(ops):
            assert np.linalg.norm(phi[j].mat - op.mat, "fro") <= 1e-10
        for op in phi[3:]:
            assert np.linalg.norm(op.mat, "fro") <= 1e-10


class TestPsiTailNorms:
    def test_fma1_geometric_tail(self):
        from hinv.invertible import psi_tail_norms

        m = _scalar_model("fma", beta=0.5)
        diag = psi_tail_norms(m, L=3, horizon=40)
        # |psi_l| = 0.5^l, so the tail past L=3 sums to ~0.5^4/(1-0.5)
        assert diag["tail_hs_norms"][0] == pytest.approx(0.5 ** 4, abs=1e-15)
        assert diag["tail_hs_sum"] == pytest.approx(0.5 ** 4 / 0.5, rel=1e-9)

    def test_far_tail_is_zero(self):
        from hinv.invertible import psi_tail_norms

        m = _scalar_model("far", alpha=0.5)
        diag = psi_tail_norms(m, L=2, horizon=10)
        assert diag["tail_hs_sum"] == 0.0

    def test_horizon_checked(self):
        from hinv.invertible import psi_tail_norms

        with pytest.raises(ValueError):
            psi_tail_norms(_scalar_model("far", alpha=0.5), L=5, horizon=5)


class TestDefaultTuning:
    def test_stack_depth_examples(self):
        assert default_stack_depth(256) == 4
        assert default_stack_depth(10_000) == 10
        assert default_stack_depth(257) == 5
        assert default_stack_depth(20) == 3

    def test_spectral_floor_cap(self):
        space = BasisSpace(2)
        es = sym_eigen(LinearOp(space, np.diag([1.0, 1e-9])))
        plan = default_tuning(100, 2, es, L=1)
        assert plan.K == 1

    def test_theta_ratio(self):
        space = BasisSpace(3)
        lam = 2.0 * np.exp(-np.arange(1, 7, dtype=float))
        from hinv.operators import BlockOp

        es = sym_eigen(BlockOp(space, 2, 2, np.diag(lam)))
        plan = default_tuning(10_000, 3, es, L=2)
        assert plan.theta / es.values[plan.K - 1] == pytest.approx(0.01, rel=1e-12)

    def test_eigensystem_size_checked(self):
        space = BasisSpace(3)
        es = sym_eigen(LinearOp(space, np.diag([3.0, 2.0, 1.0])))
        with pytest.raises(ValueError, match="stacked covariance"):
            default_tuning(10_000, 3, es)  # default L = 10 mismatches eigen size

    def test_small_n_rejected(self):
        space = BasisSpace(1)
        es = sym_eigen(LinearOp(space, [[1.0]]))
        with pytest.raises(ValueError):
            default_tuning(10, 1, es, L=1)

    def test_default_pipeline_runs(self):
        s = draw_white_noise(NoiseSpec(BasisSpace(2), [1.0, 0.5], seed=81), 300)
        est, tuning = fit_psi_default(s)
        assert tuning.L == default_stack_depth(300)
        assert tuning.schedule_id == "default-v1"
        assert est.Psi_L.cols == tuning.L
