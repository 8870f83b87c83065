import numpy as np
import pytest
import scipy.signal

from kmaxent.covariance import (
    CholeskyFactor,
    TimeSeries,
    build_toeplitz,
    cholesky,
    estimate_lags,
)
from kmaxent.errors import InvalidDataError, InvalidOrderError
from kmaxent.estimators import (
    PredictorPolynomial,
    build_whittle_design,
    check_min_phase,
    kernel_me,
    kernel_me_regularized_ls,
    kernel_pem,
    me_bic,
    preliminary_b0,
    yule_walker,
    _lagged_design,
)
from kmaxent.kernels import (
    Hyperparameters,
    KernelFamily,
    KernelSpec,
    inverse_factorization,
    kernel_matrix,
)
from kmaxent.simulate import generate, random_arma


def ar_series(coeffs, N, seed, sigma=1.0, burn=500):
    """AR data with y_t = sum_k coeffs[k] y_{t-k-1} + sigma * e_t."""
    rng = np.random.default_rng(seed)
    den = np.concatenate(([1.0], -np.asarray(coeffs)))
    out = scipy.signal.lfilter([sigma], den, rng.standard_normal(N + burn))
    return TimeSeries(out[burn:])


class TestYuleWalker:
    def test_white_noise_diagonal(self):
        cov = build_toeplitz(np.array([4.0, 0.0, 0.0, 0.0]))
        b = yule_walker(cov)
        np.testing.assert_allclose(b.coeffs, [0.5, 0.0, 0.0, 0.0], atol=1e-15)

    def test_ar1_exact_lags(self):
        rho = 0.5
        lags = rho ** np.arange(2) / (1 - rho**2)
        b = yule_walker(build_toeplitz(lags))
        np.testing.assert_allclose(b.coeffs, [1.0, -0.5], rtol=1e-12)
        ok, max_mod = check_min_phase(b)
        assert ok and abs(max_mod - 0.5) < 1e-12

    def test_defining_equation(self, benchmark_setup):
        _, cov, _, _ = benchmark_setup
        b = yule_walker(cov)
        v = np.zeros(cov.order + 1)
        v[0] = 1.0
        lhs = cov.matrix @ b.coeffs
        rhs = v / b.coeffs[0]
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) <= 1e-9

    def test_matches_dense_inverse_oracle(self, benchmark_setup):
        _, cov, _, _ = benchmark_setup
        b = yule_walker(cov)
        v = np.zeros(cov.order + 1)
        v[0] = 1.0
        a = np.linalg.inv(cov.matrix) @ v
        np.testing.assert_allclose(b.coeffs, a / np.sqrt(a[0]), rtol=1e-12, atol=1e-15)

    def test_always_min_phase(self):
        for seed in range(25):
            model = random_arma(seed)
            y = generate(model, 400, seed + 1000)
            for n in (3, 12, 35):
                b = yule_walker(build_toeplitz(estimate_lags(y, n)))
                ok, _ = check_min_phase(b)
                assert ok


class TestMeBic:
    def test_white_noise_concentrates_on_order_one(self):
        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            y = TimeSeries(rng.standard_normal(5000))
            _, chosen = me_bic(y, 30)
            hits += chosen == 1
        assert hits >= 80

    def test_ar2_recovered(self):
        hits = 0
        for seed in range(100):
            y = ar_series([1.5, -0.7], 5000, seed)
            _, chosen = me_bic(y, 20)
            hits += chosen == 2
        assert hits > 50

    def test_degenerate_single_candidate(self):
        y = ar_series([0.5], 200, 3)
        b, chosen = me_bic(y, 1)
        assert chosen == 1 and b.order == 1

    def test_invalid_order(self):
        y = TimeSeries(np.arange(10.0))
        with pytest.raises(InvalidOrderError):
            me_bic(y, 10)
        with pytest.raises(InvalidOrderError):
            me_bic(y, 0)


class TestPreliminaryB0:
    def test_white_noise_limit(self):
        sigma = 2.0
        rng = np.random.default_rng(11)
        y = TimeSeries(sigma * rng.standard_normal(200_000))
        assert abs(preliminary_b0(y, 4) - 1.0 / sigma) < 0.02

    def test_matches_independent_yw_oracle(self, benchmark_series):
        got = preliminary_b0(benchmark_series, 4)
        lags = estimate_lags(benchmark_series, 4)
        sigma = build_toeplitz(lags).matrix
        a = np.linalg.inv(sigma)[:, 0]
        assert abs(got - np.sqrt(a[0])) <= 1e-10 * abs(got)

    def test_order_zero(self, benchmark_series):
        r0 = estimate_lags(benchmark_series, 0)[0]
        assert abs(preliminary_b0(benchmark_series, 0) - 1.0 / np.sqrt(r0)) < 1e-14


class TestWhittleDesign:
    def test_identity_factor(self):
        factor = CholeskyFactor(L=np.eye(3))
        design = build_whittle_design(factor, 1.0, 6, 2)
        np.testing.assert_allclose(design.v_tilde, [2.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(design.phi_data, 2.0 * np.eye(3), atol=1e-15)
        assert design.n_eff == 4

    def test_gram_identity(self, benchmark_setup):
        _, cov, _, design = benchmark_setup
        gram = design.phi_data.T @ design.phi_data
        target = design.n_eff * cov.matrix
        rel = np.linalg.norm(gram - target) / np.linalg.norm(target)
        assert rel <= 1e-10

    def test_rejects_degenerate_inputs(self):
        factor = CholeskyFactor(L=np.eye(3))
        with pytest.raises(InvalidOrderError):
            build_whittle_design(factor, 1.0, 2, 2)
        with pytest.raises(InvalidDataError):
            build_whittle_design(factor, 0.0, 6, 2)
        with pytest.raises(InvalidOrderError):
            build_whittle_design(factor, 1.0, 10, 4)  # size mismatch


class TestKernelMe:
    def test_lambda_infinity_reduces_to_yule_walker(self, benchmark_setup):
        _, cov, _, design = benchmark_setup
        v = np.zeros(cov.order + 1)
        v[0] = 1.0
        a = np.linalg.solve(cov.matrix, v)
        for family in KernelFamily:
            eta = Hyperparameters(1e12, 0.85)
            spec = KernelSpec(family, 0.85, cov.order + 1)
            b = kernel_me(design, cov, spec, eta)
            target = a / design.b0_prelim
            rel = np.linalg.norm(b.coeffs - target) / np.linalg.norm(target)
            assert rel <= 1e-4, (family, rel)

    def test_lambda_zero_shrinks_to_nothing(self, benchmark_setup):
        _, cov, _, design = benchmark_setup
        eta = Hyperparameters(1e-12, 0.85)
        spec = KernelSpec(KernelFamily.TC, 0.85, cov.order + 1)
        b = kernel_me(design, cov, spec, eta)
        assert np.linalg.norm(b.coeffs) < 1e-6

    def test_matches_dense_normal_equations_oracle(self, benchmark_setup):
        _, cov, _, design = benchmark_setup
        eta = Hyperparameters(1.0, 0.85)
        spec = KernelSpec(KernelFamily.DI, 0.85, cov.order + 1)
        b = kernel_me(design, cov, spec, eta)
        K = kernel_matrix(spec)
        phi, vt = design.phi_data, design.v_tilde
        oracle = np.linalg.solve(
            phi.T @ phi + np.linalg.inv(K) / eta.lam, phi.T @ vt
        )
        rel = np.linalg.norm(b.coeffs - oracle) / np.linalg.norm(oracle)
        assert rel <= 1e-6

    def test_closed_forms_agree(self, benchmark_setup):
        _, cov, _, design = benchmark_setup
        rng = np.random.default_rng(5)
        for _ in range(10):
            beta = rng.uniform(0.1, 0.95)
            lam = 10.0 ** rng.uniform(-3, 3)
            family = KernelFamily.DI if rng.random() < 0.5 else KernelFamily.TC
            spec = KernelSpec(family, beta, cov.order + 1)
            eta = Hyperparameters(lam, beta)
            b1 = kernel_me(design, cov, spec, eta)
            b2 = kernel_me_regularized_ls(design, spec, eta)
            rel = np.linalg.norm(b1.coeffs - b2.coeffs) / np.linalg.norm(b1.coeffs)
            assert rel <= 1e-8

    def test_scale_equivariance(self, benchmark_series):
        # scaling the data by c scales the covariance by c^2 and the
        # preliminary coefficient by 1/c; the coefficients scale by 1/c, so
        # their prior variance (lambda) must be rescaled by 1/c^2
        c = 3.7
        N, n, lam, beta = benchmark_series.n_samples, 20, 0.8, 0.7
        spec = KernelSpec(KernelFamily.TC, beta, n + 1)

        def fit(samples, lam_value):
            y = TimeSeries(samples)
            b0 = preliminary_b0(y, 4)
            cov = build_toeplitz(estimate_lags(y, n))
            design = build_whittle_design(cholesky(cov), b0, N, n)
            return kernel_me(design, cov, spec, Hyperparameters(lam_value, beta))

        base = fit(benchmark_series.samples, lam)
        scaled = fit(c * benchmark_series.samples, lam / c**2)
        np.testing.assert_allclose(scaled.coeffs, base.coeffs / c, rtol=1e-10)

    def test_monotone_shrinkage_in_penalty_norm(self, benchmark_setup):
        _, cov, _, design = benchmark_setup
        beta = 0.8
        for family in KernelFamily:
            spec = KernelSpec(family, beta, cov.order + 1)
            fac = inverse_factorization(spec)
            norms = []
            for lam in np.logspace(-3, 3, 13):
                b = kernel_me(design, cov, spec, Hyperparameters(lam, beta))
                w = fac.F.T @ b.coeffs
                norms.append(float(w @ (fac.d * w)))
            norms = np.array(norms)
            assert np.all(np.diff(norms) >= -1e-10 * norms[1:])


class TestKernelPem:
    def test_full_shrinkage_constant_predictor(self):
        rng = np.random.default_rng(2)
        y = TimeSeries(1.3 * rng.standard_normal(2000))
        n = 10
        spec = KernelSpec(KernelFamily.DI, 0.8, n + 1)
        b = kernel_pem(y, n, spec, Hyperparameters(1e-12, 0.8))
        assert np.all(np.abs(b.coeffs[1:]) < 1e-8)
        _, target = _lagged_design(y, n)
        assert abs(b.coeffs[0] - 1.0 / np.sqrt(np.mean(target**2))) < 1e-9

    def test_ar1_consistency_with_weak_penalty(self):
        y = ar_series([0.5], 10_000, 9)
        n = 5
        spec = KernelSpec(KernelFamily.TC, 0.8, n + 1)
        b = kernel_pem(y, n, spec, Hyperparameters(1e6, 0.8))
        a1 = -b.coeffs[1] / b.coeffs[0]
        assert abs(a1 - 0.5) < 0.05

    def test_minimizes_its_own_objective(self, benchmark_setup):
        y, cov, _, design = benchmark_setup
        n = cov.order
        beta, lam = 0.85, 0.5
        spec = KernelSpec(KernelFamily.TC, beta, n + 1)
        eta = Hyperparameters(lam, beta)
        X, target = _lagged_design(y, n)
        kbar_inv = np.linalg.inv(kernel_matrix(spec)[1:, 1:])

        def objective(a):
            r = target - X @ a
            return r @ r + (a @ kbar_inv @ a) / lam

        b_pem = kernel_pem(y, n, spec, eta)
        a_pem = -b_pem.coeffs[1:] / b_pem.coeffs[0]
        b_me = kernel_me(design, cov, spec, eta)
        a_me = -b_me.coeffs[1:] / b_me.coeffs[0]
        assert objective(a_pem) <= objective(a_me)

    def test_matches_dense_normal_equations_oracle(self, benchmark_series):
        n, beta, lam = 12, 0.8, 0.4
        for family in KernelFamily:
            spec = KernelSpec(family, beta, n + 1)
            b = kernel_pem(benchmark_series, n, spec, Hyperparameters(lam, beta))
            X, target = _lagged_design(benchmark_series, n)
            kbar_inv = np.linalg.inv(kernel_matrix(spec)[1:, 1:])
            a = np.linalg.solve(X.T @ X + kbar_inv / lam, X.T @ target)
            resid = target - X @ a
            expected = np.concatenate(([1.0], -a)) / np.sqrt(np.mean(resid**2))
            rel = np.linalg.norm(b.coeffs - expected) / np.linalg.norm(expected)
            assert rel <= 1e-9

    def test_rejects_short_series(self):
        y = TimeSeries(np.arange(20.0))
        spec = KernelSpec(KernelFamily.DI, 0.5, 11)
        with pytest.raises(InvalidOrderError):
            kernel_pem(y, 10, spec, Hyperparameters(1.0, 0.5))


class TestCheckMinPhase:
    def test_stable_linear_factor(self):
        ok, mod = check_min_phase(PredictorPolynomial(np.array([1.0, -0.5])))
        assert ok and abs(mod - 0.5) < 1e-15

    def test_unstable_linear_factor(self):
        ok, mod = check_min_phase(PredictorPolynomial(np.array([1.0, -2.0])))
        assert not ok and abs(mod - 2.0) < 1e-12

    def test_all_roots_at_origin(self):
        ok, mod = check_min_phase(PredictorPolynomial(np.array([1.0, 0.0, 0.0, 0.0])))
        assert ok and mod == 0.0

    def test_order_zero(self):
        ok, mod = check_min_phase(PredictorPolynomial(np.array([2.0])))
        assert ok and mod == 0.0

    def test_zero_leading_coefficient_rejected(self):
        with pytest.raises(InvalidDataError):
            PredictorPolynomial(np.array([0.0, 1.0]))
        with pytest.raises(InvalidDataError):
            PredictorPolynomial(np.zeros(3))
