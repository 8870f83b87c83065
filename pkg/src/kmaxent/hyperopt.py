"""Empirical-Bayes hyperparameter selection and the estimation pipelines.

The kernel scale and decay rate are chosen by minimizing the negative
log-marginal likelihood of the data with the coefficient vector integrated
out. The surface is not convex, so the search is a deterministic two-stage
procedure: an exhaustive coarse grid over (log10 lambda, beta) followed by a
Nelder-Mead refinement in (log lambda, logit beta), coordinates in which the
open-box constraints lambda > 0 and 0 < beta < 1 hold automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .covariance import (
    JitterPolicy,
    TimeSeries,
    ToeplitzCovariance,
    build_toeplitz,
    cholesky,
    estimate_lags,
)
from .diagnostics import degrees_of_freedom, shrinkage_df
from .errors import (
    InvalidHyperparameterError,
    InvalidOrderError,
    KmaxentError,
    PipelineError,
)
from .estimators import (
    EstimateResult,
    Method,
    WhittleDesign,
    _lagged_design,
    build_whittle_design,
    check_min_phase,
    kernel_me,
    kernel_pem,
    preliminary_b0,
)
from .kernels import (
    Hyperparameters,
    KernelFamily,
    KernelSpec,
    kernel_matrix,
    trailing_block_root,
)


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the kernel-based pipelines (defaults match the experiments)."""

    n: int = 50
    low_order: int = 4
    log10_lambda_min: float = -4.0
    log10_lambda_max: float = 4.0
    log10_lambda_step: float = 0.5
    beta_min: float = 0.05
    beta_max: float = 0.95
    beta_step: float = 0.05
    refine: bool = True
    refine_diameter_tol: float = 1e-6
    refine_max_evals: int = 500
    jitter: JitterPolicy = field(default_factory=JitterPolicy)


@dataclass(frozen=True)
class MarginalObjective:
    """Negative log-marginal likelihood of the whitened maximum-entropy fit."""

    design: WhittleDesign
    cov: ToeplitzCovariance
    kernel_family: KernelFamily
    N: int
    n: int

    def evaluate(self, eta: Hyperparameters) -> float:
        return neg_log_marginal(self, eta)


@dataclass(frozen=True)
class RegressionMarginalObjective:
    """Marginal likelihood of the one-step-predictor regression baseline.

    The regression y_t = sum_k a_k y_{t-k} + u_t is scored with noise variance
    fixed at the preliminary estimate 1 / b0_prelim^2 and prior covariance
    proportional to the trailing kernel block, which makes the posterior mode
    coincide with the baseline's penalized least-squares estimate for every
    (lambda, beta). Only the n x n Gram statistics are stored.
    """

    gram: np.ndarray  # X^T X
    moment: np.ndarray  # X^T y
    target_ss: float  # y^T y
    b0_prelim: float
    kernel_family: KernelFamily
    n: int

    def evaluate(self, eta: Hyperparameters) -> float:
        # -log N(y; 0, lam/b0^2 * X Kbar X^T + I/b0^2) up to constants: the
        # noise scale cancels inside the determinant and multiplies only the
        # quadratic form
        spec = KernelSpec(self.kernel_family, eta.beta, self.n + 1)
        B = trailing_block_root(spec)
        M = eta.lam * (B.T @ self.gram @ B) + np.eye(self.n)
        L = np.linalg.cholesky(M)
        log_det = 2.0 * np.sum(np.log(np.diag(L)))
        w = B.T @ self.moment
        t = scipy.linalg.solve_triangular(L, w, lower=True, check_finite=False)
        quad = self.b0_prelim**2 * (self.target_ss - eta.lam * (t @ t))
        return 0.5 * (log_det + quad)


@dataclass(frozen=True)
class HyperoptResult:
    """Outcome of the two-stage search; eta_hat attains the trace minimum."""

    eta_hat: Hyperparameters
    objective_value: float
    evaluations: int
    trace: tuple[tuple[float, float, float], ...]


def neg_log_marginal(obj: MarginalObjective, eta: Hyperparameters) -> float:
    """Value of 0.5 log det(lam Phi K Phi^T + I) + 0.5 v~^T (lam Phi K Phi^T + I)^{-1} v~.

    Additive constants are fixed to zero by convention. M >= I guarantees a
    stable Cholesky: the log-determinant comes from the factor diagonal and
    the quadratic term from a triangular solve.
    """
    spec = KernelSpec(obj.kernel_family, eta.beta, obj.n + 1)
    K = kernel_matrix(spec)
    phi = obj.design.phi_data
    M = eta.lam * (phi @ K @ phi.T) + np.eye(obj.n + 1)
    L = np.linalg.cholesky(M)
    log_det = 2.0 * np.sum(np.log(np.diag(L)))
    t = scipy.linalg.solve_triangular(L, obj.design.v_tilde, lower=True, check_finite=False)
    return 0.5 * (log_det + t @ t)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if hi < lo:
        raise InvalidHyperparameterError(f"empty grid: [{lo}, {hi}]")
    if hi == lo or step <= 0:
        return np.array([lo])
    count = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, count)


def _simplex_diameter(points: list[np.ndarray]) -> float:
    return max(
        float(np.linalg.norm(p - q)) for i, p in enumerate(points) for q in points[i + 1 :]
    )


def _nelder_mead(f, x0: np.ndarray, diameter_tol: float, max_evals: int) -> None:
    """Minimal deterministic Nelder-Mead (reflection 1, expansion 2,
    contraction 0.5, shrink 0.5) run purely for its side effect of evaluating
    ``f``; the caller keeps the running minimum. Stops when the simplex
    diameter drops below ``diameter_tol`` or the evaluation budget is spent.
    """
    dim = x0.size
    step = 0.25
    points = [np.array(x0, dtype=float)]
    for i in range(dim):
        vertex = np.array(x0, dtype=float)
        vertex[i] += step
        points.append(vertex)
    values = [f(p) for p in points]
    evals = dim + 1

    while evals < max_evals:
        order = np.argsort(values, kind="stable")
        points = [points[i] for i in order]
        values = [values[i] for i in order]
        if _simplex_diameter(points) < diameter_tol:
            return
        centroid = np.mean(points[:-1], axis=0)
        reflected = centroid + (centroid - points[-1])
        f_reflected = f(reflected)
        evals += 1
        if f_reflected < values[0]:
            if evals >= max_evals:
                points[-1], values[-1] = reflected, f_reflected
                return
            expanded = centroid + 2.0 * (reflected - centroid)
            f_expanded = f(expanded)
            evals += 1
            if f_expanded < f_reflected:
                points[-1], values[-1] = expanded, f_expanded
            else:
                points[-1], values[-1] = reflected, f_reflected
            continue
        if f_reflected < values[-2]:
            points[-1], values[-1] = reflected, f_reflected
            continue
        if evals >= max_evals:
            return
        if f_reflected < values[-1]:
            contracted = centroid + 0.5 * (reflected - centroid)
        else:
            contracted = centroid + 0.5 * (points[-1] - centroid)
        f_contracted = f(contracted)
        evals += 1
        if f_contracted < min(f_reflected, values[-1]):
            points[-1], values[-1] = contracted, f_contracted
            continue
        # shrink toward the best vertex
        for i in range(1, dim + 1):
            if evals >= max_evals:
                return
            points[i] = points[0] + 0.5 * (points[i] - points[0])
            values[i] = f(points[i])
            evals += 1


def optimize_hyperparameters(obj, config: PipelineConfig = PipelineConfig()) -> HyperoptResult:
    """Two-stage deterministic search for (lambda, beta).

    Stage 1 evaluates the full grid (ascending log10 lambda outer, ascending
    beta inner). Stage 2 refines from the best grid point with Nelder-Mead in
    (log lambda, logit beta). The returned pair attains the minimum over every
    evaluation made, so the result is never worse than the best grid point.
    ``obj`` only needs an ``evaluate(Hyperparameters) -> float`` method.
    """
    trace: list[tuple[float, float, float]] = []

    def evaluate(lam: float, beta: float) -> float:
        value = float(obj.evaluate(Hyperparameters(lam, beta)))
        trace.append((lam, beta, value))
        return value

    for log10_lam in _grid(config.log10_lambda_min, config.log10_lambda_max, config.log10_lambda_step):
        for beta in _grid(config.beta_min, config.beta_max, config.beta_step):
            evaluate(10.0**log10_lam, float(beta))

    rejected = 0
    if config.refine:
        lam0, beta0, _ = min(trace, key=lambda entry: entry[2])

        def transformed(x: np.ndarray) -> float:
            lam = float(np.exp(x[0]))
            beta = 1.0 / (1.0 + np.exp(-x[1]))
            if not (np.isfinite(lam) and lam > 0.0 and 0.0 < beta < 1.0):
                nonlocal rejected
                rejected += 1
                return np.inf
            return evaluate(lam, beta)

        start = np.array([np.log(lam0), np.log(beta0) - np.log1p(-beta0)])
        _nelder_mead(transformed, start, config.refine_diameter_tol, config.refine_max_evals)

    lam_best, beta_best, value_best = min(trace, key=lambda entry: entry[2])
    return HyperoptResult(
        eta_hat=Hyperparameters(lam_best, beta_best),
        objective_value=value_best,
        evaluations=len(trace) + rejected,
        trace=tuple(trace),
    )


def _step(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except KmaxentError as exc:
        raise PipelineError(name, str(exc)) from exc


def run_pipeline(
    y: TimeSeries,
    n: int,
    kernel_family: KernelFamily,
    config: PipelineConfig = PipelineConfig(),
) -> EstimateResult:
    """Full kernel-based maximum-entropy estimation.

    Executes, in order: preliminary leading-coefficient estimate, covariance
    lags and Toeplitz assembly at order ``n``, Cholesky factorization (with
    the configured jitter policy), whitened design construction, marginal-
    likelihood hyperparameter search, and the closed-form coefficient solve at
    the selected hyperparameters; degrees of freedom and the minimum-phase
    root check are evaluated on the result. Deterministic given its inputs.
    """
    N = y.n_samples
    if not 0 < n < N:
        raise InvalidOrderError(f"order n={n} must satisfy 0 < n < N={N}")
    kernel_family = KernelFamily(kernel_family)
    b0 = _step("preliminary_b0", preliminary_b0, y, config.low_order)
    lags = _step("estimate_lags", estimate_lags, y, n)
    cov = _step("build_toeplitz", build_toeplitz, lags)
    factor = _step("cholesky", cholesky, cov, config.jitter)
    if factor.jitter > 0.0:
        # keep all downstream solves consistent with the repaired matrix,
        # which is again Toeplitz (the shift only moves r_0)
        adjusted = lags.copy()
        adjusted[0] += factor.jitter
        cov = build_toeplitz(adjusted)
    design = _step("whittle_design", build_whittle_design, factor, b0, N, n)
    objective = MarginalObjective(design=design, cov=cov, kernel_family=kernel_family, N=N, n=n)
    hyper = _step("hyperparameters", optimize_hyperparameters, objective, config)
    spec = KernelSpec(kernel_family, hyper.eta_hat.beta, n + 1)
    b_hat = _step("kernel_me", kernel_me, design, cov, spec, hyper.eta_hat)
    df = _step("diagnostics", degrees_of_freedom, cov, spec, hyper.eta_hat, N)
    is_min_phase, max_modulus = check_min_phase(b_hat)
    tag = Method.ME_DI if kernel_family is KernelFamily.DI else Method.ME_TC
    return EstimateResult(
        b_hat=b_hat,
        eta_hat=hyper.eta_hat,
        df=df,
        min_phase_verified=is_min_phase,
        jitter_used=factor.jitter,
        method_tag=tag,
        max_root_modulus=max_modulus,
    )


def run_pem_pipeline(
    y: TimeSeries,
    n: int,
    kernel_family: KernelFamily,
    config: PipelineConfig = PipelineConfig(),
) -> EstimateResult:
    """Kernel-regularized predictor baseline with tuned hyperparameters.

    Shares the marginal-likelihood search machinery with
    :func:`run_pipeline`, applied to the lagged-regression form of the data.
    """
    N = y.n_samples
    if n < 1 or N <= 2 * n:
        raise InvalidOrderError(f"predictor baseline needs N > 2n >= 2, got N={N}, n={n}")
    kernel_family = KernelFamily(kernel_family)
    b0 = _step("preliminary_b0", preliminary_b0, y, config.low_order)
    X, target = _lagged_design(y, n)
    objective = RegressionMarginalObjective(
        gram=X.T @ X,
        moment=X.T @ target,
        target_ss=float(target @ target),
        b0_prelim=b0,
        kernel_family=kernel_family,
        n=n,
    )
    hyper = _step("hyperparameters", optimize_hyperparameters, objective, config)
    spec = KernelSpec(kernel_family, hyper.eta_hat.beta, n + 1)
    b_hat = _step("kernel_pem", kernel_pem, y, n, spec, hyper.eta_hat)
    B = trailing_block_root(spec)
    gram_eigs = np.linalg.eigvalsh(B.T @ objective.gram @ B)
    df = shrinkage_df(gram_eigs, hyper.eta_hat.lam)
    is_min_phase, max_modulus = check_min_phase(b_hat)
    tag = Method.PEM_DI if kernel_family is KernelFamily.DI else Method.PEM_TC
    return EstimateResult(
        b_hat=b_hat,
        eta_hat=hyper.eta_hat,
        df=df,
        min_phase_verified=is_min_phase,
        jitter_used=0.0,
        method_tag=tag,
        max_root_modulus=max_modulus,
    )
