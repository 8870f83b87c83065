"""Spectral-factor estimators.

Contains the classical maximum-entropy (Yule-Walker) solve with BIC order
selection, the kernel-regularized maximum-entropy estimator in closed form,
a kernel-regularized one-step-predictor baseline, and the minimum-phase root
check applied to every estimate.

Conventions: the estimated inverse spectral factor is the polynomial
b(z) = sum_k b_k z^{-k}; its coefficient vector [b_0 ... b_n] has b_0 > 0 for
all estimators here (b_0 is the inverse innovation standard deviation), and
the implied spectrum is 1 / |b(e^{j theta})|^2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .covariance import (
    CholeskyFactor,
    TimeSeries,
    ToeplitzCovariance,
    build_toeplitz,
    estimate_lags,
)
from .errors import (
    InvalidDataError,
    InvalidHyperparameterError,
    InvalidOrderError,
    NotPositiveDefiniteError,
)
from .kernels import (
    Hyperparameters,
    KernelSpec,
    kernel_matrix,
    trailing_block_root,
    _scaled_inverse,
)


class Method(str, enum.Enum):
    """Tags for the estimators exposed by the experiment harness."""

    ME = "me"
    ME_DI = "me-di"
    ME_TC = "me-tc"
    PEM_DI = "pem-di"
    PEM_TC = "pem-tc"


@dataclass(frozen=True)
class PredictorPolynomial:
    """Coefficients [b_0 ... b_n] of the estimated inverse spectral factor."""

    coeffs: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.coeffs, dtype=float)
        if b.ndim != 1 or b.size == 0:
            raise InvalidDataError("coefficients must form a non-empty 1d vector")
        if not np.all(np.isfinite(b)):
            raise InvalidDataError("coefficients contain non-finite values")
        if b[0] == 0.0:
            raise InvalidDataError("leading coefficient b_0 must be nonzero")
        object.__setattr__(self, "coeffs", b)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class WhittleDesign:
    """Whitened regression form of the linearized log-likelihood.

    v_tilde = (sqrt(N - n) / b0_prelim) * L^{-1} e_1 and
    phi_data = sqrt(N - n) * L^T, where L L^T is the covariance matrix.
    ``n_eff`` stores N - n, the effective sample count of the fit.
    """

    v_tilde: np.ndarray
    phi_data: np.ndarray
    b0_prelim: float
    n_eff: int


@dataclass(frozen=True)
class EstimateResult:
    """One estimator run: coefficients plus the diagnostics surfaced with them.

    ``min_phase_verified`` always reports the outcome of an explicit root
    check, never an assumption; ``eta_hat`` is None for the plain
    maximum-entropy method, which has no hyperparameters.
    """

    b_hat: PredictorPolynomial
    eta_hat: Hyperparameters | None
    df: float
    min_phase_verified: bool
    jitter_used: float
    method_tag: Method
    max_root_modulus: float
    chosen_n: int | None = None


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve an SPD system by Cholesky, mapping failure to a package error."""
    try:
        c = scipy.linalg.cho_factor(matrix, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    return scipy.linalg.cho_solve(c, rhs, check_finite=False)


def yule_walker(cov: ToeplitzCovariance) -> PredictorPolynomial:
    """Classical maximum-entropy solve: a = Sigma^{-1} e_1, b = a / sqrt(a_0).

    a_0 > 0 is guaranteed by positive definiteness (it is a diagonal entry of
    the inverse), so the normalization is always well defined.
    """
    v = np.zeros(cov.order + 1)
    v[0] = 1.0
    a = _solve_spd(cov.matrix, v)
    return PredictorPolynomial(a / np.sqrt(a[0]))


def me_bic(y: TimeSeries, n_max: int) -> tuple[PredictorPolynomial, int]:
    """Yule-Walker fit with BIC order selection over n = 1..n_max.

    BIC(n) = N log(sigma_n^2) + n log N with sigma_n^2 = 1 / a_0(n), the
    one-step prediction-error variance implied by the solve at order n. Ties
    are broken toward the smaller order.
    """
    N = y.n_samples
    if not 1 <= n_max < N:
        raise InvalidOrderError(f"n_max={n_max} must satisfy 1 <= n_max < N={N}")
    lags = estimate_lags(y, n_max)
    log_N = np.log(N)
    best_bic = np.inf
    best: tuple[PredictorPolynomial, int] | None = None
    for n in range(1, n_max + 1):
        b = yule_walker(build_toeplitz(lags[: n + 1]))
        # a_0 = b_0^2, so sigma_n^2 = b_0^{-2}
        bic = -2.0 * N * np.log(b.coeffs[0]) + n * log_N
        if bic < best_bic:
            best_bic = bic
            best = (b, n)
    assert best is not None
    return best


def preliminary_b0(y: TimeSeries, low_order: int = 4) -> float:
    """Leading coefficient of a low-order Yule-Walker fit.

    Equals sqrt(a_0), the inverse innovation standard deviation of the
    low-order autoregressive model; used to linearize the log term of the
    likelihood and to scale the whitened design.
    """
    if not 0 <= low_order < y.n_samples:
        raise InvalidOrderError(
            f"low_order={low_order} must satisfy 0 <= low_order < N={y.n_samples}"
        )
    b = yule_walker(build_toeplitz(estimate_lags(y, low_order)))
    return float(b.coeffs[0])


def build_whittle_design(
    L: CholeskyFactor, b0_prelim: float, N: int, n: int
) -> WhittleDesign:
    """Whitened target and design matrix from the covariance factor.

    L^{-1} e_1 is obtained by a triangular solve; the factor is never
    inverted explicitly.
    """
    if N <= n:
        raise InvalidOrderError(f"need N > n, got N={N}, n={n}")
    if not (np.isfinite(b0_prelim) and b0_prelim > 0):
        raise InvalidDataError(f"preliminary b_0 must be finite and > 0, got {b0_prelim}")
    size = L.L.shape[0]
    if size != n + 1:
        raise InvalidOrderError(f"factor size {size} does not match n + 1 = {n + 1}")
    v = np.zeros(size)
    v[0] = 1.0
    root = np.sqrt(N - n)
    linv_v = scipy.linalg.solve_triangular(L.L, v, lower=True, check_finite=False)
    return WhittleDesign(
        v_tilde=(root / b0_prelim) * linv_v,
        phi_data=root * L.L.T,
        b0_prelim=float(b0_prelim),
        n_eff=N - n,
    )


def _check_kernel_args(spec: KernelSpec, eta: Hyperparameters, size: int) -> None:
    if spec.size != size:
        raise InvalidOrderError(f"kernel size {spec.size} does not match problem size {size}")
    if spec.beta != eta.beta:
        raise InvalidHyperparameterError(
            f"kernel beta {spec.beta} differs from hyperparameter beta {eta.beta}"
        )


def kernel_me(
    design: WhittleDesign,
    cov: ToeplitzCovariance,
    spec: KernelSpec,
    eta: Hyperparameters,
) -> PredictorPolynomial:
    """Kernel-regularized maximum-entropy estimate, normal-equation form.

    Minimizes ||v_tilde - Phi b||^2 + lam^{-1} ||b||^2_{K^{-1}} through the
    equivalent solve b = b0_prelim^{-1} (Sigma + R)^{-1} e_1 with
    R = ((N - n) lam K)^{-1} assembled structurally, so the kernel is never
    inverted numerically. Sigma + R is SPD whenever Sigma is PSD.
    """
    size = cov.order + 1
    _check_kernel_args(spec, eta, size)
    if design.phi_data.shape[0] != size:
        raise InvalidOrderError("design and covariance sizes differ")
    R = _scaled_inverse(spec, design.n_eff * eta.lam)
    v = np.zeros(size)
    v[0] = 1.0
    b = _solve_spd(cov.matrix + R, v) / design.b0_prelim
    return PredictorPolynomial(b)


def kernel_me_regularized_ls(
    design: WhittleDesign, spec: KernelSpec, eta: Hyperparameters
) -> PredictorPolynomial:
    """Algebraically equivalent closed form lam*K*Phi^T (lam*Phi*K*Phi^T + I)^{-1} v_tilde.

    Kept as an independent route for cross-checking :func:`kernel_me`; the
    two must agree to high relative accuracy on any valid input.
    """
    size = design.phi_data.shape[0]
    _check_kernel_args(spec, eta, size)
    K = kernel_matrix(spec)
    phi = design.phi_data
    M = eta.lam * (phi @ K @ phi.T) + np.eye(size)
    t = _solve_spd(M, design.v_tilde)
    return PredictorPolynomial(eta.lam * (K @ (phi.T @ t)))


def _lagged_design(y: TimeSeries, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows [y_{t-1} ... y_{t-n}] and targets y_t for t = n+1..N."""
    s = y.samples
    windows = np.lib.stride_tricks.sliding_window_view(s, n)[:-1]
    return np.ascontiguousarray(windows[:, ::-1]), s[n:]


def kernel_pem(
    y: TimeSeries, n: int, spec: KernelSpec, eta: Hyperparameters
) -> PredictorPolynomial:
    """Kernel-regularized one-step-predictor baseline.

    Fits predictor weights a minimizing
    sum_t (y_t - sum_k a_k y_{t-k})^2 + lam^{-1} a^T Kbar^{-1} a, where Kbar is
    the trailing n x n principal block of the size-(n+1) kernel. The innovation
    variance is the mean squared residual and the returned polynomial is
    (1 - sum_k a_k z^{-k}) / sigma_hat. Unlike the maximum-entropy routes, the
    result carries no minimum-phase guarantee.
    """
    N = y.n_samples
    if n < 1 or N <= 2 * n:
        raise InvalidOrderError(f"predictor baseline needs N > 2n >= 2, got N={N}, n={n}")
    _check_kernel_args(spec, eta, n + 1)
    X, target = _lagged_design(y, n)
    # structured root of the trailing kernel block; a numerical Cholesky of
    # the block itself breaks down for decay rates near one
    B = trailing_block_root(spec)
    gram = B.T @ (X.T @ X) @ B
    M = eta.lam * gram + np.eye(n)
    rhs = B.T @ (X.T @ target)
    a = eta.lam * (B @ _solve_spd(M, rhs))
    resid = target - X @ a
    sigma_hat = np.sqrt(np.mean(resid**2))
    return PredictorPolynomial(np.concatenate(([1.0], -a)) / sigma_hat)


def check_min_phase(b: PredictorPolynomial) -> tuple[bool, float]:
    """Explicit stability check of b(z) via companion-matrix eigenvalues.

    Roots of b_0 z^n + b_1 z^{n-1} + ... + b_n are computed with
    ``numpy.roots``; returns (all roots strictly inside the unit circle,
    maximum root modulus). The inequality is strict with no tolerance slack.
    """
    roots = np.roots(b.coeffs)
    if roots.size == 0:
        return True, 0.0
    max_modulus = float(np.max(np.abs(roots)))
    return max_modulus < 1.0, max_modulus
