"""Decay-encoding kernel matrices and their structured inverses.

Two prior covariance families for the predictor coefficient vector are
provided: a diagonal kernel with geometrically decaying variances ("di") and a
tuned-correlated kernel ("tc") that additionally couples neighbouring
coefficients. Entries follow the 1-based index convention (t, s = 1..n+1);
storage is 0-based with the exponent offset applied explicitly.

The tc kernel admits an exact inverse factorization K^{-1} = F D F^T with F
lower bidiagonal and D diagonal, so every scaled inverse used downstream is
built structurally instead of by matrix inversion; the kernel itself is very
ill-conditioned for decay rates near one, while F and D are benign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidHyperparameterError, InvalidOrderError


class KernelFamily(str, enum.Enum):
    DI = "di"
    TC = "tc"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, decay rate beta in (0, 1), and matrix size n + 1."""

    family: KernelFamily
    beta: float
    size: int

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        _check_beta(self.beta)
        if self.size < 1:
            raise InvalidHyperparameterError(f"kernel size must be >= 1, got {self.size}")


@dataclass(frozen=True)
class Hyperparameters:
    """Prior scale lam > 0 and kernel decay rate beta in (0, 1)."""

    lam: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidHyperparameterError(f"lambda must be finite and > 0, got {self.lam}")
        _check_beta(self.beta)


@dataclass(frozen=True)
class KernelFactorization:
    """Structured factorization K^{-1} = F diag(d) F^T of a kernel inverse."""

    F: np.ndarray
    d: np.ndarray
    variant: str  # "di_inverse" or "tc_inverse"


def _check_beta(beta: float) -> None:
    if not (np.isfinite(beta) and 0.0 < beta < 1.0):
        raise InvalidHyperparameterError(f"beta must lie strictly in (0, 1), got {beta}")


def kernel_matrix(spec: KernelSpec) -> np.ndarray:
    """Dense kernel matrix for the given spec.

    di: diag(beta, beta^2, ..., beta^{n+1}).
    tc: entry (t, s) = beta^{max(t, s)} - beta^{n+2} with t, s = 1..n+1.
    """
    beta, size = spec.beta, spec.size
    if spec.family is KernelFamily.DI:
        return np.diag(beta ** np.arange(1, size + 1))
    idx = np.arange(1, size + 1)
    return beta ** np.maximum.outer(idx, idx) - beta ** (size + 1)


def _bidiagonal_difference(size: int) -> np.ndarray:
    F = np.eye(size)
    F[np.arange(1, size), np.arange(size - 1)] = -1.0
    return F


def inverse_factorization(spec: KernelSpec) -> KernelFactorization:
    """Structured inverse K^{-1} = F diag(d) F^T.

    For di, F is the identity and d_k = beta^{-k} (k = 1..n+1). For tc, F is
    lower bidiagonal (1 on the diagonal, -1 below) and
    d_k = 1 / ((beta - beta^2) * beta^{k-1}).
    """
    beta, size = spec.beta, spec.size
    if spec.family is KernelFamily.DI:
        return KernelFactorization(
            F=np.eye(size), d=beta ** -np.arange(1, size + 1), variant="di_inverse"
        )
    d = 1.0 / ((beta - beta**2) * beta ** np.arange(size))
    return KernelFactorization(F=_bidiagonal_difference(size), d=d, variant="tc_inverse")


def square_root(spec: KernelSpec) -> np.ndarray:
    """Closed-form factor B with kernel_matrix(spec) == B @ B.T exactly.

    di: diag(beta^{k/2}), k = 1..n+1. tc: from K^{-1} = F D F^T it follows
    that K = S^T D^{-1} S with S = F^{-1} (lower triangular of ones), giving
    the upper-triangular root B[i, j] = sqrt((beta - beta^2) beta^j), j >= i
    (0-based). Well conditioned for every beta in (0, 1), unlike the kernel
    itself, so it is safe where a numerical Cholesky of K would fail.
    """
    beta, size = spec.beta, spec.size
    if spec.family is KernelFamily.DI:
        return np.diag(np.sqrt(beta ** np.arange(1, size + 1)))
    col = np.sqrt((beta - beta**2) * beta ** np.arange(size))
    return np.triu(np.tile(col, (size, 1)))


def trailing_block_root(spec: KernelSpec) -> np.ndarray:
    """Factor B with kernel_matrix(spec)[1:, 1:] == B @ B.T exactly.

    The trailing principal block of the size-(n+1) kernel equals beta times
    the size-n kernel of the same family, so its root is sqrt(beta) times the
    smaller structured root.
    """
    if spec.size < 2:
        raise InvalidOrderError("trailing block requires kernel size >= 2")
    inner = KernelSpec(spec.family, spec.beta, spec.size - 1)
    return np.sqrt(spec.beta) * square_root(inner)


def _scaled_inverse(spec: KernelSpec, scale: float) -> np.ndarray:
    """Dense (scale * K)^{-1} assembled from the structured factorization."""
    fac = inverse_factorization(spec)
    d = fac.d / scale
    if spec.family is KernelFamily.DI:
        return np.diag(d)
    return (fac.F * d) @ fac.F.T


def scaled_inverse_R(spec: KernelSpec, lam: float, N: int, n: int) -> np.ndarray:
    """The regularization matrix R = ((N - n) * lam * K)^{-1}, built structurally.

    di: diagonal with entries ((N - n) * lam * beta^k)^{-1}, k = 1..n+1.
    tc: F diag(d) F^T with d_k = ((N - n) * lam * beta^{k-1} * (beta - beta^2))^{-1}.
    """
    if n < 0 or N <= n:
        raise InvalidOrderError(f"need N > n >= 0, got N={N}, n={n}")
    if spec.size != n + 1:
        raise InvalidOrderError(f"kernel size {spec.size} does not match n + 1 = {n + 1}")
    if not (np.isfinite(lam) and lam > 0):
        raise InvalidHyperparameterError(f"lambda must be finite and > 0, got {lam}")
    return _scaled_inverse(spec, (N - n) * lam)
