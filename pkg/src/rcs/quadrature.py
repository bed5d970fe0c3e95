"""Gauss-Laguerre rules from the Jacobi matrix, and sampling of radial functions.

The rule of order ``nu`` and size ``K`` has nodes at the eigenvalues of the
Laguerre Jacobi matrix.  Its eigenvectors ``Lambda[:, k]`` are normalised
values of the orthonormal Laguerre polynomials at node ``k``, with the sign
convention of ``L_n^nu`` itself (alternating off-diagonal sign relative to the
textbook Jacobi matrix).  That convention makes

    F[n, m] = sum_k Lambda[n, k] Lambda[m, k] F(eta_k / omega)

approximate ``int x^nu e^-x ell_n(x) F(x/omega) ell_m(x) dx`` with the
normalised ``ell_n ~ L_n^nu``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .errors import EigFailure, PotentialSingular

_RESCALE = 1e150


@dataclass(frozen=True)
class QuadratureRule:
    nu: float
    K: int
    nodes: np.ndarray
    evec: np.ndarray = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        """Weights normalised to ``Gamma(nu + 1)``, i.e. summing to 1."""
        return self.evec[0] ** 2


def jacobi_matrix(nu: float, K: int):
    n = np.arange(K, dtype=float)
    return 2.0 * n + nu + 1.0, np.sqrt((n[:-1] + 1.0) * (n[:-1] + nu + 1.0))


def _polynomial_columns(nu: float, K: int, x: np.ndarray):
    """Orthonormal Laguerre values ``p_n(x)``, n < K, each column rescaled freely.

    Upward three-term recursion; columns are rescaled whenever they grow past
    ``_RESCALE`` so that large nodes do not overflow.  Also returns the
    derivative of ``p_K`` and ``p_K`` itself in the same scaling (for Newton
    polishing of the nodes).
    """
    a, b = jacobi_matrix(nu, K + 1)
    p = np.empty((K + 1, x.size))
    dp = np.empty((K + 1, x.size))
    p[0] = 1.0
    dp[0] = 0.0
    p[1] = (a[0] - x) / b[0]
    dp[1] = -1.0 / b[0]
    for n in range(1, K):
        p[n + 1] = ((a[n] - x) * p[n] - b[n - 1] * p[n - 1]) / b[n]
        dp[n + 1] = ((a[n] - x) * dp[n] - p[n] - b[n - 1] * dp[n - 1]) / b[n]
        big = np.abs(p[n + 1]) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / np.abs(p[n + 1]), 1.0)
            p[: n + 2] *= scale
            dp[: n + 2] *= scale
    return p[:K], p[K], dp[K]


def build_rule(nu: float, K: int, polish: int = 2) -> QuadratureRule:
    """Gauss-Laguerre rule of order ``nu`` with ``K`` nodes.

    Nodes come from a symmetric tridiagonal eigensolver and are then polished
    by Newton steps on ``p_K``; eigenvectors are rebuilt from the recursion so
    that tiny components keep their relative accuracy.
    """
    if not nu > -1:
        raise ValueError(f"Laguerre order must exceed -1, got {nu!r}")
    if int(K) != K or K < 1:
        raise ValueError(f"rule size must be a positive integer, got {K!r}")
    K = int(K)
    d, e = jacobi_matrix(nu, K)
    try:
        nodes = linalg.eigh_tridiagonal(d, e, eigvals_only=True)
    except linalg.LinAlgError as exc:
        raise EigFailure(f"Jacobi matrix eigensolver failed: {exc}") from exc
    nodes = np.sort(nodes)
    for _ in range(polish):
        _, pk, dpk = _polynomial_columns(nu, K, nodes)
        step = pk / dpk
        ok = np.isfinite(step) & (np.abs(step) < 1e-6 * np.maximum(nodes, 1e-300))
        nodes = np.where(ok, nodes - np.where(ok, step, 0.0), nodes)
    cols, _, _ = _polynomial_columns(nu, K, nodes)
    cols /= np.linalg.norm(cols, axis=0)
    if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
        raise EigFailure("Gauss-Laguerre nodes are not positive and distinct")
    return QuadratureRule(nu=float(nu), K=K, nodes=nodes, evec=cols)


@dataclass(frozen=True)
class SampledMatrix:
    entries: np.ndarray
    nu: float
    K: int
    omega_scaled: complex


def node_radii(rule: QuadratureRule, omega_scaled: complex) -> np.ndarray:
    r = rule.nodes / omega_scaled
    return r.real.copy() if np.imag(omega_scaled) == 0 else r


def sample_values(rule: QuadratureRule, values: np.ndarray, N: int) -> np.ndarray:
    """``sum_k Lambda[n,k] Lambda[m,k] values[k]`` for ``n, m < N``."""
    if N > rule.K:
        raise ValueError(f"cannot sample {N} rows from a rule of size {rule.K}")
    L = rule.evec[:N]
    out = (L * values) @ L.T
    return 0.5 * (out + out.T)


def sample(rule: QuadratureRule, F, omega_scaled: complex, N: int) -> SampledMatrix:
    """Sampling matrix of the radial function ``F`` in the first ``N`` functions.

    Under complex scaling ``omega_scaled = omega*exp(-i*theta)`` so ``F`` is
    evaluated along the ray ``r*exp(i*theta)``.
    """
    values = np.asarray(F(node_radii(rule, omega_scaled)))
    if values.shape == ():
        values = np.full(rule.K, values)
    if not np.all(np.isfinite(values)):
        raise PotentialSingular("radial function is not finite at a quadrature node")
    return SampledMatrix(sample_values(rule, values, N), rule.nu, rule.K, complex(omega_scaled))


def inverse_x_matrix(nu: float, N: int) -> np.ndarray:
    """Exact ``int x^nu e^-x ell_n ell_m / x dx`` for the normalised ``ell_n ~ L_n^nu``.

    Uses ``int x^(nu-1) e^-x L_m L_n dx = Gamma(m+nu+1)/(nu m!)`` for
    ``m <= n``; requires ``nu > 0``.
    """
    if not nu > 0:
        raise ValueError("the 1/x matrix needs nu > 0")
    n = np.arange(N, dtype=float)
    # log sqrt(Gamma(n+nu+1)/n!)
    half = 0.5 * (special.gammaln(n + nu + 1.0) - special.gammaln(n + 1.0))
    lo = np.minimum.outer(np.arange(N), np.arange(N))
    hi = np.maximum.outer(np.arange(N), np.arange(N))
    return np.exp(half[lo] - half[hi]) / nu
