"""Laguerre spinor basis and the tridiagonal overlap / Dirac-Coulomb matrices.

The upper spinor component of basis element ``n`` is
``a_n x^((nu+1)/2) exp(-x/2) L_n^nu(x)`` with ``x = omega*r``; the lower one
follows from kinetic balance with ``mu = 2``.  Both the overlap ``S`` and the
reference Hamiltonian ``H0`` are then tridiagonal and known in closed form.

Complex scaling ``r -> r exp(i*theta)`` is applied by substituting
``omega -> omega*exp(-i*theta)`` everywhere omega appears.

Besides ``H0`` itself the module provides the reduced matrix
``D0 = (H0 - S)/lambda**2``, assembled analytically so that nothing is lost
to cancellation when ``epsilon`` is close to 1 (small lambda, or the
nonrelativistic limit).  The pencil ``(D0, S)`` has eigenvalues
``(epsilon - 1)/lambda**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CouplingTooStrong, InvalidBasis

#: Kinetic-balance parameter; only this value has the right nonrelativistic limit.
MU = 2.0

FINE_STRUCTURE = 1.0 / 137.035999084


@dataclass(frozen=True)
class PhysicsParams:
    """Physical configuration of the radial Dirac problem.

    ``lam`` is the Compton wavelength in the working length unit, ``Z`` the
    signed charge coupling (negative is attractive), ``kappa`` the spin-orbit
    quantum number and ``branch`` selects positive or negative energies.
    """

    lam: float
    Z: float
    kappa: int
    branch: str = "positive"

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa == 0:
            raise InvalidBasis(f"kappa must be a nonzero integer, got {self.kappa!r}")
        object.__setattr__(self, "kappa", int(self.kappa))
        if not self.lam > 0:
            raise InvalidBasis(f"lambda must be positive, got {self.lam!r}")
        if self.branch not in ("positive", "negative"):
            raise InvalidBasis(f"branch must be 'positive' or 'negative', got {self.branch!r}")
        if abs(self.lam * self.Z / self.kappa) >= 1.0:
            raise CouplingTooStrong(
                f"|lambda*Z/kappa| = {abs(self.lam * self.Z / self.kappa):.6g} >= 1"
            )

    def cp_mapped(self) -> "PhysicsParams":
        """Charge-parity image: kappa -> -kappa, Z -> -Z, branch flipped."""
        other = "negative" if self.branch == "positive" else "positive"
        return PhysicsParams(self.lam, -self.Z, -self.kappa, other)

    def effective(self) -> "PhysicsParams":
        """The positive-branch problem whose spectrum this one is built from."""
        return self if self.branch == "positive" else self.cp_mapped()


@dataclass(frozen=True)
class BasisParams:
    omega: float
    N: int
    phi: float
    gamma: float
    nu: float
    sigma_plus: float
    sigma_minus: float
    rho_plus: float
    rho_minus: float
    physics: PhysicsParams = field(repr=False)
    mu: float = MU

    @property
    def alpha(self) -> float:
        """Laguerre order ``2|gamma|`` shared by both spinor components."""
        return 2.0 * abs(self.gamma)

    @property
    def kappa(self) -> int:
        return self.physics.kappa

    @property
    def Z(self) -> float:
        return self.physics.Z

    @property
    def lam(self) -> float:
        return self.physics.lam

    def with_size(self, N: int) -> "BasisParams":
        return make_basis_params(self.physics, self.omega, N)

    def with_omega(self, omega: float) -> "BasisParams":
        return make_basis_params(self.physics, omega, self.N)


def make_basis_params(p: PhysicsParams, omega: float, N: int) -> BasisParams:
    """Derive the basis parameters for ``p``.

    For the negative branch the charge-parity map is applied first, so the
    returned parameters describe the mapped positive-energy problem
    (``physics`` holds the mapped values).
    """
    if not omega > 0:
        raise InvalidBasis(f"omega must be positive, got {omega!r}")
    if int(N) != N or N < 2:
        raise InvalidBasis(f"basis size N must be an integer >= 2, got {N!r}")
    q = p.effective()
    ratio = q.lam * q.Z / q.kappa
    phi = math.asin(ratio)
    gamma = q.kappa * math.sqrt((1.0 - ratio) * (1.0 + ratio))
    nu = 2.0 * abs(gamma) + (1.0 if q.kappa > 0 else -1.0)
    s = 2.0 * q.Z / (q.kappa * omega)
    return BasisParams(
        omega=float(omega),
        N=int(N),
        phi=phi,
        gamma=gamma,
        nu=nu,
        sigma_plus=1.0 + s,
        sigma_minus=1.0 - s,
        rho_plus=1.0 + s * s,
        rho_minus=1.0 - s * s,
        physics=q,
    )


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        if len(self.offdiag) != max(len(self.diag) - 1, 0):
            raise ValueError("offdiag must have length len(diag) - 1")

    @property
    def N(self) -> int:
        return len(self.diag)

    @property
    def is_real(self) -> bool:
        return not (np.iscomplexobj(self.diag) or np.iscomplexobj(self.offdiag))

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diag)
            + np.diag(self.offdiag, 1)
            + np.diag(self.offdiag, -1)
        )

    def to_banded(self) -> np.ndarray:
        """LAPACK ``(1, 1)`` banded layout for :func:`scipy.linalg.solve_banded`."""
        ab = np.zeros((3, self.N), dtype=np.result_type(self.diag, self.offdiag))
        ab[0, 1:] = self.offdiag
        ab[1] = self.diag
        ab[2, :-1] = self.offdiag
        return ab

    def __matmul__(self, v):
        v = np.asarray(v)
        out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        out = out.astype(np.result_type(out, self.offdiag), copy=False)
        if v.ndim == 2:
            out[:-1] += self.offdiag[:, None] * v[1:]
            out[1:] += self.offdiag[:, None] * v[:-1]
        else:
            out[:-1] += self.offdiag * v[1:]
            out[1:] += self.offdiag * v[:-1]
        return out


def scaled_omega(omega: float, theta: float) -> complex:
    if theta == 0:
        return complex(omega)
    return omega * complex(math.cos(theta), -math.sin(theta))


class _Scaled:
    """Quantities that depend on the (possibly complex) scale parameter."""

    def __init__(self, b: BasisParams, theta: float):
        self.w = scaled_omega(b.omega, theta)
        self.c = b.gamma / b.kappa  # cos(phi) > 0
        s = 2.0 * b.Z / (b.kappa * self.w)
        self.sigma_plus = 1.0 + s
        self.sigma_minus = 1.0 - s
        self.rho_plus = 1.0 + s * s
        self.rho_minus = 1.0 - s * s
        self.t2 = (self.w / 4.0) ** 2  # (lambda*omega/4)^2 / lambda^2
        n = np.arange(b.N, dtype=float)
        self.level = 2.0 * n + b.nu + 1.0
        self.hop = np.sqrt((n[:-1] + 1.0) * (n[:-1] + b.nu + 1.0))


def _maybe_real(a: np.ndarray, theta: float) -> np.ndarray:
    return a.real.copy() if theta == 0 else a


def overlap_matrix(b: BasisParams, theta: float = 0.0) -> Tridiagonal:
    """Basis overlap ``<psi_n|psi_m>`` at ``omega*exp(-i*theta)``."""
    q = _Scaled(b, theta)
    lam2 = b.lam**2
    diag = q.level * (1.0 + lam2 * q.t2 * q.rho_plus) - 0.5 * lam2 * q.w * b.Z * q.c
    off = -(1.0 - lam2 * q.t2 * q.rho_minus) * q.hop
    return Tridiagonal(_maybe_real(diag, theta), _maybe_real(off, theta))


def h0_matrix(b: BasisParams, theta: float = 0.0) -> Tridiagonal:
    """Reference Dirac-Coulomb Hamiltonian ``<psi_n|H0|psi_m>``."""
    q = _Scaled(b, theta)
    lam2 = b.lam**2
    kin = q.t2 * (4.0 - q.c)
    diag = q.level * (q.c + lam2 * kin * q.rho_plus) + 2.0 * lam2 * q.w * b.Z * (1.0 - 0.5 * q.c) ** 2
    off = -(q.c - lam2 * kin * q.rho_minus) * q.hop
    return Tridiagonal(_maybe_real(diag, theta), _maybe_real(off, theta))


def h0_reduced_matrix(b: BasisParams, theta: float = 0.0) -> Tridiagonal:
    """``(H0 - S)/lambda**2`` built without subtracting nearly equal numbers."""
    q = _Scaled(b, theta)
    zk = b.Z / b.kappa
    c1 = -zk * zk / (1.0 + q.c)  # (cos(phi) - 1)/lambda^2
    kin = q.t2 * (3.0 - q.c)
    diag = (
        q.level * (c1 + kin * q.rho_plus)
        + 2.0 * q.w * b.Z * (1.0 - 0.5 * q.c) ** 2
        + 0.5 * q.w * b.Z * q.c
    )
    off = -(c1 - kin * q.rho_minus) * q.hop
    return Tridiagonal(_maybe_real(diag, theta), _maybe_real(off, theta))


def component_coefficients(b: BasisParams, theta: float = 0.0):
    """Expansion of both spinor components in orthonormal Laguerre functions.

    With ``ell_k(x) = sqrt(k!/Gamma(k+alpha+1)) x^(alpha/2) e^(-x/2) L_k^alpha(x)``
    and ``alpha = 2|gamma|``, basis element ``n`` has upper component
    ``sqrt(omega) * sum_k P[k, n] ell_k`` and lower component
    ``sqrt(omega) * lambda * sum_k Q[k, n] ell_k``.  Returns ``(P, Q)`` of
    shape ``(N + 1, N)``; row ``N`` is only populated for ``kappa > 0``.
    """
    N = b.N
    q = _Scaled(b, theta)
    alpha = b.alpha
    n = np.arange(N, dtype=float)
    P = np.zeros((N + 1, N))
    Q = np.zeros((N + 1, N), dtype=complex)
    idx = np.arange(N)
    quarter = q.w / 4.0
    if b.kappa > 0:
        P[idx, idx] = np.sqrt(n + alpha + 1.0)
        P[idx + 1, idx] = -np.sqrt(n + 1.0)
        Q[idx, idx] = quarter * q.sigma_minus * np.sqrt(n + alpha + 1.0)
        Q[idx + 1, idx] = quarter * q.sigma_plus * np.sqrt(n + 1.0)
    else:
        P[idx, idx] = np.sqrt(n + alpha)
        P[idx[1:] - 1, idx[1:]] = -np.sqrt(n[1:])
        Q[idx, idx] = -quarter * q.sigma_plus * np.sqrt(n + alpha)
        Q[idx[1:] - 1, idx[1:]] = -quarter * q.sigma_minus * np.sqrt(n[1:])
    if theta == 0:
        Q = Q.real.copy()
    return P, Q

