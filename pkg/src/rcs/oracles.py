"""Reference solutions: exact Dirac-Coulomb levels, the exact nonrelativistic
Woods-Saxon S-wave spectrum, and the nonrelativistic-limit helper."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .basis import PhysicsParams
from .errors import NoRoot
from .potentials import NEUTRON, NuclearUnits

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HydrogenLevel:
    """Exact bound level of the point-charge Dirac problem.

    ``n`` is the radial quantum number and ``tau`` is ``gamma`` for
    ``kappa > 0`` and ``-gamma - 1`` for ``kappa < 0``, so that the level
    depends on ``n + tau + 1``.  ``energy`` is ``(eps^2 - 1)/(2 lam^2)``.
    """

    n: int
    tau: float
    eps_exact: float
    energy: float


def hydrogen_exact(p: PhysicsParams, n: int) -> HydrogenLevel:
    """``eps = +-[1 + (lam Z/(n + tau + 1))^2]^-1/2``.

    Negative-branch levels are the negated positive-branch levels of the
    charge-parity image, so they exist only for a repulsive ``Z``.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"radial quantum number must be a non-negative integer, got {n!r}")
    q = p.effective()
    if not q.Z < 0:
        raise ValueError(f"no bound levels on the {p.branch} branch for Z = {p.Z:g}")
    ratio = q.lam * q.Z / q.kappa
    gamma = q.kappa * math.sqrt((1.0 - ratio) * (1.0 + ratio))
    tau = gamma if q.kappa > 0 else -gamma - 1.0
    d = n + tau + 1.0
    x = (q.lam * q.Z / d) ** 2
    eps = 1.0 / math.sqrt(1.0 + x)
    # (eps^2 - 1)/(2 lam^2) without the cancellation
    energy = -0.5 * (q.Z / d) ** 2 / (1.0 + x)
    if p.branch == "negative":
        eps = -eps
    return HydrogenLevel(int(n), tau, eps, energy)


@dataclass(frozen=True)
class WSLevelEquation:
    """Quantisation condition for S-wave bound states in a Woods-Saxon well.

    ``arg G(2i a) - 2 arg G(b + i a) - atan(a/b) + a R0/r0 = (m + 1/2) pi``
    with ``a = r0 sqrt(2 M (E + V0))`` and ``b = r0 sqrt(-2 M E)``, where
    ``M = m/hbar^2`` (``units.energy_to_mc2``).  Energies in MeV, lengths in
    fm.  ``arg G`` is the continuous imaginary part of ``log Gamma``.
    """

    V0: float
    R0: float
    r0: float
    units: NuclearUnits = NEUTRON

    def alpha(self, E):
        return self.r0 * np.sqrt(2.0 * self.units.energy_to_mc2 * (E + self.V0))

    def beta(self, E):
        return self.r0 * np.sqrt(-2.0 * self.units.energy_to_mc2 * E)

    def phase(self, E):
        a, b = self.alpha(E), self.beta(E)
        return (
            special.loggamma(2j * a).imag
            - 2.0 * special.loggamma(b + 1j * a).imag
            - np.arctan(a / b)
            + a * self.R0 / self.r0
        )

    def residual(self, E, m: int):
        return self.phase(E) - (m + 0.5) * math.pi

    def roots(self, steps: int = 2000) -> list:
        """All bound energies, deepest first, as ``(E, m)`` pairs.

        The range ``(-V0, 0)`` is scanned on a uniform grid (ends kept
        ``1e-6 V0`` away) and every crossing of a line ``(m + 1/2) pi`` is
        refined with Brent's method.
        """
        delta = 1e-6 * self.V0
        grid = np.linspace(-self.V0 + delta, -delta, steps + 1)
        g = self.phase(grid) / math.pi - 0.5
        out = []
        for i in range(steps):
            lo, hi = g[i], g[i + 1]
            # the phase is continuous; a jump of half a branch or more is not a crossing
            if math.floor(lo) == math.floor(hi) or abs(hi - lo) >= 0.5:
                continue
            m = max(math.floor(lo), math.floor(hi))
            E = optimize.brentq(self.residual, grid[i], grid[i + 1], args=(m,), xtol=1e-14, rtol=4 * np.finfo(float).eps)
            out.append((E, m))
        return out


def ws_nonrel_exact(V0: float, R0: float, r0: float, n: int, units: NuclearUnits = NEUTRON) -> float:
    """Exact nonrelativistic S-wave level ``n`` (0 = deepest) in MeV."""
    levels = WSLevelEquation(V0, R0, r0, units).roots()
    if not 0 <= n < len(levels):
        raise NoRoot(f"Woods-Saxon well has {len(levels)} S-wave levels; level {n} does not exist")
    return float(levels[n][0])


def nonrel_limit(p: PhysicsParams, scale: float) -> PhysicsParams:
    """Divide lambda by ``scale`` to approach the nonrelativistic limit.

    Scales much beyond ``1e3`` lose accuracy: the relativistic corrections
    become smaller than the rounding error in the pencil.
    """
    if not scale >= 1:
        raise ValueError(f"scale must be >= 1, got {scale!r}")
    if scale > 1e3:
        log.warning("lambda reduced by %g; expect growing rounding errors", scale)
    if scale == 1:
        return p
    return PhysicsParams(p.lam / scale, p.Z, p.kappa, p.branch)
