"""Short-range potentials: models, unit conversion and their matrix elements.

A :class:`PotentialSpec` holds the vector ``V``, scalar ``S`` and
pseudo-scalar ``W`` parts.  They enter the radial Dirac Hamiltonian as
``lam * [[lam*(V+S), W], [W, lam*(V-S)]]``; after the unitary rotation that
puts the Coulomb problem in tridiagonal form this becomes
``lam * [[lam*U+, U0], [U0, lam*U-]]``.

All functions here take complex radii so that they can be sampled along the
complex-scaled ray.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .basis import BasisParams, PhysicsParams, component_coefficients, scaled_omega
from .errors import IndexOverflow, PotentialSingular
from .quadrature import QuadratureRule, inverse_x_matrix, node_radii, sample_values

HALF_PI = 0.5 * math.pi


#: CODATA 2018 neutron-to-proton mass ratio.
NEUTRON_PROTON_MASS_RATIO = 1.00137841931


@dataclass(frozen=True)
class NuclearUnits:
    """Conversions for a nucleon with lengths in fm and energies in MeV.

    The defaults are for the proton.  ``energy_to_mc2`` is ``m/hbar^2`` in
    MeV^-1 fm^-2 and ``coulomb_scale`` the length unit ``4 pi eps0 hbar^2/(m e^2)``
    in fm.
    """

    energy_to_mc2: float = 0.02409660653
    coulomb_scale: float = 28.81989156
    lambda_fm: float = 0.2103089104
    particle: str = "proton"

    @classmethod
    def for_particle(cls, particle: str) -> "NuclearUnits":
        if particle == "proton":
            return cls()
        if particle == "neutron":
            r = NEUTRON_PROTON_MASS_RATIO
            base = cls()
            return cls(base.energy_to_mc2 * r, base.coulomb_scale / r, base.lambda_fm / r, "neutron")
        raise ValueError(f"unknown particle {particle!r}")


NUCLEAR = NuclearUnits()
NEUTRON = NuclearUnits.for_particle("neutron")


@dataclass(frozen=True)
class RadialFunction:
    """A radial function of complex radius with a declared analyticity sector.

    The value is ``func(r) + inv_r/r``; keeping the Coulomb-like ``1/r`` part
    separate lets the matrix elements treat it exactly.  ``sector`` is the
    largest ``|arg r|`` at which the function may be evaluated; asking for
    more raises :class:`PotentialSingular`.
    """

    func: Callable[[np.ndarray], np.ndarray]
    sector: float = HALF_PI
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    inv_r: float = 0.0

    def _check(self, r):
        if np.iscomplexobj(r) and r.size:
            worst = float(np.max(np.abs(np.angle(r))))
            if worst > self.sector + 1e-15:
                raise PotentialSingular(
                    f"{self.name}: evaluated at |arg r| = {worst:.4g} beyond its "
                    f"analyticity sector {self.sector:.4g}"
                )

    def regular(self, r):
        """The function without its ``inv_r/r`` part."""
        r = np.asarray(r)
        self._check(r)
        return self.func(r)

    def __call__(self, r):
        out = self.regular(r)
        if self.inv_r:
            out = out + self.inv_r / np.asarray(r)
        return out

    def scaled(self, factor: float) -> "RadialFunction":
        if factor == 1.0:
            return self
        f = self.func
        return RadialFunction(
            lambda r: factor * f(r), self.sector, self.name, dict(self.params), factor * self.inv_r
        )

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        f, g = self.func, other.func
        return RadialFunction(
            lambda r: f(r) + g(r),
            min(self.sector, other.sector),
            f"{self.name}+{other.name}",
            inv_r=self.inv_r + other.inv_r,
        )

    def __neg__(self):
        return self.scaled(-1.0)


def combine(terms, sector: float, name: str) -> RadialFunction:
    """Linear combination ``sum c_i f_i`` of ``(c, f)`` pairs."""
    terms = [(c, f) for c, f in terms if c != 0]
    funcs = [(c, f.func) for c, f in terms]

    def g(r):
        out = _zero(r)
        for c, fn in funcs:
            out = out + c * fn(r)
        return out

    return RadialFunction(g, sector, name, inv_r=sum(c * f.inv_r for c, f in terms))


def _zero(r):
    return np.zeros(np.shape(r), dtype=np.result_type(r, float))


ZERO = RadialFunction(_zero, HALF_PI, "zero")


@dataclass(frozen=True)
class PotentialSpec:
    """The (V, S, W) triple with multiplicative couplings, in internal units."""

    V: Optional[RadialFunction] = None
    S: Optional[RadialFunction] = None
    W: Optional[RadialFunction] = None
    eta_V: float = 1.0
    eta_S: float = 1.0
    eta_W: float = 1.0
    unit_system: str = "atomic"
    short_range_radius: Optional[float] = None

    def component(self, name: str) -> RadialFunction:
        f = getattr(self, name)
        if f is None:
            return ZERO
        return f.scaled(getattr(self, "eta_" + name))

    @property
    def is_zero(self) -> bool:
        return all(
            getattr(self, c) is None or getattr(self, "eta_" + c) == 0 for c in "VSW"
        )

    def theta_ceiling(self):
        """Largest usable scaling angle and the component that limits it."""
        best, who = HALF_PI, None
        for c in "VSW":
            f = getattr(self, c)
            if f is not None and getattr(self, "eta_" + c) != 0 and f.sector < best:
                best, who = f.sector, f"{c} ({f.name})"
        return best, who

    def cp_mapped(self) -> "PotentialSpec":
        """Charge-parity image of the potential: V -> -V, W -> -W, S unchanged."""
        return PotentialSpec(
            V=None if self.V is None else -self.V,
            S=self.S,
            W=None if self.W is None else -self.W,
            eta_V=self.eta_V,
            eta_S=self.eta_S,
            eta_W=self.eta_W,
            unit_system=self.unit_system,
            short_range_radius=self.short_range_radius,
        )


@dataclass(frozen=True)
class TransformedPotential:
    U_plus: RadialFunction
    U_minus: RadialFunction
    U_zero: RadialFunction
    provenance: dict
    zero: bool = False
    has_u0: bool = True


def transform(spec: PotentialSpec, b: BasisParams, p: Optional[PhysicsParams] = None) -> TransformedPotential:
    """Rotate the potential matrix with the same angle as the Dirac-Coulomb part.

    ``U+- = V +- (gamma/kappa) S +- (Z/kappa) W`` and
    ``U0 = (gamma/kappa) W - lam^2 (Z/kappa) S``.  ``b`` already describes the
    mapped problem for the negative branch; pass the original ``p`` so the
    potential is mapped as well.
    """
    if p is not None and p.branch == "negative":
        spec = spec.cp_mapped()
    c = b.gamma / b.kappa
    zk = b.Z / b.kappa
    lam2 = b.lam**2
    V, S, W = (spec.component(n) for n in "VSW")
    sector, _ = spec.theta_ceiling()
    has = {n: getattr(spec, n) is not None and getattr(spec, "eta_" + n) != 0 for n in "VSW"}
    u_plus = combine([(1.0, V), (c, S), (zk, W)], sector, "U+")
    u_minus = combine([(1.0, V), (-c, S), (-zk, W)], sector, "U-")
    u_zero = combine([(c, W), (-lam2 * zk, S)], sector, "U0")

    prov = {"gamma": b.gamma, "kappa": b.kappa, "Z": b.Z, "lambda": b.lam}
    return TransformedPotential(
        u_plus,
        u_minus,
        u_zero,
        prov,
        zero=spec.is_zero,
        has_u0=has["W"] or (has["S"] and zk != 0),
    )


def potential_matrix(
    tp: TransformedPotential,
    b: BasisParams,
    rule_nu: QuadratureRule,
    rule_alpha: QuadratureRule,
    theta: float = 0.0,
    reduced: bool = True,
) -> np.ndarray:
    """Dense N x N potential matrix ``<psi_n|U|psi_m>``.

    The upper-upper block is ``R^nu`` with ``R(r) = (omega r) U+(r)`` sampled
    by the order-``nu`` rule; the couplings to the lower components use the
    order-``2|gamma|`` rule.  Any ``1/r`` part of the potentials is added
    from the exact Laguerre matrix of ``1/x`` instead of being sampled.  With
    ``reduced`` the result is divided by ``lam^2`` (the normalisation used by
    the shifted pencil).
    """
    N = b.N
    if tp.zero:
        return np.zeros((N, N), dtype=float if theta == 0 else complex)
    if rule_alpha.K < N + 1 or rule_nu.K < N:
        raise IndexOverflow(f"quadrature size must be at least N+1 = {N + 1}")
    if abs(rule_nu.nu - b.nu) > 1e-12 or abs(rule_alpha.nu - b.alpha) > 1e-12:
        raise ValueError("quadrature orders do not match the basis")
    w = scaled_omega(b.omega, theta)
    lam2 = b.lam**2

    r_nu = node_radii(rule_nu, w)
    upper = sample_values(rule_nu, rule_nu.nodes * _checked(tp.U_plus, r_nu), N)
    if tp.U_plus.inv_r:
        upper = upper + tp.U_plus.inv_r * w * np.eye(N)

    P, Q = component_coefficients(b, theta)
    r_al = node_radii(rule_alpha, w)
    inv_x = None
    if tp.U_minus.inv_r or tp.U_zero.inv_r:
        inv_x = inverse_x_matrix(b.alpha, N + 1)
    lower = sample_values(rule_alpha, _checked(tp.U_minus, r_al), N + 1)
    if tp.U_minus.inv_r:
        lower = lower + tp.U_minus.inv_r * w * inv_x
    out = upper + lam2 * (Q.T @ lower @ Q)
    if tp.has_u0:
        mixed = sample_values(rule_alpha, _checked(tp.U_zero, r_al), N + 1)
        if tp.U_zero.inv_r:
            mixed = mixed + tp.U_zero.inv_r * w * inv_x
        cross = P.T @ mixed @ Q
        out = out + cross + cross.T
    out = 0.5 * (out + out.T)
    if not reduced:
        out = lam2 * out
    if theta == 0:
        out = out.real.copy()
    return out


def _checked(f: RadialFunction, r: np.ndarray) -> np.ndarray:
    values = np.asarray(f.regular(r))
    if values.shape == ():
        values = np.full(r.shape, values)
    if not np.all(np.isfinite(values)):
        raise PotentialSingular(f"{f.name} is not finite at a quadrature node")
    return values


# --- models -----------------------------------------------------------------


def woods_saxon(V0: float, R0: float, r0: float) -> RadialFunction:
    """``-V0 / (1 + exp((r - R0)/r0))``.

    The nearest poles sit at ``R0 +- i*pi*r0``; the declared sector keeps a
    10% margin below ``atan(pi*r0/R0)``.
    """
    if not (V0 > 0 and R0 > 0 and r0 > 0):
        raise ValueError("Woods-Saxon parameters must be positive")
    tol = 1e-3 * r0

    def f(r):
        r = np.asarray(r)
        if np.iscomplexobj(r):
            # poles at R0 + i*pi*r0*(2j+1)
            j = np.round((r.imag / (math.pi * r0) - 1.0) / 2.0)
            dist = np.abs(r - (R0 + 1j * math.pi * r0 * (2 * j + 1)))
            if np.any(dist < tol):
                raise PotentialSingular("Woods-Saxon evaluated at a pole")
            z = (r - R0) / r0
            # exp overflow for large Re z is harmless: the value tends to 0
            with np.errstate(over="ignore"):
                return -V0 / (1.0 + np.exp(z))
        z = (r - R0) / r0
        with np.errstate(over="ignore"):
            return -V0 * np.exp(-np.logaddexp(0.0, z))

    sector = 0.9 * math.atan(math.pi * r0 / R0)
    return RadialFunction(f, sector, "woods-saxon", {"V0": V0, "R0": R0, "r0": r0})


def sphere_coulomb_correction(Z: float, Rc: float) -> RadialFunction:
    """Difference between a uniformly charged sphere and a point charge.

    ``Z*(3/(2Rc) - r^2/(2Rc^3) - 1/r)`` inside ``Rc`` and zero outside, for
    use next to a reference Hamiltonian that keeps the point charge ``Z/r``.
    Stored as the bounded sphere potential plus an ``inv_r = -Z`` part so the
    cancelling ``1/r`` is represented exactly.

    With a strong charge this split converges poorly: the basis is tuned to
    the point-charge behaviour at the origin, which the total potential no
    longer has, and spurious deep levels appear.  :func:`convert_nuclear`
    therefore uses :func:`uniform_sphere_coulomb` with a Coulomb-free
    reference by default.
    """
    sphere = uniform_sphere_coulomb(Z, Rc)
    return RadialFunction(sphere.func, 0.0, "coulomb-sphere-correction", {"Z": Z, "Rc": Rc}, inv_r=-Z)


def uniform_sphere_coulomb(Z: float, Rc: float) -> RadialFunction:
    """Potential of a uniformly charged sphere: ``Z/r`` outside ``Rc`` and
    ``Z/(2Rc) * (3 - (r/Rc)^2)`` inside.

    Bounded everywhere; the ``Z/r`` tail is sampled like any other function,
    so the reference Hamiltonian should then carry no Coulomb term.
    """
    if not Rc > 0:
        raise ValueError("charge radius must be positive")

    def f(r):
        r = np.asarray(r, dtype=float)
        inside = r < Rc
        ro = np.where(inside, Rc, r)
        return np.where(inside, Z * (1.5 / Rc - 0.5 * r**2 / Rc**3), Z / ro)

    return RadialFunction(f, 0.0, "coulomb-sphere", {"Z": Z, "Rc": Rc})


def power_exp(c: float, p: float, a: float) -> RadialFunction:
    """``c * r**p * exp(-a*r)``; analytic in the whole right half-plane."""

    def f(r):
        return c * r**p * np.exp(-a * r)

    return RadialFunction(f, HALF_PI, "power-exp", {"c": c, "p": p, "a": a})


def tabulated(r_grid, values) -> RadialFunction:
    """Cubic interpolation of tabulated data; zero beyond the last grid point.

    Tabulated data has no continuation off the real axis, so the sector is 0.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    spline = CubicSpline(r_grid, np.asarray(values, dtype=float), extrapolate=False)
    lo, hi = r_grid[0], r_grid[-1]

    def f(r):
        r = np.asarray(r, dtype=float)
        out = spline(np.clip(r, lo, hi))
        return np.where(r > hi, 0.0, out)

    return RadialFunction(f, 0.0, "tabulated", {"points": len(r_grid)})


# --- unit conversion ----------------------------------------------------------


def mev_to_internal(E, units: NuclearUnits = NUCLEAR):
    return E * units.energy_to_mc2


def internal_to_mev(E, units: NuclearUnits = NUCLEAR):
    return E / units.energy_to_mc2


def convert_nuclear(
    Z: float,
    kappa: int,
    V0: Optional[float] = None,
    R0: Optional[float] = None,
    r0: Optional[float] = None,
    eta_V: float = 0.0,
    eta_S: float = 0.0,
    eta_W: float = 0.0,
    Rc: Optional[float] = None,
    branch: str = "positive",
    lam_scale: float = 1.0,
    units: NuclearUnits = NUCLEAR,
    coulomb: str = "sphere",
):
    """Build internal-unit parameters from MeV/fm inputs for a nucleon.

    Energies, including the pseudo-scalar strength, are multiplied by
    ``energy_to_mc2``.  ``Z`` is divided by
    ``coulomb_scale``.  With ``Rc`` the charge is a uniform sphere: by
    default (``coulomb="sphere"``) its full potential joins the vector part
    and the reference Hamiltonian has ``Z = 0``; ``coulomb="split"`` keeps
    the point charge in the reference and adds only the short-range
    correction.  ``lam_scale > 1`` divides lambda (nonrelativistic
    limit).
    """
    lam = units.lambda_fm
    z_eff = Z / units.coulomb_scale
    if coulomb not in ("sphere", "split"):
        raise ValueError(f"coulomb must be 'sphere' or 'split', got {coulomb!r}")
    sphere = Rc is not None and z_eff != 0
    z_ref = 0.0 if sphere and coulomb == "sphere" else z_eff
    p = PhysicsParams(lam / lam_scale, z_ref, kappa, branch)
    V = S = W = None
    if V0 is not None:
        ws = woods_saxon(mev_to_internal(V0, units), R0, r0)
        if eta_V:
            V = ws.scaled(eta_V)
        if eta_S:
            S = ws.scaled(eta_S)
        if eta_W:
            W = ws.scaled(eta_W)
    if sphere:
        model = uniform_sphere_coulomb if coulomb == "sphere" else sphere_coulomb_correction
        vc = model(z_eff, Rc)
        V = vc if V is None else V + vc
    reach = None if R0 is None else max(Rc or 0.0, R0 + 40.0 * r0)
    spec = PotentialSpec(V=V, S=S, W=W, unit_system="nuclear", short_range_radius=reach)
    return p, spec
