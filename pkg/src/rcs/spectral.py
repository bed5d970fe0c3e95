"""Complex-scaled generalized eigenproblem, classification and stabilization."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .basis import (
    BasisParams,
    PhysicsParams,
    Tridiagonal,
    h0_matrix,
    h0_reduced_matrix,
    make_basis_params,
    overlap_matrix,
)
from .errors import EigFailure, MatchFailure, OverlapSingular, PotentialSingular
from .potentials import PotentialSpec, potential_matrix, transform
from .quadrature import QuadratureRule, build_rule

log = logging.getLogger(__name__)

BOUND = "bound"
RESONANCE = "resonance"
CONTINUUM = "continuum"
UNCLASSIFIED = "unclassified"

OVERLAP_COND_MAX = 1e12
RESIDUAL_MAX = 1e-8


@dataclass(frozen=True)
class Tolerances:
    bound: float = 1e-6
    continuum: float = 0.05
    match: float = 0.1


@dataclass(frozen=True)
class ScalingParams:
    theta: float = 0.0
    omega_list: tuple = ()
    N: int = 100
    N_jitter: float = 0.05
    K: Optional[int] = None


@dataclass
class SpectrumPoint:
    eps: complex
    energy: complex
    kind: str = UNCLASSIFIED
    stability: float = math.nan
    stable_digits: Optional[int] = None
    values: Optional[np.ndarray] = field(default=None, repr=False)
    tracked: bool = True


@dataclass
class Spectrum:
    """All eigenvalues of one solve, ordered by ascending real part of energy."""

    eps: np.ndarray
    energy: np.ndarray
    residual: np.ndarray
    meta: dict

    def __len__(self):
        return len(self.eps)


def energy_variable(eps, lam):
    """``(eps^2 - 1) / (2 lam^2)``."""
    eps = np.asarray(eps)
    return (eps * eps - 1.0) / (2.0 * lam * lam)


@lru_cache(maxsize=64)
def _cached_rule(nu: float, K: int) -> QuadratureRule:
    return build_rule(nu, K)


def rules_for(b: BasisParams, K: Optional[int] = None):
    """Quadrature rules of orders nu and 2|gamma| (default size ``2N``)."""
    K = 2 * b.N if K is None else int(K)
    K = max(K, b.N + 1)
    return _cached_rule(b.nu, K), _cached_rule(b.alpha, K)


def assemble(
    p: PhysicsParams,
    b: BasisParams,
    spec: Optional[PotentialSpec] = None,
    theta: float = 0.0,
    K: Optional[int] = None,
    reduced: bool = False,
):
    """Total Hamiltonian and overlap at ``omega*exp(-i*theta)``.

    Returns ``(H, S)`` with ``H`` dense and ``S`` tridiagonal.  With
    ``reduced`` the first matrix is ``(H - S)/lam^2`` instead, whose pencil
    eigenvalues are ``(eps - 1)/lam^2``.
    """
    if spec is not None and not spec.is_zero:
        ceiling, who = spec.theta_ceiling()
        if theta > ceiling:
            raise PotentialSingular(
                f"theta = {theta:.4g} exceeds the analyticity ceiling {ceiling:.4g} set by {who}"
            )
    S = overlap_matrix(b, theta)
    H0 = h0_reduced_matrix(b, theta) if reduced else h0_matrix(b, theta)
    H = H0.to_dense()
    if spec is not None and not spec.is_zero:
        tp = transform(spec, b, p)
        rule_nu, rule_alpha = rules_for(b, K)
        H = H + potential_matrix(tp, b, rule_nu, rule_alpha, theta, reduced=reduced)
    return H, S


def solve(H: np.ndarray, S: Tridiagonal, vectors: bool = False):
    """All eigenvalues of the pencil ``H v = e S v``.

    ``S`` is factored as a banded matrix and the dense non-Hermitian
    eigenproblem of ``S^-1 H`` is solved.  Each eigenpair is checked against
    the original pencil; the normwise backward errors are returned.
    """
    N = S.N
    Sd = S.to_dense()
    cond = np.linalg.cond(Sd)
    if not np.isfinite(cond) or cond > OVERLAP_COND_MAX:
        raise OverlapSingular(f"overlap condition estimate {cond:.3g} exceeds {OVERLAP_COND_MAX:.0e}")
    try:
        A = linalg.solve_banded((1, 1), S.to_banded(), H, check_finite=True)
        vals, vecs = linalg.eig(A, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise EigFailure(str(exc)) from exc
    if len(vals) != N or not np.all(np.isfinite(vals)):
        raise EigFailure("eigensolver returned non-finite eigenvalues")
    scale = np.linalg.norm(H, 2) + np.abs(vals) * np.linalg.norm(Sd, 2)
    res = np.linalg.norm(H @ vecs - (S @ vecs) * vals, axis=0)
    res = res / (scale * np.linalg.norm(vecs, axis=0))
    if vectors:
        return vals, vecs, res
    return vals, res


def solve_spectrum(
    p: PhysicsParams,
    omega: float,
    N: int,
    spec: Optional[PotentialSpec] = None,
    theta: float = 0.0,
    K: Optional[int] = None,
    shifted: bool = True,
) -> Spectrum:
    """Build and solve the problem for one ``(omega, N, theta)``.

    ``shifted`` solves for ``eps - 1`` (see :func:`assemble`), which keeps full
    precision when ``eps`` is close to 1.  The negative branch is solved via
    the charge-parity map and its eigenvalues negated.
    """
    b = make_basis_params(p, omega, N)
    lam = p.lam
    H, S = assemble(p, b, spec, theta, K, reduced=shifted)
    vals, res = solve(H, S)
    if shifted:
        eps = 1.0 + lam * lam * vals
        energy = vals + 0.5 * lam * lam * vals * vals
    else:
        eps = vals
        energy = energy_variable(vals, lam)
    if p.branch == "negative":
        eps = -eps
    order = np.lexsort((energy.imag, energy.real))
    rule_K = None if spec is None or spec.is_zero else rules_for(b, K)[0].K
    worst = float(res.max())
    if worst > RESIDUAL_MAX:
        log.warning("pencil residual %.2e exceeds %.0e (omega=%g, N=%d)", worst, RESIDUAL_MAX, omega, N)
    meta = {"omega": omega, "N": N, "K": rule_K, "theta": theta, "shifted": shifted, "branch": p.branch}
    return Spectrum(eps[order], energy[order], res[order], meta)


def _cut_distance(energy: np.ndarray, theta: float) -> np.ndarray:
    """Distance in the energy plane to the ray ``t*exp(-2i*theta)``, ``t >= 0``."""
    z = np.asarray(energy) * np.exp(2j * theta)
    return np.where(z.real >= 0, np.abs(z.imag), np.abs(z))


def classify(
    eps: Sequence[complex],
    lam: float,
    theta: float,
    tol: Tolerances = Tolerances(),
    energy: Optional[Sequence[complex]] = None,
) -> list:
    """Tag each eigenvalue as bound, rotated continuum, resonance or unclassified."""
    eps = np.asarray(eps, dtype=complex)
    energy = energy_variable(eps, lam) if energy is None else np.asarray(energy, dtype=complex)
    dist = _cut_distance(energy, theta)
    points = []
    for e, E, d in zip(eps, energy, dist):
        if abs(E.imag) < tol.bound * max(1.0, abs(E.real)) and -1.0 < e.real < 1.0:
            kind = BOUND
        elif d <= tol.continuum * abs(E):
            kind = CONTINUUM
        elif E.imag < 0 and E.real > 0:
            kind = RESONANCE
        else:
            kind = UNCLASSIFIED
        points.append(SpectrumPoint(complex(e), complex(E), kind))
    return points


def classify_spectrum(sp: Spectrum, lam: float, tol: Tolerances = Tolerances()) -> list:
    return classify(sp.eps, lam, sp.meta["theta"], tol, sp.energy)


def match(ref: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Injective greedy nearest-neighbour assignment of ``ref`` onto ``other``.

    Pairs are taken in order of increasing distance, so ties resolve toward
    the smallest total displacement.  Returns, for each entry of ``ref``, the
    index into ``other`` (or -1 if ``other`` ran out).
    """
    ref = np.asarray(ref)
    other = np.asarray(other)
    d = np.abs(ref[:, None] - other[None, :])
    flat = np.argsort(d, axis=None, kind="stable")
    out = np.full(len(ref), -1)
    used = np.zeros(len(other), dtype=bool)
    left = min(len(ref), len(other))
    for f in flat:
        i, j = divmod(int(f), len(other))
        if out[i] < 0 and not used[j]:
            out[i] = j
            used[j] = True
            left -= 1
            if not left:
                break
    return out


def middle_slice(n: int) -> slice:
    """Indices kept when averaging over the middle of a grid."""
    if n < 3:
        return slice(0, n)
    cut = max(1, n // 4)
    return slice(cut, n - cut)


def _map(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass
class StabilizeResult:
    points: list
    omegas: tuple
    N: int
    theta: float
    K: Optional[int]
    failures: list

    def select(self, kind: str, min_digits: int = 0) -> list:
        return [
            q for q in self.points
            if q.kind == kind and q.tracked and (q.stable_digits or 0) >= min_digits
        ]

    def nearest(self, target: complex, kind: Optional[str] = None) -> SpectrumPoint:
        pool = [q for q in self.points if kind is None or q.kind == kind]
        return min(pool, key=lambda q: abs(q.energy - target))


def stabilize(
    p: PhysicsParams,
    spec: Optional[PotentialSpec],
    scaling: ScalingParams,
    tol: Tolerances = Tolerances(),
    jobs: int = 1,
    shifted: bool = True,
) -> StabilizeResult:
    """Track every eigenvalue across the omega grid (and N jitter).

    Families are seeded at the middle grid point.  A family's ``stability``
    is its largest pairwise spread, its value the mean over the middle of the
    grid, and ``stable_digits`` the number of digits that do not move.
    Bound or resonance families found on fewer than 80% of the grid points
    are reported in ``failures``; continuum families are expected to drift.
    """
    omegas = tuple(float(w) for w in scaling.omega_list)
    if len(omegas) < 3:
        raise ValueError("stabilization needs at least three omega values")
    N, theta, K = scaling.N, scaling.theta, scaling.K
    k_factor = None if K is None else K / N

    def run(job):
        w, n = job
        kk = None if k_factor is None else int(round(k_factor * n))
        return solve_spectrum(p, w, n, spec, theta, kk, shifted)

    jitter_sizes = []
    if scaling.N_jitter > 0:
        for sgn in (-1, 1):
            n = int(round(N * (1 + sgn * scaling.N_jitter)))
            if n != N and n >= 2:
                jitter_sizes.append(n)
    ref_idx = len(omegas) // 2
    jobs_list = [(w, N) for w in omegas] + [(omegas[ref_idx], n) for n in jitter_sizes]
    spectra = _map(run, jobs_list, jobs)
    grid = spectra[: len(omegas)]
    jitter = spectra[len(omegas):]

    ref = grid[ref_idx]
    kinds = classify_spectrum(ref, p.lam, tol)
    table = np.full((len(omegas), len(ref)), np.nan + 0j)
    for i, sp in enumerate(grid):
        idx = match(ref.energy, sp.energy)
        ok = idx >= 0
        table[i, ok] = sp.energy[idx[ok]]
    gate = tol.match * np.maximum(np.abs(ref.energy), 1e-300)
    far = np.abs(table - ref.energy[None, :]) > gate[None, :]
    table[far] = np.nan

    mid = middle_slice(len(omegas))
    points, failures = [], []
    for j, pt in enumerate(kinds):
        col = table[:, j]
        good = ~np.isnan(col)
        tracked = good.sum() >= math.ceil(0.8 * len(omegas))
        vals = col[good]
        spread = float(np.max(np.abs(vals[:, None] - vals[None, :]))) if len(vals) > 1 else math.inf
        mid_vals = col[mid][~np.isnan(col[mid])]
        value = complex(np.mean(mid_vals)) if len(mid_vals) else complex(ref.energy[j])
        for sp in jitter:
            d = np.abs(sp.energy - value)
            spread = max(spread, float(d.min()))
        if not tracked and pt.kind in (BOUND, RESONANCE):
            failures.append(MatchFailure(f"family near {ref.energy[j]:.6g} tracked on {good.sum()}/{len(omegas)} grid points"))
        pt.energy = value
        pt.eps = _eps_from_energy(value, p, ref.eps[j])
        pt.stability = spread
        pt.stable_digits = _digits(spread, abs(value))
        pt.values = col
        pt.tracked = bool(tracked)
        points.append(pt)
    return StabilizeResult(points, omegas, N, theta, ref.meta["K"], failures)


def _eps_from_energy(energy: complex, p: PhysicsParams, near: complex) -> complex:
    root = np.sqrt(1.0 + 2.0 * p.lam**2 * energy)
    return complex(root if abs(root - near) <= abs(root + near) else -root)


def _digits(spread: float, size: float) -> int:
    if not np.isfinite(spread):
        return 0
    if spread <= 0 or size == 0:
        return 15
    return int(max(0, min(15, math.floor(-math.log10(spread / size)))))


@dataclass
class SweepResult:
    theta_grid: np.ndarray
    trajectories: np.ndarray  # (n_theta, N) energies, column j follows one eigenvalue
    xi: np.ndarray
    cut_curve: np.ndarray  # (n_theta, n_xi)
    kinds: list  # per theta, classification of each column


def cut_curve(xi, lam: float, theta: float) -> np.ndarray:
    """Rotated continuum ``0.5*(xi/lam)^2*exp(-2i*theta)`` in the energy plane."""
    xi = np.asarray(xi, dtype=float)
    return 0.5 * (xi / lam) ** 2 * np.exp(-2j * theta)


def theta_sweep(
    p: PhysicsParams,
    omega: float,
    N: int,
    spec: Optional[PotentialSpec],
    theta_grid: Sequence[float],
    K: Optional[int] = None,
    xi: Optional[np.ndarray] = None,
    tol: Tolerances = Tolerances(),
    jobs: int = 1,
    shifted: bool = True,
) -> SweepResult:
    """Solve along a grid of scaling angles and link eigenvalues between steps."""
    thetas = np.asarray(theta_grid, dtype=float)
    spectra = _map(lambda t: solve_spectrum(p, omega, N, spec, float(t), K, shifted), thetas, jobs)
    traj = np.empty((len(thetas), N), dtype=complex)
    traj[0] = spectra[0].energy
    kinds = [[q.kind for q in classify_spectrum(spectra[0], p.lam, tol)]]
    for i in range(1, len(thetas)):
        idx = match(traj[i - 1], spectra[i].energy)
        traj[i] = spectra[i].energy[idx]
        cls = classify_spectrum(spectra[i], p.lam, tol)
        kinds.append([cls[j].kind for j in idx])
    if xi is None:
        top = max(float(np.max(np.abs(traj))), 1.0)
        xi = np.linspace(0.0, p.lam * math.sqrt(2.0 * top), 201)
    curve = np.stack([cut_curve(xi, p.lam, t) for t in thetas])
    return SweepResult(thetas, traj, np.asarray(xi), curve, kinds)


def negative_branch(p: PhysicsParams, spec: Optional[PotentialSpec] = None):
    """Charge-parity map; applying it twice returns the original problem.

    The mapped problem solved on the positive branch has eigenvalues that are
    the negatives of the original negative-branch ones.
    """
    q = p.cp_mapped()
    return q, (None if spec is None else spec.cp_mapped())


def cut_angle(energies: Sequence[complex]) -> float:
    """Angle of the best-fit ray through the origin (least squares on the normal)."""
    z = np.asarray(energies, dtype=complex)
    return 0.5 * float(np.angle(np.sum(z * z)))


def string_slope(energies: Sequence[complex]) -> float:
    """Direction angle of the principal axis of a string of points.

    Unlike :func:`cut_angle` the line is not forced through the origin, so a
    string shifted parallel to the ideal ray still reports the right slope.
    """
    z = np.asarray(energies, dtype=complex)
    z = z - z.mean()
    return 0.5 * float(np.angle(np.sum(z * z)))

