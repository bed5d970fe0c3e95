"""Fixed-parameter benchmark jobs: hydrogen levels, model-barrier resonances and nucleon levels.

Each function returns ``(rows, meta)``: a list of flat dicts (complex values
allowed) and a dict of the parameters used.  Energies are reported as
positive binding energies ``-E`` for bound states and as ``(E_r, Gamma)``
pairs for resonances, in atomic units or MeV as the table requires.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .basis import FINE_STRUCTURE, PhysicsParams
from .oracles import WSLevelEquation, hydrogen_exact, nonrel_limit
from .potentials import NEUTRON, NUCLEAR, PotentialSpec, convert_nuclear, internal_to_mev, power_exp
from .spectral import BOUND, RESONANCE, ScalingParams, stabilize

HYDROGEN_OMEGAS = (1.0, 2.0, 3.0, 4.0, 5.0)
RESONANCE_OMEGAS = (5.0, 10.0, 20.0, 30.0)
NUCLEAR_OMEGAS = (3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
RESONANCE_THETA = 0.7
WS = {"V0": 300.0, "R0": 7.0, "r0": 0.5}
PROTON_Z = 50
PROTON_RC = 1.2 * WS["R0"]
COUPLINGS = ("vector", "scalar", "pseudo-scalar")


def bound_levels(result, count: Optional[int] = None) -> list:
    """Tracked bound points, deepest first."""
    pts = sorted(result.select(BOUND), key=lambda q: q.energy.real)
    pts = [q for q in pts if q.energy.real < 0]
    return pts if count is None else pts[:count]


def resonances(result, min_digits: int = 4) -> list:
    """Tracked resonances ordered by position, keeping only reasonably stable ones."""
    return sorted(result.select(RESONANCE, min_digits), key=lambda q: q.energy.real)


def hydrogen_table(levels: int = 3, N: int = 200, omegas=HYDROGEN_OMEGAS, jobs: int = 1):
    rows = []
    scaling = ScalingParams(theta=0.0, omega_list=tuple(omegas), N=N)
    for Z in (-1, -2):
        for kappa in (-1, 1, -2, 2):
            p = PhysicsParams(FINE_STRUCTURE, Z, kappa)
            res = stabilize(p, None, scaling, jobs=jobs)
            for n, q in enumerate(bound_levels(res, levels)):
                exact = hydrogen_exact(p, n).energy
                rows.append({
                    "Z": Z,
                    "kappa": kappa,
                    "n": n,
                    "minus_energy": -q.energy.real,
                    "minus_energy_exact": -exact,
                    "delta": q.energy.real - exact,
                    "stable_digits": q.stable_digits,
                })
    meta = {"table": "I", "N": N, "omega": list(omegas), "theta": 0.0, "lambda": FINE_STRUCTURE}
    return rows, meta


def _resonance_rows(configs, lam_scale, N, omegas, theta, jobs):
    rows = []
    V = power_exp(7.5, 2.0, 1.0)
    spec = PotentialSpec(V=V)
    scaling = ScalingParams(theta=theta, omega_list=tuple(omegas), N=N)
    for Z, kappa in configs:
        p = nonrel_limit(PhysicsParams(FINE_STRUCTURE, Z, kappa), lam_scale)
        res = stabilize(p, spec, scaling, jobs=jobs)
        for q in resonances(res):
            rows.append({
                "Z": Z,
                "kappa": kappa,
                "E_r": q.energy.real,
                "Gamma": -2.0 * q.energy.imag,
                "stable_digits": q.stable_digits,
            })
    return rows


def nonrel_resonance_table(N: int = 100, omegas=RESONANCE_OMEGAS, theta=RESONANCE_THETA, jobs: int = 1):
    rows = _resonance_rows([(0, -1), (-1, -1)], 100.0, N, omegas, theta, jobs)
    meta = {"table": "II", "N": N, "omega": list(omegas), "theta": theta, "lambda_scale": 100.0,
            "potential": "7.5 r^2 exp(-r)"}
    return rows, meta


def rel_resonance_table(N: int = 100, omegas=RESONANCE_OMEGAS, theta=RESONANCE_THETA, jobs: int = 1):
    configs = [(Z, k) for Z in (0, -1, 1) for k in (-1, 1, -2)]
    rows = _resonance_rows(configs, 1.0, N, omegas, theta, jobs)
    meta = {"table": "III", "N": N, "omega": list(omegas), "theta": theta, "potential": "7.5 r^2 exp(-r)"}
    return rows, meta


def _ws_levels(units, Z, kappa, coupling, N, omegas, jobs, Rc=None, lam_scale=1.0):
    eta = {"eta_V": 0.0, "eta_S": 0.0, "eta_W": 0.0}
    eta["eta_" + {"vector": "V", "scalar": "S", "pseudo-scalar": "W"}[coupling]] = 1.0
    p, spec = convert_nuclear(Z, kappa, Rc=Rc, lam_scale=lam_scale, units=units, **WS, **eta)
    res = stabilize(p, spec, ScalingParams(0.0, tuple(omegas), N), jobs=jobs)
    return bound_levels(res)


def neutron_s_wave_table(N: int = 100, omegas=NUCLEAR_OMEGAS, jobs: int = 1):
    rel = _ws_levels(NEUTRON, 0, -1, "vector", N, omegas, jobs)
    nonrel = _ws_levels(NEUTRON, 0, -1, "vector", N, omegas, jobs, lam_scale=1000.0)
    exact = WSLevelEquation(WS["V0"], WS["R0"], WS["r0"], NEUTRON).roots()
    rows = []
    for n in range(max(len(rel), len(nonrel), len(exact))):
        row = {"n": n}
        if n < len(rel):
            row["minus_energy"] = -internal_to_mev(rel[n].energy.real, NEUTRON)
            row["stable_digits"] = rel[n].stable_digits
        if n < len(nonrel):
            row["minus_energy_nonrel"] = -internal_to_mev(nonrel[n].energy.real, NEUTRON)
        if n < len(exact):
            row["minus_energy_exact"] = -exact[n][0]
        rows.append(row)
    meta = {"table": "IV", "N": N, "omega": list(omegas), "particle": "neutron", **WS, "lambda_scale_nonrel": 1000.0}
    return rows, meta


def _coupling_table(units, Z, Rc, N, omegas, jobs):
    rows = []
    for coupling in COUPLINGS:
        for kappa in (-1, 1, -2, 2):
            for n, q in enumerate(_ws_levels(units, Z, kappa, coupling, N, omegas, jobs, Rc=Rc)):
                rows.append({
                    "coupling": coupling,
                    "kappa": kappa,
                    "n": n,
                    "minus_energy": -internal_to_mev(q.energy.real, units),
                    "stable_digits": q.stable_digits,
                })
    return rows


def neutron_coupling_table(N: int = 100, omegas=NUCLEAR_OMEGAS, jobs: int = 1):
    rows = _coupling_table(NEUTRON, 0, None, N, omegas, jobs)
    meta = {"table": "V", "N": N, "omega": list(omegas), "particle": "neutron", **WS}
    return rows, meta


def proton_coupling_table(N: int = 100, omegas=NUCLEAR_OMEGAS, jobs: int = 1):
    rows = _coupling_table(NUCLEAR, PROTON_Z, PROTON_RC, N, omegas, jobs)
    meta = {"table": "VI", "N": N, "omega": list(omegas), "particle": "proton", "Z": PROTON_Z, "Rc": PROTON_RC, **WS}
    return rows, meta


TABLES = {
    "I": hydrogen_table,
    "II": nonrel_resonance_table,
    "III": rel_resonance_table,
    "IV": neutron_s_wave_table,
    "V": neutron_coupling_table,
    "VI": proton_coupling_table,
}
