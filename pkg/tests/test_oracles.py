import logging

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rcs.basis import FINE_STRUCTURE, PhysicsParams
from rcs.errors import NoRoot
from rcs.oracles import WSLevelEquation, hydrogen_exact, nonrel_limit, ws_nonrel_exact
from rcs.spectral import energy_variable

WS = (300.0, 7.0, 0.5)


def test_hydrogen_ground_states():
    for Z, minus_E in ((-1, 0.5), (-2, 2.0)):
        level = hydrogen_exact(PhysicsParams(FINE_STRUCTURE, Z, -1), 0)
        # the binding energy agrees with the nonrelativistic value to order alpha^2
        assert -level.energy == pytest.approx(minus_E, rel=5 * FINE_STRUCTURE**2)
        assert abs(level.eps_exact) < 1


def test_energy_consistent_with_eps():
    level = hydrogen_exact(PhysicsParams(0.3, -1.2, 2), 1)
    assert level.energy == pytest.approx(float(energy_variable(level.eps_exact, 0.3)), rel=1e-12)
    assert level.tau == pytest.approx(2 * np.sqrt(1 - (0.3 * 1.2 / 2) ** 2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(-3.0, -0.1), st.integers(1, 4), st.integers(0, 6))
def test_degeneracy(lam, Z, k, n):
    assume(abs(lam * Z / k) < 0.99)
    # (-k, n + 1) and (+k, n) share n + tau + 1
    a = hydrogen_exact(PhysicsParams(lam, Z, -k), n + 1)
    b = hydrogen_exact(PhysicsParams(lam, Z, k), n)
    assert a.eps_exact == pytest.approx(b.eps_exact, rel=1e-12, abs=1e-12)
    assert a.energy == pytest.approx(b.energy, rel=1e-12)


@pytest.mark.parametrize("kappa, ell", [(-1, 0), (1, 1), (-2, 1), (2, 2)])
def test_nonrelativistic_limit_of_hydrogen(kappa, ell):
    Z = -1.5
    p = nonrel_limit(PhysicsParams(FINE_STRUCTURE, Z, kappa), 1000.0)
    for n in range(4):
        E = hydrogen_exact(p, n).energy
        assert E == pytest.approx(-(Z**2) / (2 * (n + ell + 1) ** 2), rel=1e-9)


def test_negative_branch_levels():
    p = PhysicsParams(FINE_STRUCTURE, 1, 2, "negative")
    neg = hydrogen_exact(p, 1)
    pos = hydrogen_exact(p.cp_mapped(), 1)
    assert neg.eps_exact == -pos.eps_exact
    assert neg.energy == pos.energy
    with pytest.raises(ValueError):
        hydrogen_exact(PhysicsParams(FINE_STRUCTURE, -1, -1, "negative"), 0)
    with pytest.raises(ValueError):
        hydrogen_exact(PhysicsParams(FINE_STRUCTURE, 1, -1), 0)
    with pytest.raises(ValueError):
        hydrogen_exact(PhysicsParams(FINE_STRUCTURE, -1, -1), -1)


def test_woods_saxon_levels_reference_values():
    assert -ws_nonrel_exact(*WS, 0) == pytest.approx(294.140931652, abs=2e-8)
    assert -ws_nonrel_exact(*WS, 8) == pytest.approx(13.500142641, abs=5e-7)


def test_woods_saxon_roots_are_ordered_roots():
    eq = WSLevelEquation(*WS)
    roots = eq.roots()
    assert len(roots) == 9
    energies = [E for E, _ in roots]
    assert all(-WS[0] < E < 0 for E in energies)
    assert np.all(np.diff(energies) > 0)
    for E, m in roots:
        assert abs(eq.residual(E, m)) < 1e-10
    assert [m for _, m in roots] == sorted({m for _, m in roots})


@pytest.mark.parametrize("V0, R0, r0", [(50.0, 3.0, 0.6), (120.0, 5.0, 0.4), (300.0, 7.0, 0.5)])
def test_woods_saxon_scan_is_converged(V0, R0, r0):
    eq = WSLevelEquation(V0, R0, r0)
    coarse = [E for E, _ in eq.roots()]
    fine = [E for E, _ in eq.roots(steps=8000)]
    assert np.allclose(coarse, fine, rtol=0, atol=1e-12)


def test_missing_level():
    with pytest.raises(NoRoot):
        ws_nonrel_exact(*WS, 9)
    with pytest.raises(NoRoot):
        ws_nonrel_exact(0.5, 1.0, 0.5, 0)


def test_nonrel_limit(caplog):
    p = PhysicsParams(FINE_STRUCTURE, -1, -1)
    assert nonrel_limit(p, 1.0) is p
    assert nonrel_limit(p, 100.0).lam == FINE_STRUCTURE / 100.0
    with pytest.raises(ValueError):
        nonrel_limit(p, 0.5)
    with caplog.at_level(logging.WARNING):
        nonrel_limit(p, 1e4)
    assert "rounding" in caplog.text
