import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcs.basis import FINE_STRUCTURE, PhysicsParams, make_basis_params
from rcs.errors import IndexOverflow, PotentialSingular
from rcs.potentials import (
    NEUTRON,
    NEUTRON_PROTON_MASS_RATIO,
    NUCLEAR,
    NuclearUnits,
    PotentialSpec,
    RadialFunction,
    convert_nuclear,
    internal_to_mev,
    mev_to_internal,
    potential_matrix,
    power_exp,
    sphere_coulomb_correction,
    tabulated,
    transform,
    uniform_sphere_coulomb,
    woods_saxon,
)
from rcs.quadrature import build_rule
from rcs.spectral import assemble, rules_for

R = np.linspace(0.01, 20.0, 57)


def test_nuclear_constants_exact():
    assert NUCLEAR.energy_to_mc2 == 0.02409660653
    assert NUCLEAR.coulomb_scale == 28.81989156
    assert NUCLEAR.lambda_fm == 0.2103089104
    r = NEUTRON_PROTON_MASS_RATIO
    assert NEUTRON.energy_to_mc2 == NUCLEAR.energy_to_mc2 * r
    assert NEUTRON.lambda_fm == NUCLEAR.lambda_fm / r
    assert NuclearUnits.for_particle("proton") == NUCLEAR
    with pytest.raises(ValueError):
        NuclearUnits.for_particle("pion")


def test_woods_saxon_shape():
    V0, R0, r0 = 300.0, 7.0, 0.5
    ws = woods_saxon(V0, R0, r0)
    assert ws(np.array(R0)) == pytest.approx(-V0 / 2, rel=1e-15)
    assert abs(ws(np.array(0.0)) + V0) <= V0 * math.exp(-R0 / r0)
    assert ws.sector == pytest.approx(0.9 * math.atan(math.pi * r0 / R0))
    assert np.isrealobj(ws(R))
    assert np.all(np.isfinite(ws(np.array([1e3, 1e6]))))
    with pytest.raises(ValueError):
        woods_saxon(-1.0, R0, r0)


def test_woods_saxon_pole_and_sector():
    ws = woods_saxon(300.0, 7.0, 0.5)
    pole = np.array([7.0 + 1j * math.pi * 0.5])
    with pytest.raises(PotentialSingular):
        ws.func(pole + 1e-5)
    with pytest.raises(PotentialSingular):
        ws(np.array([10.0 * np.exp(1j * (ws.sector + 0.01))]))
    inside = np.array([10.0 * np.exp(1j * 0.5 * ws.sector)])
    assert np.isfinite(ws(inside)).all()


def test_sphere_potentials():
    Z, Rc = 1.7, 8.4
    full = uniform_sphere_coulomb(Z, Rc)
    corr = sphere_coulomb_correction(Z, Rc)
    assert full(np.array(0.0)) == pytest.approx(1.5 * Z / Rc)
    assert full(np.array(Rc - 1e-12)) == pytest.approx(Z / Rc, rel=1e-12)
    assert full(np.array(Rc + 1e-12)) == pytest.approx(Z / Rc, rel=1e-12)
    outside = np.linspace(Rc, 60.0, 50)
    assert np.abs(corr(outside)).max() < 1e-15
    assert abs(corr(np.array(Rc * (1 - 1e-12)))) < 1e-11
    # the correction plus the point charge is the bounded sphere potential
    inner = np.linspace(1e-3, Rc, 40)
    assert np.allclose(corr(inner) + Z / inner, full(inner), rtol=1e-12)
    assert np.all(np.isfinite(full(np.linspace(0.0, 50.0, 200))))
    assert full.sector == 0.0 and corr.sector == 0.0 and corr.inv_r == -Z


def test_models_real_on_real_axis():
    rng = np.random.default_rng(1)
    r = np.linspace(0.0, 10.0, 11)
    models = [
        woods_saxon(50.0, 3.0, 0.6),
        uniform_sphere_coulomb(2.0, 4.0),
        power_exp(7.5, 2.0, 1.0),
        tabulated(r, rng.normal(size=r.size)),
    ]
    for f in models:
        assert np.isrealobj(f(R))


def test_tabulated():
    r = np.linspace(0.0, 10.0, 201)
    f = tabulated(r, np.exp(-r))
    x = np.array([0.33, 2.5, 7.1])
    assert np.allclose(f(x), np.exp(-x), rtol=1e-6)
    assert f(np.array([10.5, 40.0])).tolist() == [0.0, 0.0]
    with pytest.raises(PotentialSingular):
        f(np.array([1.0 + 0.1j]))


def test_radial_function_algebra():
    f = power_exp(2.0, 1.0, 1.0)
    g = RadialFunction(lambda r: r * 0 + 1.0, 0.5, "one", inv_r=3.0)
    h = f + g
    assert h.sector == 0.5
    assert h.inv_r == 3.0
    assert np.allclose(h(R), f(R) + 1.0 + 3.0 / R)
    assert np.allclose((-h)(R), -h(R))
    assert np.allclose(h.regular(R), f(R) + 1.0)
    assert f.scaled(1.0) is f


def _values(f):
    return f(R)


def test_transform_zero_potential():
    b = make_basis_params(PhysicsParams(0.1, -1, -1), 1.0, 5)
    tp = transform(PotentialSpec(), b)
    assert tp.zero
    for u in (tp.U_plus, tp.U_minus, tp.U_zero):
        assert np.all(_values(u) == 0)


def test_transform_vector_only_without_charge():
    V = power_exp(7.5, 2.0, 1.0)
    b = make_basis_params(PhysicsParams(0.3, 0.0, 2), 1.0, 5)
    tp = transform(PotentialSpec(V=V), b)
    assert np.array_equal(_values(tp.U_plus), V(R))
    assert np.array_equal(_values(tp.U_minus), V(R))
    assert np.all(_values(tp.U_zero) == 0)
    assert not tp.has_u0
    assert tp.provenance == {"gamma": 2.0, "kappa": 2, "Z": 0.0, "lambda": 0.3}


def test_transform_reference_resonance_config():
    # vector-only potential with a point charge: U+- = V, U0 = 0
    V = power_exp(7.5, 2.0, 1.0)
    b = make_basis_params(PhysicsParams(FINE_STRUCTURE, -1, -1), 1.0, 5)
    tp = transform(PotentialSpec(V=V), b)
    assert np.allclose(_values(tp.U_plus), V(R), rtol=1e-15)
    assert np.allclose(_values(tp.U_minus), V(R), rtol=1e-15)
    assert np.all(_values(tp.U_zero) == 0)


@pytest.mark.parametrize("lam, Z", [(0.4, 0.0), (1e-8, -1.0)])
def test_u0_vanishes_for_equal_vector_and_scalar(lam, Z):
    f = woods_saxon(5.0, 2.0, 0.4)
    b = make_basis_params(PhysicsParams(lam, Z, -1), 1.0, 5)
    tp = transform(PotentialSpec(V=f, S=f), b)
    assert np.abs(_values(tp.U_zero)).max() <= 1e-15 * 5.0 * max(1.0, abs(Z))


def test_transform_rotation_coefficients():
    V, S, W = power_exp(1.0, 1.0, 1.0), power_exp(2.0, 2.0, 1.0), power_exp(3.0, 1.0, 0.5)
    p = PhysicsParams(0.3, -0.8, 2)
    b = make_basis_params(p, 1.0, 5)
    tp = transform(PotentialSpec(V=V, S=S, W=W, eta_S=0.5, eta_W=2.0), b)
    c, zk = b.gamma / 2, -0.8 / 2
    assert np.allclose(_values(tp.U_plus), V(R) + c * 0.5 * S(R) + zk * 2.0 * W(R), rtol=1e-14)
    assert np.allclose(_values(tp.U_minus), V(R) - c * 0.5 * S(R) - zk * 2.0 * W(R), rtol=1e-14)
    assert np.allclose(_values(tp.U_zero), c * 2.0 * W(R) - 0.09 * zk * 0.5 * S(R), rtol=1e-14)


def test_cp_map_of_potential():
    V, S, W = power_exp(1.0, 1.0, 1.0), power_exp(2.0, 2.0, 1.0), power_exp(3.0, 1.0, 0.5)
    spec = PotentialSpec(V=V, S=S, W=W)
    m = spec.cp_mapped()
    assert np.allclose(m.V(R), -V(R)) and np.allclose(m.W(R), -W(R))
    assert m.S is S
    mm = m.cp_mapped()
    assert np.allclose(mm.V(R), V(R)) and np.allclose(mm.W(R), W(R))


def _matrix(spec, kappa=-1, theta=0.0, N=12, lam=0.3, Z=-0.6, reduced=True):
    p = PhysicsParams(lam, Z, kappa)
    b = make_basis_params(p, 1.4, N)
    rn, ra = rules_for(b)
    return potential_matrix(transform(spec, b, p), b, rn, ra, theta, reduced=reduced)


mixed = PotentialSpec(V=power_exp(7.5, 2.0, 1.0), S=power_exp(-2.0, 1.0, 0.8), W=power_exp(1.5, 1.0, 0.7))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([-2, -1, 1, 2]), st.floats(0.0, 1.2))
def test_potential_matrix_symmetric(kappa, theta):
    M = _matrix(mixed, kappa, theta)
    assert np.abs(M - M.T).max() <= 1e-10 * max(1.0, np.abs(M).max())


def test_potential_matrix_real_at_zero_angle():
    M = _matrix(mixed, 2)
    assert np.isrealobj(M)
    assert np.abs(M).max() > 0


def test_zero_potential_matrix():
    assert np.all(_matrix(PotentialSpec(), theta=0.3) == 0)


def test_pseudo_scalar_vanishes_in_nonrelativistic_limit():
    spec = PotentialSpec(W=power_exp(2.0, 1.0, 0.7), eta_V=0.0, eta_W=1.0)
    sizes = [np.abs(_matrix(spec, lam=lam, Z=0.0, reduced=False)).max() for lam in (1e-2, 1e-3, 1e-4)]
    assert sizes[1] < 0.1 * sizes[0] and sizes[2] < 0.1 * sizes[1]


def test_coulomb_tail_terms_are_exact():
    # a pure 1/r potential doubles the point charge in the reference
    p = PhysicsParams(0.3, -0.6, -1)
    b = make_basis_params(p, 1.4, 10)
    rn, ra = rules_for(b)
    tail = RadialFunction(lambda r: 0.0 * r, name="tail", inv_r=-0.6)
    M = potential_matrix(transform(PotentialSpec(V=tail), b, p), b, rn, ra)
    assert np.all(np.isfinite(M))
    assert np.abs(M - M.T).max() < 1e-12


def test_index_overflow():
    p = PhysicsParams(0.3, -0.6, -1)
    b = make_basis_params(p, 1.4, 10)
    tp = transform(mixed, b, p)
    with pytest.raises(IndexOverflow):
        potential_matrix(tp, b, build_rule(b.nu, 10), build_rule(b.alpha, 10))


def test_theta_ceiling_enforced():
    ws = woods_saxon(10.0, 7.0, 0.5)
    spec = PotentialSpec(V=ws)
    ceiling, who = spec.theta_ceiling()
    assert ceiling == ws.sector and "V" in who and "woods-saxon" in who
    p = PhysicsParams(0.1, 0.0, -1)
    b = make_basis_params(p, 1.0, 10)
    with pytest.raises(PotentialSingular, match="woods-saxon"):
        assemble(p, b, spec, theta=ceiling + 0.01)
    assemble(p, b, spec, theta=0.9 * ceiling)


def test_convert_nuclear_examples():
    assert mev_to_internal(300.0) == pytest.approx(7.228981959, rel=1e-15)
    assert internal_to_mev(mev_to_internal(12.5)) == pytest.approx(12.5, rel=1e-15)
    p, spec = convert_nuclear(50, -1, 300.0, 7.0, 0.5, eta_V=1.0, coulomb="split", Rc=8.4)
    assert p.Z == pytest.approx(1.734914, rel=1e-6)
    assert p.Z == 50 / 28.81989156
    assert p.lam == NUCLEAR.lambda_fm


def test_convert_nuclear_components():
    p, spec = convert_nuclear(0, 1, 300.0, 7.0, 0.5, eta_W=1.0)
    assert spec.V is None and spec.S is None
    assert spec.W(np.array(7.0)) == pytest.approx(-0.5 * 300.0 * NUCLEAR.energy_to_mc2)
    assert spec.short_range_radius == 7.0 + 40 * 0.5
    p, spec = convert_nuclear(50, -1, 300.0, 7.0, 0.5, eta_V=1.0, Rc=8.4)
    assert p.Z == 0.0
    far = np.array(100.0)
    assert spec.V(far) == pytest.approx(50 / 28.81989156 / 100.0, rel=1e-12)
    p, _ = convert_nuclear(0, -1, 300.0, 7.0, 0.5, eta_V=1.0, lam_scale=1000.0, units=NEUTRON)
    assert p.lam == NEUTRON.lambda_fm / 1000.0
    with pytest.raises(ValueError):
        convert_nuclear(1, -1, Rc=8.0, coulomb="point")
