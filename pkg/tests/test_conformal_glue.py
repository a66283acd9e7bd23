import numpy as np
import pytest

from qlmass import conformal_glue as cg
from qlmass import exact_slices as es
from qlmass.embedding import embed_rotational, embed_static_schwarzschild
from qlmass.flows import shi_tam_flow
from qlmass.jang import jang_boundary, solve_jang_radial
from qlmass.surfaces import round_sphere


@pytest.fixture(scope="module")
def schw_jang():
    d = es.build_radial_data(es.SpacetimeSpec("schwarzschild", m=1.0), r_min=2, r_max=8)
    return solve_jang_radial(d, 0.0, True)


def _composite(sol, m_ref=None):
    bd = jang_boundary(sol)
    if m_ref is None:
        prof = embed_rotational(round_sphere(8.0, 16))
        st = shi_tam_flow(prof, prof.H0[0] / bd["Hbar_minus_X"], 1e4)
    else:
        prof = embed_static_schwarzschild(round_sphere(8.0, 24), m_ref)
        st = shi_tam_flow(prof, prof.H0[0] / bd["Hbar_minus_X"], 1e4, "schwarzschild", m_ref=m_ref)
    return cg.compose(sol, st)


@pytest.fixture(scope="module")
def schw_solution(schw_jang):
    return cg.solve_conformal(_composite(schw_jang))


@pytest.mark.parametrize("L", [1.0, 2.0, 4.0])
def test_product_cylinder(L):
    cm = cg.product_cylinder(L)
    closed = cg.solve_conformal(cm, coefficient=0.0, outer="dirichlet")
    assert cg.gamma_constant(closed) == pytest.approx(1 / L, abs=1e-10)
    capped = cg.solve_conformal(cm, coefficient=0.0)
    assert capped.C == pytest.approx(1 / (L + 1), abs=1e-10)
    assert capped.P == pytest.approx(-2 * np.pi * capped.A, rel=1e-9)
    scaled = cg.solve_conformal(cm.scaled(2.0), coefficient=0.0, outer="dirichlet")
    assert cg.gamma_constant(scaled) == pytest.approx(cg.gamma_constant(closed), abs=1e-10)


def test_composite_matching(schw_jang):
    cm = _composite(schw_jang)
    assert abs(cm.jump) < 1e-12
    assert cm.corner_jump == pytest.approx(cm.X_nu, abs=1e-12)
    assert cm.cylindrical and cm.horizon_area == pytest.approx(16 * np.pi, rel=1e-8)


def test_schwarzschild_conformal(schw_solution):
    sol = schw_solution
    assert sol.P == pytest.approx(-2 * np.pi * sol.A, rel=1e-6)
    assert sol.A < 0 and 0 < cg.gamma_constant(sol) < 1
    fit = cg.conformal_mass_fit(sol)
    assert fit["m_tilde"] == pytest.approx(fit["m_bar_plus_2A"], abs=1e-8)
    assert np.all(sol.u[1:] > 0) and sol.meta["residual"] < 1e-10


def test_refinement_and_cylinder_length(schw_jang, schw_solution):
    cm = _composite(schw_jang)
    fine = cg.solve_conformal(cm, refine=4)
    assert cg.gamma_constant(fine) == pytest.approx(cg.gamma_constant(schw_solution), abs=1e-4)
    drift = cg.t_drift(cm)
    assert drift["drift_gamma"] < drift["gamma"][0] - drift["gamma"][1]


def test_static_reference_exterior_agrees(schw_jang, schw_solution):
    sol = cg.solve_conformal(_composite(schw_jang, m_ref=0.5))
    assert cg.gamma_constant(sol) == pytest.approx(cg.gamma_constant(schw_solution), abs=1e-9)
    assert sol.A == pytest.approx(schw_solution.A, abs=1e-9)


def test_lambda_in_range(schw_solution):
    lam = cg.conformal_lambda(schw_solution)["lambda"]
    assert 0 < lam < 1


def test_robin_on_schwarzschild(schw_jang, schw_solution):
    sol = cg.solve_conformal(_composite(schw_jang), inner="robin")
    assert np.all(sol.u > 0)
    assert sol.P == pytest.approx(-2 * np.pi * sol.A, rel=1e-9)
    assert cg.gamma_constant(sol) == pytest.approx(cg.gamma_constant(schw_solution), abs=1e-3)


def test_robin_rejects_nonpositive_factor():
    with pytest.raises(RuntimeError, match="not positive"):
        cg.solve_conformal(cg.product_cylinder(2.0), coefficient=-200.0, inner="robin")


def test_robin_on_cylinder_identity():
    sol = cg.solve_conformal(cg.product_cylinder(2.0), coefficient=0.3, inner="robin")
    assert sol.P == pytest.approx(2 * np.pi * sol.C, rel=1e-9)


def test_mismatched_corner_rejected(schw_jang):
    prof = embed_rotational(round_sphere(7.0, 16))
    st = shi_tam_flow(prof, 1.1, 1e3)
    with pytest.raises(ValueError, match="mismatch"):
        cg.compose(schw_jang, st)


def test_mollifier_properties():
    s = np.linspace(-1.2, 1.2, 20001)
    phi = cg.mollifier(s)
    assert np.sum(0.5 * (phi[1:] + phi[:-1]) * np.diff(s)) == pytest.approx(1.0, abs=1e-8)
    assert np.all(phi[np.abs(s) >= 1] == 0) and np.all(phi >= 0)
    t = np.linspace(-2, 2, 801)
    sw = cg.switch_delta(t, 0.1, 1.0)
    assert np.all(sw[np.abs(t) < 0.025] == 2.0) and np.all(sw[np.abs(t) > 1.0] == 1.0)


def test_matched_corner_audit():
    rows = cg.mollification_audit(cg.CornerBand(1.0, 0.5, 0.5, 0.1, -0.2))
    for r in rows[1:]:
        assert 0.5 <= r["sup_ratio"] <= 2.0
    assert abs(rows[-1]["spike_amplitude"]) < 1e-10


def test_mismatched_corner_spike_is_twice_the_jump():
    rows = cg.mollification_audit(cg.CornerBand(1.0, 0.5, 0.4, 0.1, -0.2))
    for r in rows:
        assert r["spike_integral"] == pytest.approx(2 * r["H_jump"], rel=1e-6)
    assert rows[-1]["sup_ratio"] == pytest.approx(4.0, rel=1e-3)


def test_bad_inputs():
    with pytest.raises(ValueError):
        cg.product_cylinder(0.0)
    with pytest.raises(ValueError):
        cg.solve_conformal(cg.product_cylinder(1.0), inner="neumann")
    with pytest.raises(ValueError):
        cg.exterior_kernel(1.0, 1.0)
