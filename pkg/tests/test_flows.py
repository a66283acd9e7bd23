import numpy as np
import pytest

from qlmass import exact_slices as es
from qlmass import flows as fl
from qlmass.embedding import embed_rotational, embed_static_schwarzschild
from qlmass.surfaces import AxisymSurfaceData, round_sphere
from qlmass._polar import PolarGrid


@pytest.mark.parametrize("r0,u0", [(2.0, 0.8), (4.0, 1.2), (6.0, 2.0), (3.0, 1.0 + 1e-3)])
def test_shi_tam_round_closed_form(r0, u0):
    tr = fl.shi_tam_flow(embed_rotational(round_sphere(r0, 12)), u0, 1e3)
    assert np.max(np.abs(tr.u - fl.round_exact_u(tr.r, r0, u0)[:, None])) < 1e-8
    # on round leaves the monotone quantity is r (1 - 1/u), decreasing to the exterior mass
    assert tr.monotone
    assert tr.M[0] == pytest.approx(r0 * (1 - 1 / u0), rel=1e-12)
    assert tr.mass_limit == pytest.approx(fl.exterior_mass(r0, u0), abs=1e-4 * r0)


def test_shi_tam_fixed_point():
    tr = fl.shi_tam_flow(embed_rotational(round_sphere(3.0, 12)), 1.0, 300.0)
    assert np.max(np.abs(tr.u - 1.0)) < 1e-10 and np.max(np.abs(tr.M)) < 1e-10


def test_shi_tam_static_reference_closed_form():
    r0, u0, m = 4.0, 1.3, 0.5
    prof = embed_static_schwarzschild(round_sphere(r0, 24), m)
    tr = fl.shi_tam_flow(prof, u0, 1e3, "schwarzschild", m_ref=m)
    assert np.max(np.abs(tr.u - fl.round_exact_u(tr.r, r0, u0, m)[:, None])) < 1e-8
    assert tr.mass_limit == pytest.approx(fl.exterior_mass(r0, u0, m), abs=1e-4)
    assert tr.monotone


def test_shi_tam_nonround_monotone():
    g = PolarGrid(16)
    a = np.sqrt(1.2**2 * g.cos**2 + g.sin**2)
    s = AxisymSurfaceData(g, a=a, b=1.2 * g.sin, H=np.ones(16), trk=0.0)
    prof = embed_rotational(s)
    u0 = 1.0 + 0.2 * g.x**2
    tr = fl.shi_tam_flow(prof, u0, 200.0)
    assert tr.monotone and np.all(np.diff(tr.M) <= 1e-9)
    assert np.all(tr.u > 0)


def test_shi_tam_bad_input():
    prof = embed_rotational(round_sphere(3.0, 12))
    with pytest.raises(ValueError):
        fl.shi_tam_flow(prof, 1.2, 2.0)
    with pytest.raises(ValueError):
        fl.shi_tam_flow(prof, 1.2, 30.0, reference="ads")
    g = PolarGrid(16)
    s = AxisymSurfaceData(g, a=np.sqrt(1.44 * g.cos**2 + g.sin**2), b=1.2 * g.sin, H=np.ones(16), trk=0.0)
    with pytest.raises(ValueError):
        fl.shi_tam_flow(embed_static_schwarzschild(s, 0.1), 1.2, 30.0, "schwarzschild", m_ref=0.1)


@pytest.fixture(scope="module")
def schw_trace():
    d = es.build_radial_data(es.SpacetimeSpec("schwarzschild", m=1.0), r_max=8)
    return fl.imcf_radial(d, "horizon", 8.0)


def test_imcf_schwarzschild(schw_trace):
    assert np.max(np.abs(schw_trace.m_H - 1.0)) < 1e-12
    assert schw_trace.area_law_error() < 1e-12
    assert schw_trace.alpha2 == pytest.approx(0.75, abs=1e-12)
    assert not schw_trace.jump.any()


def test_imcf_isotropic_agrees_with_areal():
    d = es.build_radial_data(es.SpacetimeSpec("schwarzschild", m=1.0, slicing="isotropic"), r_max=8)
    tr = fl.imcf_radial(d, "horizon", 8.0)
    assert np.max(np.abs(tr.m_H - 1.0)) < 1e-10
    R8 = 8 * (1 + 1 / 16) ** 2
    assert tr.alpha2 == pytest.approx(1 - 2 / R8, abs=1e-12)


def test_weak_flow_jumps_over_bottleneck():
    s = np.linspace(0, 10, 401)
    R = 2 + s - 1.5 * np.exp(-((s - 5) ** 2))
    R = np.maximum.accumulate(R) * 0 + R
    dR = np.gradient(R, s)
    tr = fl.imcf_profile(s, R, dR)
    assert tr.jump.any()
    lv = tr.leaves
    assert np.all(np.diff(tr.area[lv]) >= 0)
    assert tr.area_law_error() < 1e-12


def test_scaling(schw_trace):
    sc = schw_trace.scaled(3.0)
    assert sc.alpha2 == pytest.approx(schw_trace.alpha2, abs=1e-14)
    assert np.allclose(sc.m_H, 3.0 * schw_trace.m_H)


def test_rn_charge_chain():
    d = es.build_radial_data(es.SpacetimeSpec("rn", m=1.0, Q=0.6), r_max=8)
    tr = fl.imcf_radial(d, "horizon", 8.0)
    out = fl.charge_monotonicity_bound(tr, 0.6)
    assert out["min_slack"] >= -1e-10 and out["chain_min_gap"] >= -1e-9
    # the chain is an equality on RN: the increment equals the closed form
    assert out["increment_t0"] == pytest.approx(out["bound"], abs=1e-10)
    with pytest.raises(ValueError):
        fl.charge_monotonicity_bound(tr, 0.9)


def test_kerr_am_chain():
    d = es.build_radial_data(es.SpacetimeSpec("kerr", m=1.0, a=0.6), r_max=6, n=40)
    tr = fl.imcf_radial(d, "horizon", 6.0, n=40, polar_order=24)
    assert tr.meta["proxy"]
    out = fl.am_monotonicity_bound(tr, 0.6, tr.meta["circumference"])
    assert out["chain_ok"] and out["bound"] > 0
    with pytest.raises(ValueError):
        fl.am_monotonicity_bound(tr, 0.6, 0.0)


def test_lambda_ratio_identity_metric():
    a = 4 * np.pi * np.linspace(1, 3, 30) ** 2
    out = fl.lambda_ratio(a, a, a[0])
    assert out["lambda"] == pytest.approx(np.sqrt(a[-1] * a[0]) / a[-1])
    with pytest.raises(ValueError):
        fl.lambda_ratio(a, a, 0.0)


def test_imcf_bad_input():
    d = es.build_radial_data(es.SpacetimeSpec("minkowski", m=0.0), r_max=5)
    with pytest.raises(ValueError):
        fl.imcf_radial(d, "horizon", 5.0)
    with pytest.raises(ValueError):
        fl.imcf_radial(d, 3.0, 2.0)
