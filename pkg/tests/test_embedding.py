import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlmass import exact_slices as es
from qlmass import embedding as em
from qlmass.surfaces import AxisymSurfaceData, round_sphere
from qlmass._polar import PolarGrid


def ellipsoid(A, B, order=48):
    g = PolarGrid(order)
    a = np.sqrt(A**2 * g.cos**2 + B**2 * g.sin**2)
    return AxisymSurfaceData(g, a=a, b=A * g.sin, H=np.ones(order), trk=0.0)


@given(A=st.floats(0.7, 1.4), B=st.floats(0.7, 1.4))
@settings(max_examples=30, deadline=None)
def test_ellipsoid_profile_and_curvatures(A, B):
    s = ellipsoid(A, B)
    p = em.embed_rotational(s)
    th = s.grid.theta
    q = A**2 * np.cos(th) ** 2 + B**2 * np.sin(th) ** 2
    assert np.allclose(p.rho, A * np.sin(th), atol=1e-10)
    assert np.allclose(p.z, B * np.cos(th), atol=1e-8)
    assert np.allclose(p.kappa1, A * B / q**1.5, rtol=1e-6)
    assert np.allclose(p.kappa2, B / (A * np.sqrt(q)), rtol=1e-8)


def test_kerr_sphere_profile_is_isometric(kerr_spec):
    s = es.extract_surface(kerr_spec, 3.0, 48)
    p = em.embed_rotational(s)
    g = s.grid
    ds = np.hypot(g.d_odd(p.rho), g.d_even(p.z))
    assert np.allclose(ds, s.a, rtol=1e-10)
    assert np.allclose(p.rho, s.b, rtol=1e-14)
    # Gauss equation for the embedded surface
    from qlmass.surfaces import gauss_curvature
    assert np.allclose(p.kappa1 * p.kappa2, gauss_curvature(s), rtol=1e-7)


def test_negative_curvature_rejected():
    spec = es.SpacetimeSpec("kerr", m=1.0, a=0.95)
    s = es.extract_surface(spec, spec.r_plus, 32)
    with pytest.raises(ValueError, match="Gauss curvature"):
        em.embed_rotational(s)


@given(c=st.floats(-0.3, 0.3), d=st.floats(-0.3, 0.3))
@settings(max_examples=25, deadline=None)
def test_projected_curvature_two_routes(c, d):
    s = es.extract_surface(es.SpacetimeSpec("schwarzschild", m=1.0), 5.0, 40)
    g = s.grid
    tau = c * g.x + d * (1.5 * g.x**2 - 0.5) + 0.1 * c * d * g.x**3
    assert em.convexity_check(s, 5.0 * tau)["identity_residual"] < 1e-9


def test_hat_embedding_zero_tau_is_euclidean():
    s = round_sphere(2.0, 24)
    p = em.embed_hat(s, np.zeros(24))
    assert np.allclose(p.H0, 1.0) and p.meta["target"] == "minkowski"


@pytest.mark.parametrize("m", [0.2, 0.5, 1.0])
def test_static_schwarzschild_round(m):
    r = 4.0
    p = em.embed_static_schwarzschild(round_sphere(r, 24), m)
    V = np.sqrt(1 - 2 * m / r)
    assert np.allclose(p.rho**2 + p.z**2, r * r, rtol=1e-10)
    assert np.allclose(p.V, V, rtol=1e-10)
    assert np.allclose(p.H0, 2 / r * V, rtol=1e-9)
    assert np.allclose(p.ric_nn, -2 * m / r**3, rtol=1e-9)
    rep = em.convexity_report(p)
    assert rep["star_shaped"] and rep["two_convex"] and rep["ric_nonpositive"]


def test_static_reduces_to_flat(kerr_spec):
    s = es.extract_surface(kerr_spec, 4.0, 32)
    flat = em.embed_rotational(s)
    p = em.embed_static_schwarzschild(s, 0.0)
    assert np.allclose(p.H0, flat.H0, rtol=1e-9)
    assert np.all(p.V == 1.0)


def test_static_bad_inputs():
    with pytest.raises(ValueError):
        em.embed_static_schwarzschild(round_sphere(4.0, 24), -0.1)
    with pytest.raises(ValueError):
        em.embed_static_schwarzschild(round_sphere(1.5, 24), 1.0)


def test_profile_csv(tmp_path):
    p = em.embed_rotational(round_sphere(1.0, 8))
    em.write_profile_csv(p, tmp_path / "p.csv")
    rows = (tmp_path / "p.csv").read_text().splitlines()
    assert rows[0].split(",") == list(em.PROFILE_COLUMNS) and len(rows) == 9
