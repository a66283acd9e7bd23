import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlmass import exact_slices as es
from qlmass import surfaces as sf
from qlmass._polar import PolarGrid


def _smooth_surface(order, c1, c2, h):
    """Regular axisymmetric sphere: beta equals a at both poles."""
    g = PolarGrid(order)
    a = np.exp(c1 * g.x**2 + c2 * g.x)
    beta = a * np.exp((1 - g.x**2) * h)
    return sf.AxisymSurfaceData(g, a=a, b=beta * g.sin, H=np.full(order, 1.0), trk=0.0)


@given(c1=st.floats(-0.4, 0.4), c2=st.floats(-0.3, 0.3), h=st.floats(-0.3, 0.3))
@settings(max_examples=40, deadline=None)
def test_gauss_bonnet(c1, c2, h):
    s = _smooth_surface(48, c1, c2, h)
    assert sf.gauss_bonnet(s) == pytest.approx(4 * np.pi, rel=1e-9)


@given(c1=st.floats(-0.4, 0.4), h=st.floats(-0.3, 0.3), k=st.integers(1, 6))
@settings(max_examples=30, deadline=None)
def test_laplacian_integrates_to_zero(c1, h, k):
    s = _smooth_surface(48, c1, 0.0, h)
    f = s.grid.x**k
    assert abs(s.integrate(sf.laplacian(s, f))) < 1e-9


def test_laplacian_eigenfunction():
    s = sf.round_sphere(3.0, 24)
    x = s.grid.x
    p2 = 1.5 * x**2 - 0.5
    assert np.allclose(sf.laplacian(s, p2), -6 / 9.0 * p2, atol=1e-11)


def test_round_sphere_basics():
    s = sf.round_sphere(2.5, 32)
    assert sf.area(s) == pytest.approx(4 * np.pi * 6.25, rel=1e-14)
    assert sf.circumference(s) == pytest.approx(2 * np.pi * 2.5, rel=1e-12)
    assert np.allclose(sf.gauss_curvature(s), 1 / 6.25, atol=1e-12)
    with pytest.raises(ValueError):
        sf.round_sphere(-1.0)


def test_hodge_recovers_potentials():
    g = PolarGrid(40)
    s0 = sf.round_sphere(2.0, 40)
    ups = g.x**3 - 0.6 * g.x  # P3 shape, mean zero
    var = g.x**2 - 1.0 / 3.0
    p_theta = g.d_even(ups)
    p_phi = s0.b / s0.a * g.d_even(var)
    s = s0.copy(p_theta=p_theta, p_phi=p_phi)
    hp = sf.hodge_decompose(s)
    assert sf.hodge_residual(s, hp) < 1e-11
    assert np.allclose(hp["upsilon"], ups, atol=1e-11)
    assert np.allclose(hp["varpi"], var, atol=1e-11)


@pytest.mark.parametrize("r", [1.8, 3.0, 8.0, 20.0])
def test_rn_charge_every_radius(rn_spec, r):
    ch = sf.charges(es.extract_surface(rn_spec, r, 16))
    assert ch["Q_e"] == pytest.approx(0.6, rel=1e-12)
    assert ch["Q_b"] == 0.0


@pytest.mark.parametrize("r", [3.0, 5.0, 8.0])
def test_kerr_angular_momentum_definitions_agree(kerr_spec, r):
    s = es.extract_surface(kerr_spec, r, 48)
    vals = [sf.angular_momentum(s, w) for w in ("BY", "LY", "Komar")]
    assert np.allclose(vals, 0.6, atol=1e-9)


def test_field_angular_momentum_extreme_kn():
    spec = es.SpacetimeSpec("kerr_newman", m=1.0, a=0.6, Q=0.8)
    s = es.extract_surface(spec, spec.r_plus, 48)
    assert sf.angular_momentum(s, "BY", include_field=True) == pytest.approx(0.6, abs=1e-9)
    assert sf.charges(s)["Q_e"] == pytest.approx(0.8, abs=1e-10)


def test_unknown_definition():
    with pytest.raises(ValueError):
        sf.angular_momentum(sf.round_sphere(1.0, 8, p_phi=np.zeros(8)), "ADM")


def test_csv_round_trip(tmp_path, kerr_spec):
    s = es.extract_surface(kerr_spec, 4.0, 16)
    p = tmp_path / "s.csv"
    sf.write_surface_csv(s, p)
    t = sf.read_surface_csv(p)
    for name in ("a", "b", "H", "trk", "p_theta", "p_phi", "E_nu", "A_phi"):
        assert np.array_equal(getattr(s, name), getattr(t, name))
    assert t.meta["r"] == 4.0
