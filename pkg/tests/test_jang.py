import numpy as np
import pytest
from scipy.integrate import solve_ivp

from qlmass import exact_slices as es
from qlmass import jang as jg


def _data(family, slicing, Q=0.0, **kw):
    return es.build_radial_data(es.SpacetimeSpec(family, m=1.0, Q=Q, slicing=slicing), **kw)


@pytest.fixture(scope="module")
def pg_solution():
    return jg.solve_jang_radial(_data("schwarzschild", "pg", r_max=20), 0.0, True)


@pytest.mark.parametrize("family,slicing,Q", [("schwarzschild", "pg", 0.0), ("rn", "pg", 0.6),
                                              ("rn", "static", 0.6)])
def test_blowup_matches_independent_integration(family, slicing, Q):
    d = _data(family, slicing, Q, r_max=20)
    s = jg.solve_jang_radial(d, 0.0, True)
    P = lambda k, r: float(d.profile(k, r))  # noqa: E731

    def rhs(r, W):
        sA = 1 / np.sqrt(P("Ainv", r))
        return P("krr", r) * (1 - W**2) + 2 * sA * sA * P("kT", r) - 2 * P("dR", r) / P("R", r) * W

    o = solve_ivp(rhs, (s.r[5], s.r[-1]), [s.W[5]], rtol=1e-12, atol=1e-14, dense_output=True,
                  method="DOP853")
    assert np.max(np.abs(o.sol(s.r[5:])[0] - s.W[5:])) < 1e-9
    assert s.W[0] == pytest.approx(-1.0, abs=1e-8)


def test_time_symmetric_closed_form():
    s = jg.solve_jang_radial(_data("rn", "static", 0.6, r_max=20), 0.0, True)
    # k = 0 gives (W R^2)' = 0, so W = -R_0^2 / R^2 off the starting sphere
    assert np.allclose(s.W, -s.r[0] ** 2 / s.r**2, atol=1e-9)


def test_identities_and_residuals(pg_solution):
    ids = jg.jang_identities(pg_solution)
    assert ids["scalar_residual"] < 1e-6
    assert ids["energy_slack_min"] > -1e-10 and ids["E_bound"]
    assert pg_solution.ode_residual() < 1e-6


def test_cylindrical_end(pg_solution):
    m = pg_solution.meta
    assert m["cross_section_area"] == pytest.approx(16 * np.pi, rel=1e-6)
    assert m["log_rate_drift"] < 1e-3


def test_blowup_sequence_stable():
    out = jg.blowup_sequence(_data("schwarzschild", "pg", r_max=8), n=300)
    assert out["drift"] < 1e-8


def test_boundary_inequality(pg_solution):
    bd = jg.jang_boundary(pg_solution)
    assert bd["slack"] >= 0
    assert bd["Hbar_minus_X"] >= bd["Hvec"]


def test_flat_graph_for_time_symmetric_data():
    d = _data("schwarzschild", "static", r_min=3, r_max=20)
    s = jg.solve_jang_radial(d, 0.3)
    assert np.max(np.abs(s.f - 0.3)) < 1e-14
    assert jg.jang_identities(s)["scalar_residual"] < 1e-12


def test_two_sided_dirichlet():
    d = _data("rn", "pg", 0.5, r_min=3, r_max=20)
    s = jg.solve_jang_radial(d, 0.3, tau_inner=8.0)
    assert s.f[0] == pytest.approx(8.0, abs=1e-8) and s.f[-1] == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(ValueError, match="out of reach"):
        jg.solve_jang_radial(d, 0.3, tau_inner=0.1)


def test_deformed_charge_invariant():
    d = _data("rn", "pg", 0.5, r_min=3, r_max=20)
    for fp in (0.0, 0.7, 3.0):
        out = jg.deformed_charge(d, 5.0, fp)
        assert out["Qbar"] == pytest.approx(out["Q"], rel=1e-13)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        jg.solve_jang_radial(es.build_radial_data(es.SpacetimeSpec("kerr", m=1.0, a=0.5), r_max=5, n=10))
    with pytest.raises(ValueError):
        flat = es.build_radial_data(es.SpacetimeSpec("minkowski", m=0.0), r_max=5)
        jg.solve_jang_radial(flat, 0.0, True)


def test_csv(tmp_path, pg_solution):
    jg.write_jang_csv(pg_solution, tmp_path / "j.csv")
    lines = (tmp_path / "j.csv").read_text().splitlines()
    assert lines[0] == ",".join(jg.JANG_COLUMNS) and len(lines) == len(pg_solution.r) + 1
