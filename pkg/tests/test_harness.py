import json

import numpy as np
import pytest

from qlmass import harness as hn


@pytest.fixture(scope="module")
def suite():
    return {cfg.name: hn.run_scenario(cfg) for cfg in hn.default_scenarios()}


def _verdict(rep, theorem):
    return next(v for v in rep["verdicts"] if v["theorem"] == theorem)


def test_suite_margins_nonnegative(suite):
    for rep in suite.values():
        for v in rep["verdicts"]:
            assert v["error"] is None, v
            assert v["hypotheses_pass"], v
            assert v["margin"] >= -rep["scenario"]["tol"], v
    assert hn.exit_status([v for r in suite.values() for v in r["verdicts"]], 1e-6) == 0


def test_schwarzschild_penrose_rhs(suite):
    v = _verdict(suite["Schwarzschild"], "LY-Penrose")
    g = v["constants"]["gamma"]["value"]
    part = next(p for p in v["parts"] if p["label"] == "Penrose-like")
    assert part["rhs"] == pytest.approx(g / (1 + g) * 2.0, rel=1e-12)
    assert part["lhs"] == pytest.approx(8 * (1 - np.sqrt(0.75)), rel=1e-12)
    assert v["hypotheses"]["strict_dec_on_horizon"] == "relaxed"


def test_rn_charge_bound_and_no_saturation(suite):
    v = _verdict(suite["RN-0.6"], "BY-charge")
    part = next(p for p in v["parts"] if p["label"] == "byq2")
    a2 = v["constants"]["alpha2"]["value"]
    area = v["constants"]["area_star"]["value"]
    assert part["rhs"] == pytest.approx(0.3 + a2 * np.sqrt(np.pi / area) * 0.36, rel=1e-12)
    assert part["margin"] > 0
    assert v["notes"][0]["no_saturation"] and part["rhs"] < 0.6


def test_horizon_area_equality(suite):
    v = _verdict(suite["xKN"], "horizon-area")
    assert abs(v["margin"]) < 1e-8
    assert v["lhs"] == pytest.approx(4 * np.pi * 1.36, rel=1e-10)


def test_kerr_am_constants(suite):
    v = _verdict(suite["Kerr-0.6"], "BY-AM")
    assert v["constants"]["J"]["value"] == pytest.approx(0.6, abs=1e-8)
    assert v["hypotheses"]["J_eta_zero"] == "pass" and v["hypotheses"]["maximal"] == "pass"


def test_wang_yau_records_caveat(suite):
    v = _verdict(suite["RN-0.6"], "WY-Penrose")
    assert "optimality_residual" in v["constants"]
    assert any("upper bound" in str(n) for n in v["notes"])


def test_static_and_flat_gamma_agree(suite):
    st = suite["RN-0.6"]["stages"]
    assert st["conformal_schwarzschild"]["gamma"] == pytest.approx(st["conformal_flat"]["gamma"], abs=1e-9)


def test_provenance(suite):
    for rep in suite.values():
        for v in rep["verdicts"]:
            for c in v["constants"].values():
                assert isinstance(c["source"], str) and c["source"]
                assert np.isfinite(c["value"])


def test_determinism():
    cfg = hn.default_scenarios()[1]
    a = json.dumps(hn.run_scenario(cfg), sort_keys=True)
    b = json.dumps(hn.run_scenario(cfg), sort_keys=True)
    assert a == b


def test_stage_error_is_tagged():
    cfg = hn.ScenarioConfig("kerr", "kerr", 1.0, 0.6, 0.0, r_outer=5.0, n_radial=20, imcf_n=20,
                            polar_order=16, theorems=("LY-Penrose",))
    v = hn.verify("LY-Penrose", cfg)
    assert v.error.startswith("[jang]") and v.margin is None and not v.hypotheses_pass


def test_hypothesis_failure_suppresses_margin():
    cfg = hn.ScenarioConfig("pg", "schwarzschild", 1.0, slicing="pg", r_outer=6.0, theorems=("BY-AM",))
    v = hn.verify("BY-AM", cfg)
    assert v.hypotheses["maximal"] == "fail"
    assert v.margin is None and v.lhs is not None
    assert v.ok(1e-6)


def test_exit_status():
    ok = {"hypotheses_pass": True, "margin": 0.1}
    bad = {"hypotheses_pass": True, "margin": -0.1}
    skipped = {"hypotheses_pass": False, "margin": None}
    assert hn.exit_status([ok, skipped], 1e-6) == 0
    assert hn.exit_status([ok, bad], 1e-6) == 1
    assert hn.exit_status([bad], 0.2) == 0


def test_bekenstein_report():
    out = hn.bekenstein_report({"m_BY": 1.0, "m_LY": 0.9}, 0.0, 0.0, 5.0, 5.0, 0.5, 0.3, 0.2)
    assert all(v["rhs"] == 0 for v in out.values()) and set(out) == {"BY", "LY"}
    out = hn.bekenstein_report({"m_BY": 1.0}, 0.6, 0.0, 8.0, 8.0, alpha2=0.7)
    assert out["BY"]["rhs"] == pytest.approx((0.7 / 2 * 0.36 / 8) ** 2)
    with pytest.raises(ValueError):
        hn.bekenstein_report({}, 0.0, 0.0, 0.0, 1.0)


def test_sweep_grid():
    base = hn.ScenarioConfig("rn", "reissner_nordstrom", 1.0, 0.0, 0.3, theorems=("BY-charge",),
                             n_radial=100, imcf_n=100, polar_order=16)
    rows = hn.run_sweep(base, {"Q": [0.2, 0.4, 0.6], "r_outer": [5.0, 6.0, 8.0]})
    assert len(rows) == 9
    assert all(r["margin"] > 0 for r in rows)
    assert len({r["scenario"] for r in rows}) == 9


def test_sweep_isolates_failures():
    base = hn.ScenarioConfig("rn", "reissner_nordstrom", 1.0, 0.0, 0.3, theorems=("BY-charge",),
                             n_radial=60, imcf_n=60, polar_order=16)
    rows = hn.run_sweep(base, {"Q": [0.5, 1.5]})
    assert rows[0]["margin"] > 0
    assert rows[1]["error"] and not rows[1]["hypotheses_pass"]
    assert hn.run_sweep(base, {"Q": []}) == [] and hn.run_sweep(base, {}) == []


def test_refinement_sweep_converges():
    base = hn.ScenarioConfig("rn", "reissner_nordstrom", 1.0, 0.0, 0.6, theorems=("BY-charge",))
    rows = hn.run_sweep(base, {"imcf_n": [50, 100, 200]})
    m = [r["margin"] for r in rows]
    assert abs(m[2] - m[1]) <= 0.5 * abs(m[1] - m[0]) + 1e-12


def test_config_round_trip(tmp_path):
    cfg = hn.ScenarioConfig("x", "kerr_newman", 1.0, 0.3, 0.4, r_outer=7.0, m_ref=0.25,
                            theorems=("BY-AM", "horizon-area"), tol=1e-7)
    p = tmp_path / "c.ini"
    p.write_text(hn.config_to_ini(cfg))
    assert hn.load_config(p) == cfg


def test_config_errors(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[harness]\nschema = 99\n")
    with pytest.raises(ValueError, match="schema"):
        hn.load_config(p)
    p.write_text("[scenario]\ncolour = red\n")
    with pytest.raises(ValueError, match="unknown config key"):
        hn.load_config(p)
    with pytest.raises(ValueError):
        hn.load_config(tmp_path / "missing.ini")
    with pytest.raises(ValueError):
        hn.ScenarioConfig(theorems=("no-such-id",))
    with pytest.raises(ValueError):
        hn.ScenarioConfig(tol=0.0)
    with pytest.raises(ValueError):
        hn.verify("nope", hn.ScenarioConfig())
