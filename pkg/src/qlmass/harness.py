"""Scenario configuration and the theorem verification engine.

A scenario names an exact slice, an annulus between the horizon and an
outer coordinate sphere, and the numerical settings of every stage.  The
Pipeline object evaluates the stages lazily and records their outputs;
verify() assembles both sides of one inequality from those outputs and
checks the hypotheses that can be checked on the data.
"""

from dataclasses import asdict, dataclass, field
import configparser
import itertools
import json

import numpy as np

from . import exact_slices as es
from .conformal_glue import compose, conformal_lambda, gamma_constant, solve_conformal
from .embedding import convexity_report, embed_rotational, embed_static_schwarzschild
from .flows import imcf_radial, shi_tam_flow
from .jang import jang_boundary, solve_jang_radial
from .masses import brown_york, liu_yau, static_mass, wang_yau_mass
from .surfaces import angular_momentum, charges, gauss_curvature, round_sphere

SCHEMA_VERSION = 1

THEOREMS = ("BY-charge", "BY-AM", "BY-combined", "LY-Penrose", "LY-Penrose-QJ", "WY-Penrose",
            "WY-Penrose-QJ", "static-LY", "static-LY-QJ", "horizon-area", "Bekenstein")


@dataclass
class ScenarioConfig:
    """Everything a verification run needs; tolerances are explicit."""

    name: str = "scenario"
    family: str = "reissner_nordstrom"
    m: float = 1.0
    a: float = 0.0
    Q: float = 0.0
    slicing: str = "static"
    r_outer: float = 8.0
    n_radial: int = 400
    polar_order: int = 32
    imcf_n: int = 400
    shitam_r_max: float = 1e4
    shitam_order: int = 24
    m_ref: float = None
    tau_coeffs: int = 4
    tau_bound: float = 0.3
    seed: int = 0
    tol: float = 1e-6
    theorems: tuple = THEOREMS

    def __post_init__(self):
        if self.r_outer <= 0 or self.n_radial < 3 or self.polar_order < 4:
            raise ValueError("invalid scenario grid settings")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        unknown = [t for t in self.theorems if t not in THEOREMS]
        if unknown:
            raise ValueError(f"unknown theorem ids {unknown}")
        self.theorems = tuple(self.theorems)
        self.spec  # validates the spacetime parameters

    @property
    def spec(self) -> es.SpacetimeSpec:
        return es.SpacetimeSpec(self.family, m=self.m, a=self.a, Q=self.Q, slicing=self.slicing)


_FLOAT_KEYS = ("m", "a", "Q", "r_outer", "shitam_r_max", "m_ref", "tau_bound", "tol")
_INT_KEYS = ("n_radial", "polar_order", "imcf_n", "shitam_order", "tau_coeffs", "seed")


def load_config(path) -> ScenarioConfig:
    """Read an INI file with sections [scenario], [grids], [masses] and [harness]."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ValueError(f"cannot read config {path}")
    version = cp.getint("harness", "schema", fallback=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported config schema {version}")
    kw = {}
    for sec in cp.sections():
        for key, val in cp.items(sec):
            if key == "schema":
                continue
            if key in _FLOAT_KEYS:
                kw[key] = None if val.lower() == "none" else float(val)
            elif key in _INT_KEYS:
                kw[key] = int(val)
            elif key == "theorems":
                kw[key] = tuple(t.strip() for t in val.split(",") if t.strip())
            elif key in ("name", "family", "slicing"):
                kw[key] = val.strip()
            elif key == "q":
                kw["Q"] = float(val)
            else:
                raise ValueError(f"unknown config key {sec}.{key}")
    return ScenarioConfig(**kw)


def config_to_ini(cfg: ScenarioConfig) -> str:
    d = asdict(cfg)
    lines = ["[harness]", f"schema = {SCHEMA_VERSION}", f"tol = {cfg.tol!r}",
             "theorems = " + ", ".join(cfg.theorems), "", "[scenario]"]
    for k in ("name", "family", "m", "a", "Q", "slicing", "r_outer", "m_ref"):
        lines.append(f"{k} = {d[k]}")
    lines += ["", "[grids]"] + [f"{k} = {d[k]}" for k in ("n_radial", "polar_order", "imcf_n",
                                                           "shitam_r_max", "shitam_order")]
    lines += ["", "[masses]"] + [f"{k} = {d[k]}" for k in ("tau_coeffs", "tau_bound", "seed")]
    return "\n".join(lines) + "\n"


class StageError(RuntimeError):
    def __init__(self, stage: str, err: Exception):
        super().__init__(f"[{stage}] {err}")
        self.stage = stage


class Pipeline:
    """Lazily evaluated stages of one scenario, with a provenance record."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.spec = cfg.spec
        self._cache = {}
        self.stages = {}

    def _get(self, name, fn):
        if name not in self._cache:
            try:
                self._cache[name] = fn()
            except StageError:
                raise
            except (ValueError, RuntimeError) as exc:
                raise StageError(name, exc) from exc
        return self._cache[name]

    # -- data and surfaces
    @property
    def data(self):
        c = self.cfg
        return self._get("data", lambda: es.build_radial_data(
            self.spec, r_max=c.r_outer, n=c.n_radial, polar_order=c.polar_order))

    @property
    def outer(self):
        return self._get("outer", lambda: es.extract_surface(self.spec, self.cfg.r_outer,
                                                             self.cfg.polar_order))

    @property
    def horizon(self):
        if self.spec.m == 0:
            raise StageError("horizon", ValueError("no horizon in flat data"))
        return self._get("horizon", lambda: es.extract_surface(self.spec, self.spec.horizon_coordinate,
                                                               self.cfg.polar_order))

    def _areas(self):
        def run():
            Ah = self.horizon.integrate(1.0)
            A = self.outer.integrate(1.0)
            self.stages["areas"] = {"horizon": Ah, "outer": A}
            return Ah, A
        return self._get("areas", run)

    @property
    def horizon_area(self) -> float:
        return self._areas()[0]

    @property
    def outer_area(self) -> float:
        return self._areas()[1]

    @property
    def charge(self) -> float:
        def run():
            ch = charges(self.outer)
            self.stages["charges"] = ch
            return float(np.sqrt(ch["Q2"]))
        return self._get("charge", run)

    @property
    def angular_momentum(self) -> float:
        """Angular momentum of the horizon, including the field term with charge."""
        def run():
            withf = self.spec.Q != 0
            J = angular_momentum(self.horizon, "BY", include_field=withf)
            self.stages["angular_momentum"] = {
                "J_h": J, "J_outer_BY": angular_momentum(self.outer, "BY", include_field=withf),
                "J_outer_LY": angular_momentum(self.outer, "LY", include_field=withf),
                "include_field": withf}
            return J
        return self._get("angular_momentum", run)

    # -- flows
    @property
    def imcf(self):
        def run():
            tr = imcf_radial(self.data, "horizon", self.cfg.r_outer, n=self.cfg.imcf_n,
                             polar_order=self.cfg.polar_order)
            circ = tr.meta.get("circumference", 2 * np.pi * np.sqrt(self.outer_area / (4 * np.pi)))
            self.stages["imcf"] = {"alpha2": tr.alpha2, "t0": tr.t0, "area0": tr.area0,
                                   "circumference": circ, "proxy": bool(tr.meta.get("proxy", False))}
            return tr
        return self._get("imcf", run)

    @property
    def circumference(self) -> float:
        self.imcf
        return self.stages["imcf"]["circumference"]

    def _jang(self):
        def run():
            sol = solve_jang_radial(self.data, 0.0, blowup_at_horizon=True)
            bd = jang_boundary(sol)
            self.stages["jang"] = {k: float(v) for k, v in bd.items()}
            return sol, bd
        return self._get("jang", run)

    def _composite(self, reference: str):
        def run():
            sol, bd = self._jang()
            R = float(self.data.profile("R", sol.r[-1]))
            order = self.cfg.shitam_order
            if reference == "flat":
                prof = embed_rotational(round_sphere(R, order))
                u0 = prof.H0[0] / bd["Hbar_minus_X"]
                st = shi_tam_flow(prof, u0, self.cfg.shitam_r_max)
            else:
                mref = self.m_ref
                prof = embed_static_schwarzschild(round_sphere(R, order), mref)
                u0 = prof.H0[0] / bd["Hbar_minus_X"]
                st = shi_tam_flow(prof, u0, self.cfg.shitam_r_max, reference="schwarzschild", m_ref=mref)
            cm = compose(sol, st)
            cs = solve_conformal(cm)
            gam = gamma_constant(cs)
            lam = conformal_lambda(cs)["lambda"]
            self.stages[f"conformal_{reference}"] = {
                "u0": float(u0), "shitam_mass": st.mass_limit, "shitam_monotone": st.monotone,
                "jump": cm.jump, "A": cs.A, "P": cs.P, "gamma": gam, "lambda": lam,
                "residual": float(cs.meta.get("residual", np.nan))}
            return gam, lam
        return self._get(f"conformal_{reference}", run)

    def gamma(self, reference: str = "flat") -> float:
        return self._composite(reference)[0]

    def lam(self, reference: str = "flat") -> float:
        return self._composite(reference)[1]

    @property
    def m_ref(self) -> float:
        return 0.5 * self.spec.m if self.cfg.m_ref is None else float(self.cfg.m_ref)

    # -- masses
    @property
    def m_BY(self) -> float:
        return self._get("m_BY", lambda: self._store("m_BY", brown_york(self.outer)))

    @property
    def m_LY(self) -> float:
        return self._get("m_LY", lambda: self._store("m_LY", liu_yau(self.outer)))

    @property
    def wang_yau(self) -> dict:
        def run():
            c = self.cfg
            wy = wang_yau_mass(self.outer, n_coeffs=c.tau_coeffs, bound=c.tau_bound, seed=c.seed)
            rec = {"m_WY_upper": wy["m_WY_upper"], "rho_mass": wy["rho_mass"],
                   "coeffs": [float(x) for x in wy["coeffs"]],
                   "optimality_residual": wy["residual"]["sup"], "upper_bound": True}
            self.stages["wang_yau"] = rec
            return rec
        return self._get("wang_yau", run)

    @property
    def static(self) -> dict:
        def run():
            prof = embed_static_schwarzschild(self.outer, self.m_ref)
            rep = convexity_report(prof)
            val = static_mass(self.outer, prof, "LY")
            rec = {"m_ref": self.m_ref, "m_LY_static": val, **rep}
            self.stages["static"] = rec
            return rec
        return self._get("static", run)

    def _store(self, key, val):
        self.stages.setdefault("masses", {})[key] = float(val)
        return float(val)

    # -- hypothesis scans
    @property
    def energy(self) -> dict:
        def run():
            rep = es.energy_condition_report(self.data)
            self.stages["energy_conditions"] = rep
            return rep
        return self._get("energy", run)

    def radial_scan(self) -> dict:
        """Expansions, mean curvature and areas of coordinate spheres outside the horizon."""
        def run():
            r0 = self.spec.horizon_coordinate
            rs = np.linspace(r0, self.cfg.r_outer, 41)[1:]
            tp, tm, H, area = [], [], [], []
            for r in rs:
                s = es.extract_surface(self.spec, float(r), min(self.cfg.polar_order, 24))
                tp.append(s.theta_plus.min())
                tm.append(s.theta_minus.min())
                H.append(s.H.min())
                area.append(s.integrate(1.0))
            area = np.array([self.horizon_area] + area)
            rec = {"theta_plus_min": float(min(tp)), "theta_minus_min": float(min(tm)),
                   "H_min": float(min(H)), "area_increasing": bool(np.all(np.diff(area) > 0)),
                   "Q_spread": self._charge_spread(rs)}
            self.stages["radial_scan"] = rec
            return rec
        return self._get("radial_scan", run)

    def _charge_spread(self, rs) -> float:
        qs = [charges(es.extract_surface(self.spec, float(r), 16))["Q_e"] for r in rs[::8]]
        return float(np.ptp(qs))


# ---------------------------------------------------------------- verdicts

@dataclass
class VerdictRecord:
    theorem: str
    scenario: str
    lhs: float = None
    rhs: float = None
    margin: float = None
    hypotheses: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    parts: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    error: str = None

    @property
    def hypotheses_pass(self) -> bool:
        return self.error is None and all(v != "fail" for v in self.hypotheses.values())

    def ok(self, tol: float) -> bool:
        """False only for a hypothesis-passing verdict with a negative margin."""
        if not self.hypotheses_pass:
            return True
        return self.margin is not None and self.margin >= -tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hypotheses_pass"] = self.hypotheses_pass
        return d


def _flag(ok: bool) -> str:
    return "pass" if ok else "fail"


def _c(value, source: str) -> dict:
    return {"value": float(value), "source": source}


def _part(rec: VerdictRecord, label: str, lhs: float, rhs: float) -> None:
    rec.parts.append({"label": label, "lhs": float(lhs), "rhs": float(rhs), "margin": float(lhs - rhs)})


def _finish(rec: VerdictRecord) -> VerdictRecord:
    if rec.parts:
        worst = min(rec.parts, key=lambda p: p["margin"])
        rec.lhs, rec.rhs, rec.margin = worst["lhs"], worst["rhs"], worst["margin"]
    if any(v == "fail" for v in rec.hypotheses.values()):
        # a hard hypothesis failure suppresses the margin; sides stay for inspection
        rec.margin = None
        for part in rec.parts:
            part["margin"] = None
    return rec


def _surface_hyps(p: Pipeline, rec: VerdictRecord, mean_convex=True, untrapped=False) -> None:
    s = p.outer
    rec.hypotheses["gauss_positive"] = _flag(bool(np.all(gauss_curvature(s) > 0)))
    if mean_convex:
        rec.hypotheses["mean_convex"] = _flag(bool(np.all(s.H > 0)))
    if untrapped:
        rec.hypotheses["untrapped"] = _flag(bool(np.all(s.theta_plus > 0) and np.all(s.theta_minus > 0)))
    rec.hypotheses["axisymmetric"] = "pass"


def _horizon_hyps(p: Pipeline, rec: VerdictRecord, strict: str = None) -> None:
    scan = p.radial_scan()
    rec.hypotheses["no_other_horizons"] = _flag(scan["theta_plus_min"] > 0 and scan["theta_minus_min"] > 0)
    rec.hypotheses["outerminimizing"] = "proxy" if scan["area_increasing"] else "fail"
    if strict is not None:
        en = p.energy
        key = "strict_dec_on_horizon" if strict == "dec" else "strict_dec_em_on_horizon"
        ok = en["strict_on_horizon"] if strict == "dec" else en["strict_em_on_horizon"]
        # exact vacuum and electrovacuum slices saturate the energy condition on the horizon;
        # strictness is a technical hypothesis that localized perturbations remove
        rec.hypotheses[key] = "pass" if ok else "relaxed"


def _energy_hyps(p: Pipeline, rec: VerdictRecord, em: bool) -> None:
    en = p.energy
    rec.hypotheses["dec"] = _flag(en["dec_ok"])
    if em:
        rec.hypotheses["dec_em"] = _flag(en["dec_em_ok"])


def _by_charge(p: Pipeline, rec: VerdictRecord) -> None:
    _surface_hyps(p, rec)
    scan = p.radial_scan()
    rec.hypotheses["only_minimal_surface"] = _flag(scan["H_min"] > 0)
    rec.hypotheses["outerminimizing"] = "proxy" if scan["area_increasing"] else "fail"
    rec.hypotheses["divergence_free_fields"] = _flag(scan["Q_spread"] < p.cfg.tol)
    d = p.data
    if p.spec.rotating:
        rec.hypotheses["R_geq_2E2"] = "unchecked"
    else:
        knn = d.krr * d.Ainv
        R = 16 * np.pi * d.mu + knn**2 + 2 * d.kT**2 - (knn + 2 * d.kT) ** 2
        rec.hypotheses["R_geq_2E2"] = _flag(bool(np.min(R - 2 * d.E**2) >= -p.cfg.tol))
    m, Q, Ah = p.m_BY, p.charge, p.horizon_area
    a2 = p.imcf.alpha2
    rec.constants.update(m_BY=_c(m, "masses.brown_york(outer)"), Q=_c(Q, "surfaces.charges(outer)"),
                         area_star=_c(Ah, "surfaces.area(horizon)"), alpha2=_c(a2, "flows.imcf_radial"))
    _part(rec, "BY1in", m, 0.5 * Q)
    rhs = 0.5 * Q + a2 * np.sqrt(np.pi / Ah) * Q * Q
    _part(rec, "byq2", m, rhs)
    ceiling = Q * (1 - p.spec.r_plus / (2 * p.cfg.r_outer))
    rec.notes.append({"no_saturation": bool(rhs < ceiling), "ceiling": float(ceiling)})


def _am_common(p: Pipeline, rec: VerdictRecord) -> tuple:
    _surface_hyps(p, rec)
    _energy_hyps(p, rec, em=p.spec.Q != 0)
    scan = p.radial_scan()
    rec.hypotheses["only_minimal_surface"] = _flag(scan["H_min"] > 0)
    rec.hypotheses["outerminimizing"] = "proxy" if scan["area_increasing"] else "fail"
    rec.hypotheses["maximal"] = _flag(p.energy["maximal"])
    J = p.angular_momentum
    a2 = p.imcf.alpha2
    C = p.circumference
    rec.constants.update(m_BY=_c(p.m_BY, "masses.brown_york(outer)"),
                         J=_c(J, "surfaces.angular_momentum(horizon)"),
                         alpha2=_c(a2, "flows.imcf_radial"), C=_c(C, "flows.imcf_radial circumference"),
                         area_star=_c(p.horizon_area, "surfaces.area(horizon)"))
    if p.imcf.meta.get("proxy"):
        rec.notes.append("IMCF leaves are coordinate spheres (surrogate for rotating data)")
    return J, a2, C


def _by_am(p: Pipeline, rec: VerdictRecord) -> None:
    J, a2, C = _am_common(p, rec)
    m, Ah = p.m_BY, p.horizon_area
    _part(rec, "BY2in", m, np.sqrt(abs(J)) / np.sqrt(2))
    jz = p.energy["J_eta_zero"]
    rec.hypotheses["J_eta_zero"] = _flag(jz)
    _part(rec, "byam2", m, np.sqrt(abs(J) / 2) + (2 * np.pi) ** 2 * a2 / C**2 * np.sqrt(4 * np.pi / Ah) * J * J)


def _by_combined(p: Pipeline, rec: VerdictRecord) -> None:
    J, a2, C = _am_common(p, rec)
    m, Ah, Q = p.m_BY, p.horizon_area, p.charge
    rec.hypotheses["divergence_free_fields"] = _flag(p.radial_scan()["Q_spread"] < p.cfg.tol)
    rec.constants["Q"] = _c(Q, "surfaces.charges(outer)")
    _part(rec, "combined1", m, 0.5 * np.sqrt(np.sqrt(Q**4 + 4 * J * J)))
    Rstar = np.sqrt(Ah / (4 * np.pi))
    beta = np.sqrt(a2) * Rstar / (C / (2 * np.pi))
    rec.constants["beta"] = _c(beta, "alpha R_* / R_c")
    rhs = (np.sqrt(Ah / (16 * np.pi)) + a2 * np.sqrt(np.pi / Ah) * Q * Q) ** 2 \
        + beta**2 / 2 * 4 * np.pi * J * J / Ah
    _part(rec, "combined2 (squared)", m * m, rhs)


def _penrose_like(p: Pipeline, rec: VerdictRecord, mass: float, mass_name: str, reference="flat",
                  qj: bool = False, offset: float = 0.0) -> None:
    em = p.spec.Q != 0
    _surface_hyps(p, rec, mean_convex=False, untrapped=True)
    _energy_hyps(p, rec, em=em or qj)
    _horizon_hyps(p, rec, strict="dec_em" if (qj or em) else "dec")
    gam = p.gamma(reference)
    Ah, Q, J = p.horizon_area, p.charge, p.angular_momentum
    gq = gam / (1 + gam)
    total = offset + mass
    rec.constants.update(gamma=_c(gam, f"conformal_glue.gamma_constant ({reference} exterior)"),
                         area_h=_c(Ah, "surfaces.area(horizon)"), Q=_c(Q, "surfaces.charges(outer)"),
                         J=_c(J, "surfaces.angular_momentum(horizon)"))
    rec.constants[mass_name] = _c(mass, "masses")
    if not qj:
        _part(rec, "Penrose-like", total, gq * np.sqrt(Ah / (4 * np.pi)))
        rec.hypotheses.setdefault("stable_horizon", "unchecked")
        _part(rec, "charge-AM", total, gq * np.sqrt(np.sqrt(Q**4 + 4 * J * J)))
        return
    lam = p.lam(reference)
    C = p.circumference
    rec.hypotheses["J_eta_zero"] = _flag(p.energy["J_eta_zero"])
    rec.hypotheses["hypersurface_orthogonal"] = "pass"
    rec.constants.update(lambda_=_c(lam, f"conformal_glue.conformal_lambda ({reference} exterior)"),
                         C=_c(C, "flows.imcf_radial circumference"))
    rhs = (gq * np.sqrt(Ah / (4 * np.pi)) + lam * np.sqrt(np.pi / Ah) * Q * Q) ** 2 \
        + lam * gq * 8 * np.pi**2 * J * J / C**2
    _part(rec, "squared", total * total, rhs)


def _static_common(p: Pipeline, rec: VerdictRecord) -> tuple:
    st = p.static
    rec.hypotheses["star_shaped"] = _flag(st["star_shaped"])
    rec.hypotheses["two_convex"] = _flag(st["two_convex"])
    rec.hypotheses["ric_nn_nonpositive"] = _flag(st["ric_nonpositive"])
    rec.constants["m_ref"] = _c(st["m_ref"], "scenario m_ref")
    return st["m_LY_static"], st["m_ref"]


def _horizon_area(p: Pipeline, rec: VerdictRecord) -> None:
    _energy_hyps(p, rec, em=True)
    rec.hypotheses["stable_horizon"] = "unchecked"
    rec.hypotheses["axisymmetric"] = "pass"
    Ah = p.horizon_area
    Q = float(np.sqrt(charges(p.horizon)["Q2"]))
    J = p.angular_momentum
    rec.constants.update(area_h=_c(Ah, "surfaces.area(horizon)"), Q=_c(Q, "surfaces.charges(horizon)"),
                         J=_c(J, "surfaces.angular_momentum(horizon)"))
    _part(rec, "areaamcharge", Ah, 4 * np.pi * np.sqrt(Q**4 + 4 * J * J))
    rec.notes.append({"extreme": p.spec.extreme})


def bekenstein_report(masses: dict, Q: float, J: float, R: float, R_c: float, alpha2: float = None,
                      lam_star: float = None, lam_gamma: float = None) -> dict:
    """Bekenstein-like bounds with each available quasi-local mass as the energy."""
    if R <= 0 or R_c <= 0:
        raise ValueError("radii must be positive")
    out = {}
    if alpha2 is not None and masses.get("m_BY") is not None:
        rhs = alpha2**2 * Q**4 / (4 * R * R) + alpha2 * J * J / (2 * R_c**2)
        out["BY"] = {"lhs": masses["m_BY"] ** 2, "rhs": rhs, "margin": masses["m_BY"] ** 2 - rhs}
    if lam_star is not None and lam_gamma is not None:
        for key in ("m_LY", "m_WY_upper"):
            if masses.get(key) is not None:
                rhs = lam_star**2 * Q**4 / (4 * R * R) + 2 * lam_gamma * J * J / R_c**2
                out[key[2:4]] = {"lhs": masses[key] ** 2, "rhs": rhs, "margin": masses[key] ** 2 - rhs}
    return out


def _bekenstein(p: Pipeline, rec: VerdictRecord) -> None:
    R = np.sqrt(p.outer_area / (4 * np.pi))
    Q, J = p.charge, p.angular_momentum
    Rc = p.circumference / (2 * np.pi)
    masses = {"m_BY": p.m_BY, "m_LY": p.m_LY}
    lam_star = lam_gamma = None
    if not p.spec.rotating:
        gam, lam = p.gamma(), p.lam()
        lam_star = lam * np.sqrt(p.outer_area / p.horizon_area)
        lam_gamma = lam * gam / (1 + gam)
    rep = bekenstein_report(masses, Q, J, R, Rc, p.imcf.alpha2, lam_star, lam_gamma)
    for k, v in rep.items():
        _part(rec, f"Bekenstein {k}", v["lhs"], v["rhs"])
    rec.constants.update(R=_c(R, "area radius of outer"), R_c=_c(Rc, "circumference radius"),
                         Q=_c(Q, "surfaces.charges(outer)"), J=_c(J, "surfaces.angular_momentum(horizon)"))
    rec.hypotheses["axisymmetric"] = "pass"


def verify(theorem: str, cfg: ScenarioConfig, pipeline: Pipeline = None) -> VerdictRecord:
    """Evaluate one theorem on one scenario."""
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem!r}")
    p = Pipeline(cfg) if pipeline is None else pipeline
    rec = VerdictRecord(theorem, cfg.name)
    try:
        if theorem == "BY-charge":
            _by_charge(p, rec)
        elif theorem == "BY-AM":
            _by_am(p, rec)
        elif theorem == "BY-combined":
            _by_combined(p, rec)
        elif theorem in ("LY-Penrose", "LY-Penrose-QJ"):
            _penrose_like(p, rec, p.m_LY, "m_LY", qj=theorem.endswith("QJ"))
        elif theorem in ("WY-Penrose", "WY-Penrose-QJ"):
            wy = p.wang_yau
            _penrose_like(p, rec, wy["m_WY_upper"], "m_WY_upper", qj=theorem.endswith("QJ"))
            rec.constants["optimality_residual"] = _c(wy["optimality_residual"], "masses.wang_yau_mass")
            rec.notes.append("m_WY is the minimum over a finite time-function family: an upper bound")
        elif theorem in ("static-LY", "static-LY-QJ"):
            val, mref = _static_common(p, rec)
            _penrose_like(p, rec, val, "m_LY_static", reference="schwarzschild",
                          qj=theorem.endswith("QJ"), offset=mref)
        elif theorem == "horizon-area":
            _horizon_area(p, rec)
        else:
            _bekenstein(p, rec)
    except StageError as exc:
        rec.error = str(exc)
        rec.parts = []
    return _finish(rec)


def run_scenario(cfg: ScenarioConfig) -> dict:
    """All requested theorems on one scenario, as a report document."""
    p = Pipeline(cfg)
    verdicts = [verify(t, cfg, p) for t in cfg.theorems]
    return {"schema": SCHEMA_VERSION, "scenario": asdict(cfg), "stages": _jsonable(p.stages),
            "verdicts": [_jsonable(v.to_dict()) for v in verdicts], "tolerances": {"margin": cfg.tol}}


def _sweep_point(args):
    base, point = args
    kw = asdict(base)
    kw.update(point)
    kw["name"] = base.name + ":" + ",".join(f"{k}={v}" for k, v in point.items())
    try:
        cfg = ScenarioConfig(**kw)
        return [_jsonable(verify(t, cfg, p).to_dict()) for p in [Pipeline(cfg)] for t in cfg.theorems]
    except (ValueError, RuntimeError) as exc:
        return [{"theorem": None, "scenario": kw["name"], "error": str(exc), "hypotheses_pass": False}]


def run_sweep(base: ScenarioConfig, ranges: dict, threads: int = 1) -> list:
    """Cartesian sweep over parameter ranges; one list of verdicts per point."""
    keys = list(ranges)
    if not keys or any(len(ranges[k]) == 0 for k in keys):
        return []
    points = [dict(zip(keys, vals)) for vals in itertools.product(*(ranges[k] for k in keys))]
    jobs = [(base, pt) for pt in points]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    return [v for row in rows for v in row]


def exit_status(verdicts, tol: float) -> int:
    """0 when every hypothesis-passing verdict has margin >= -tol."""
    for v in verdicts:
        if v.get("hypotheses_pass") and (v.get("margin") is None or v["margin"] < -tol):
            return 1
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dump_report(report, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")


def default_scenarios() -> list:
    """Exact-solution scenarios used by the verdict suite."""
    return [
        ScenarioConfig("Schwarzschild", "schwarzschild", 1.0, 0.0, 0.0, r_outer=8.0,
                       theorems=("BY-charge", "LY-Penrose", "WY-Penrose", "static-LY", "Bekenstein")),
        ScenarioConfig("RN-0.6", "reissner_nordstrom", 1.0, 0.0, 0.6, r_outer=8.0,
                       theorems=("BY-charge", "BY-combined", "LY-Penrose", "LY-Penrose-QJ", "WY-Penrose",
                                 "WY-Penrose-QJ", "static-LY", "static-LY-QJ", "Bekenstein")),
        ScenarioConfig("RN-0.3", "reissner_nordstrom", 1.0, 0.0, 0.3, r_outer=6.0,
                       theorems=("BY-charge", "BY-combined", "LY-Penrose", "LY-Penrose-QJ", "WY-Penrose",
                                 "WY-Penrose-QJ", "static-LY", "static-LY-QJ", "Bekenstein")),
        ScenarioConfig("Kerr-0.6", "kerr", 1.0, 0.6, 0.0, r_outer=6.0, n_radial=120, imcf_n=120,
                       polar_order=24, theorems=("BY-AM", "BY-combined", "Bekenstein")),
        ScenarioConfig("Kerr-0.4", "kerr", 1.0, 0.4, 0.0, r_outer=5.0, n_radial=120, imcf_n=120,
                       polar_order=24, theorems=("BY-AM", "BY-combined", "Bekenstein")),
        ScenarioConfig("xKN", "kerr_newman", 1.0, 0.6, 0.8, r_outer=4.0, n_radial=40, imcf_n=40,
                       polar_order=24, theorems=("horizon-area",)),
    ]
