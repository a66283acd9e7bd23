"""Exact initial data sets from the Kerr-Newman family.

Spherically symmetric slices (Minkowski, Schwarzschild, Reissner-Nordstrom)
are described by the areal radius R(r), the radial metric coefficient
A(r) = g_rr, the extrinsic curvature components k_rr and k_T = k_thth / R^2
and the radial electric field.  The profiles are built symbolically so the
matter densities come out in closed form; a separate finite-difference
routine checks the constraints numerically.

Rotating slices use Boyer-Lindquist coordinates and are exposed through
coordinate spheres r = const.

Conventions: k(X, Y) = <D_X n, Y> for the future unit normal n, so the null
expansions are H +/- Tr_Sigma k.  For rotating data the azimuthal angle is
oriented so that a positive spin parameter gives positive angular momentum.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.optimize import brentq, minimize_scalar

from ._polar import PolarGrid
from .surfaces import AxisymSurfaceData

_FAMILY_ALIASES = {
    "minkowski": "minkowski", "flat": "minkowski",
    "schwarzschild": "schwarzschild",
    "reissner_nordstrom": "reissner_nordstrom", "reissner-nordstrom": "reissner_nordstrom",
    "rn": "reissner_nordstrom",
    "kerr": "kerr",
    "kerr_newman": "kerr_newman", "kerr-newman": "kerr_newman", "kn": "kerr_newman",
}
_SLICING_ALIASES = {
    "static": "static", "areal": "static", "boyer_lindquist": "static", "bl": "static",
    "painleve_gullstrand": "painleve_gullstrand", "pg": "painleve_gullstrand",
    "painleve-gullstrand": "painleve_gullstrand",
    "isotropic": "isotropic",
}
EXTREMAL_TOL = 1e-12


@dataclass(frozen=True)
class SpacetimeSpec:
    """Member of the Kerr-Newman family together with a choice of slicing."""

    family: str
    m: float = 0.0
    a: float = 0.0
    Q: float = 0.0
    slicing: str = "static"

    def __post_init__(self):
        fam = _FAMILY_ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ValueError(f"unknown family {self.family!r}")
        sl = _SLICING_ALIASES.get(str(self.slicing).lower())
        if sl is None:
            raise ValueError(f"unknown slicing {self.slicing!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "slicing", sl)
        m, a, Q = float(self.m), float(self.a), float(self.Q)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "Q", Q)
        if m < 0:
            raise ValueError("mass must be nonnegative")
        if fam == "minkowski" and (m or a or Q):
            raise ValueError("Minkowski data has m = a = Q = 0")
        if fam == "schwarzschild" and (a or Q):
            raise ValueError("Schwarzschild data has a = Q = 0")
        if fam == "reissner_nordstrom" and a:
            raise ValueError("Reissner-Nordstrom data has a = 0")
        if fam == "kerr" and Q:
            raise ValueError("Kerr data has Q = 0")
        if m * m - a * a - Q * Q < -EXTREMAL_TOL:
            raise ValueError("parameters describe a naked singularity (m^2 < a^2 + Q^2)")
        if self.rotating and sl != "static":
            raise ValueError("rotating data is only available in Boyer-Lindquist slicing")
        if sl == "painleve_gullstrand" and Q and m == 0:
            raise ValueError("charged Painleve-Gullstrand data needs m > 0")
        if sl == "isotropic" and self.extreme and m > 0:
            raise ValueError("isotropic slicing of an extreme black hole has no horizon sphere")

    @classmethod
    def from_mapping(cls, d: dict) -> "SpacetimeSpec":
        return cls(family=d.get("family", "schwarzschild"), m=float(d.get("m", 0.0)),
                   a=float(d.get("a", 0.0)), Q=float(d.get("Q", 0.0)),
                   slicing=d.get("slicing", "static"))

    @property
    def rotating(self) -> bool:
        return self.family in ("kerr", "kerr_newman")

    @property
    def extreme(self) -> bool:
        return self.m > 0 and abs(self.m**2 - self.a**2 - self.Q**2) < EXTREMAL_TOL

    @property
    def r_plus(self) -> float:
        """Outer horizon in Boyer-Lindquist / areal coordinates."""
        return self.m + np.sqrt(max(0.0, self.m**2 - self.a**2 - self.Q**2))

    @property
    def horizon_coordinate(self) -> float:
        """Horizon location in the radial coordinate of the chosen slicing."""
        if self.m == 0:
            return 0.0
        if self.slicing == "isotropic":
            return np.sqrt(self.m**2 - self.Q**2) / 2.0
        return self.r_plus


# ---------------------------------------------------------------- spherical

_r, _m, _Q = sp.symbols("r m Q", positive=True)


@lru_cache(maxsize=None)
def spherical_symbolic(slicing: str) -> dict:
    """Symbolic profiles in (r, m, Q) for a spherically symmetric slicing."""
    r, m, Q = _r, _m, _Q
    if slicing == "static":
        R = r
        Ainv = 1 - 2 * m / r + Q**2 / r**2
        v = sp.Integer(0)
    elif slicing == "painleve_gullstrand":
        R = r
        Ainv = sp.Integer(1)
        v = sp.sqrt(2 * m / r - Q**2 / r**2)
    elif slicing == "isotropic":
        R = r * (1 + (m + Q) / (2 * r)) * (1 + (m - Q) / (2 * r))
        Ainv = (r / R) ** 2
        v = sp.Integer(0)
    else:
        raise ValueError(f"unknown slicing {slicing!r}")
    # k = -(D beta + D beta)/(2 lapse) with unit lapse and radial shift v
    krr = -sp.diff(v, r)
    kT = -v * Ainv * sp.diff(R, r) / R
    E = Q / R**2
    sq = sp.sqrt(Ainv)
    dR = sp.diff(R, r)
    Rs = dR * sq
    Rss = sq * sp.diff(Rs, r)
    Rscal = 2 * (1 - Rs**2) / R**2 - 4 * Rss / R
    knn = krr * Ainv
    trk = knn + 2 * kT
    normk2 = knn**2 + 2 * kT**2
    mu = sp.simplify((Rscal + trk**2 - normk2) / (16 * sp.pi))
    H = 2 * Rs / R
    Jnu = sp.simplify((-2 * sq * sp.diff(kT, r) + H * (knn - kT)) / (8 * sp.pi))
    return {"R": R, "Ainv": sp.simplify(Ainv), "krr": krr, "kT": sp.simplify(kT), "E": E,
            "mu": mu, "J": Jnu, "H": H, "Rscal": Rscal}


@lru_cache(maxsize=None)
def _spherical_numeric(slicing: str) -> dict:
    ex = spherical_symbolic(slicing)
    args = (_r, _m, _Q)
    out = {}
    for k in ("R", "Ainv", "krr", "kT", "E", "mu", "J", "H", "Rscal"):
        out[k] = sp.lambdify(args, ex[k], "numpy")
    out["dR"] = sp.lambdify(args, sp.diff(ex["R"], _r), "numpy")
    out["thetaplus"] = sp.lambdify(args, ex["H"] + 2 * ex["kT"], "numpy")
    out["thetaminus"] = sp.lambdify(args, ex["H"] - 2 * ex["kT"], "numpy")
    return out


def _vec(f, r, m, Q):
    return np.broadcast_to(np.asarray(f(r, m, Q), dtype=float), np.shape(r)).astype(float)


@dataclass
class RadialInitialData:
    """Spherically symmetric initial data sampled on a radial grid.

    A is stored through its reciprocal Ainv so horizons of static slices,
    where g_rr diverges, are representable.
    """

    spec: SpacetimeSpec
    r: np.ndarray
    R: np.ndarray
    dR: np.ndarray
    Ainv: np.ndarray
    krr: np.ndarray
    kT: np.ndarray
    E: np.ndarray
    mu: np.ndarray
    J: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def A(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.Ainv

    def profile(self, name: str, r):
        """Evaluate a closed-form profile at arbitrary radii."""
        f = _spherical_numeric(self.spec.slicing)[name]
        return _vec(f, np.asarray(r, dtype=float), self.spec.m, self.spec.Q)

    @property
    def mu_em(self) -> np.ndarray:
        return self.mu - self.E**2 / (8.0 * np.pi)


@dataclass
class RotatingInitialData:
    """Boyer-Lindquist slice of Kerr-Newman, exposed through coordinate spheres."""

    spec: SpacetimeSpec
    r: np.ndarray
    polar_order: int = 64
    meta: dict = field(default_factory=dict)


def radial_grid(r_min: float, r_max: float, n: int, kind: str = "log") -> np.ndarray:
    if not (0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    if n < 3:
        raise ValueError("need at least 3 radial points")
    if kind == "log":
        return np.geomspace(r_min, r_max, n)
    if kind == "linear":
        return np.linspace(r_min, r_max, n)
    raise ValueError("grid must be 'log' or 'linear'")


def build_radial_data(spec: SpacetimeSpec, r_min=None, r_max: float = 32.0, n: int = 400,
                       grid: str = "log", polar_order: int = 64):
    """Sample an exact slice on [r_min, r_max]; r_min defaults to the horizon."""
    if r_min is None:
        r_min = spec.horizon_coordinate
        if r_min == 0.0:
            r_min = 1e-3 * r_max
    if r_min < spec.horizon_coordinate * (1 - 1e-14):
        raise ValueError("r_min lies inside the horizon")
    r = radial_grid(r_min, r_max, n, grid)
    if spec.rotating:
        return RotatingInitialData(spec, r, polar_order)
    f = _spherical_numeric(spec.slicing)
    m, Q = spec.m, spec.Q
    vals = {k: _vec(f[k], r, m, Q) for k in ("R", "dR", "Ainv", "krr", "kT", "E", "mu", "J")}
    if spec.m > 0 and spec.slicing == "static" and abs(r[0] - spec.r_plus) < 1e-14 * r[0]:
        vals["Ainv"][0] = 0.0
    return RadialInitialData(spec, r, **vals)


def constraint_residuals(data: RadialInitialData) -> dict:
    """Recompute mu and J(nu) by second-order finite differences.

    Uses only the sampled R, Ainv, k_rr and k_T; the returned maxima compare
    against the closed-form densities and shrink like h^2 under refinement.
    """
    r = data.r
    ok = data.Ainv > 0
    r, R, Ainv, krr, kT = r[ok], data.R[ok], data.Ainv[ok], data.krr[ok], data.kT[ok]
    sq = np.sqrt(Ainv)
    dR = np.gradient(R, r, edge_order=2)
    Rs = dR * sq
    Rss = sq * np.gradient(Rs, r, edge_order=2)
    Rscal = 2 * (1 - Rs**2) / R**2 - 4 * Rss / R
    knn = krr * Ainv
    trk = knn + 2 * kT
    mu = (Rscal + trk**2 - knn**2 - 2 * kT**2) / (16 * np.pi)
    H = 2 * Rs / R
    J = (-2 * sq * np.gradient(kT, r, edge_order=2) + H * (knn - kT)) / (8 * np.pi)
    sl = slice(2, -2)
    return {"mu": float(np.max(np.abs(mu - data.mu[ok])[sl])),
            "J": float(np.max(np.abs(J - data.J[ok])[sl]))}


# ---------------------------------------------------------------- rotating

_t, _rr, _th, _ph, _M, _a, _q = sp.symbols("t r theta phi m a Q", real=True)


@lru_cache(maxsize=None)
def _kn_numeric() -> dict:
    """Lambdified Boyer-Lindquist surface quantities of Kerr-Newman."""
    r, th, m, Q = _rr, _th, _M, _q
    a = -_a  # orientation: positive spin gives positive angular momentum
    s, c = sp.sin(th), sp.cos(th)
    rho2 = r**2 + a**2 * c**2
    rho = sp.sqrt(rho2)
    Delta = r**2 - 2 * m * r + a**2 + Q**2
    sqD = sp.sqrt(Delta)
    Sig2 = (r**2 + a**2) ** 2 - a**2 * Delta * s**2
    Sig = sp.sqrt(Sig2)
    gtt = -(Delta - a**2 * s**2) / rho2
    gtp = -a * s**2 * (r**2 + a**2 - Delta) / rho2
    gpp = Sig2 * s**2 / rho2
    omega = -gtp / gpp
    lapse = rho * sqD / Sig
    sqrt_grr = rho / sqD
    nu_r = 1 / sqrt_grr
    nu_over_lapse = Sig / rho2
    coords = (_t, r, th, _ph)

    # extrinsic curvature from the 3+1 split: k_ij = -(D_i beta_j + D_j beta_i)/(2 lapse)
    g3 = sp.diag(rho2 / Delta, rho2, gpp)
    x3 = (r, th, _ph)
    beta = [0, 0, gtp]

    def chris3_lower(l, i, j):
        return (sp.diff(g3[l, i], x3[j]) + sp.diff(g3[l, j], x3[i]) - sp.diff(g3[i, j], x3[l])) / 2

    g3inv = sp.diag(Delta / rho2, 1 / rho2, 1 / gpp)

    def Dbeta(i, j):
        val = sp.diff(beta[j], x3[i])
        for l in range(3):
            val -= sum(g3inv[l, q] * chris3_lower(q, i, j) for q in range(3)) * beta[l]
        return val

    def k3(i, j):
        return -(Dbeta(i, j) + Dbeta(j, i)) / (2 * lapse)

    p_phi = -(Dbeta(0, 2) + Dbeta(2, 0)) / 2 * nu_over_lapse
    p_theta = -(Dbeta(0, 1) + Dbeta(1, 0)) / 2 * nu_over_lapse
    trk = k3(1, 1) / rho2 + k3(2, 2) / gpp
    H = nu_r * sp.diff(sp.log(rho2 * gpp) / 2, r)

    # Komar density -<grad_nu eta, n> from the spacetime connection
    g4 = sp.Matrix([[gtt, 0, 0, gtp], [0, rho2 / Delta, 0, 0], [0, 0, rho2, 0], [gtp, 0, 0, gpp]])

    def chris4_lower(l, i, j):
        return (sp.diff(g4[l, i], coords[j]) + sp.diff(g4[l, j], coords[i]) - sp.diff(g4[i, j], coords[l])) / 2

    def grad_eta(i, j):  # nabla_i eta_j with eta = d/dphi
        return sp.diff(g4[j, 3], coords[i]) - chris4_lower(3, i, j)

    # n = (d_t + omega d_phi) / lapse; the factor nu^r / lapse is regular on the horizon
    komar = -nu_over_lapse * (grad_eta(1, 0) + omega * grad_eta(1, 3))

    # electromagnetic field of the potential A = -(Q r / rho^2)(dt - a sin^2 dphi)
    At = -Q * r / rho2
    Aphi = Q * r * a * s**2 / rho2
    E_nu = nu_over_lapse * (sp.diff(At, r) + omega * sp.diff(Aphi, r))
    E_th = (sp.diff(At, th) + omega * sp.diff(Aphi, th)) / (lapse * rho)
    B_nu = sp.diff(Aphi, th) / (rho * sp.sqrt(gpp))
    B_th = -sp.diff(Aphi, r) * sqD / (rho * sp.sqrt(gpp))
    # field momentum along eta: (E x B)(eta) / 4 pi in an orthonormal frame
    J_eta = (E_nu * B_th - E_th * B_nu) * sp.sqrt(gpp) / (4 * sp.pi)
    mu_field = (E_nu**2 + E_th**2 + B_nu**2 + B_th**2) / (8 * sp.pi)

    k_norm2 = 2 * (k3(0, 2) ** 2 * Delta / rho2 + k3(1, 2) ** 2 / rho2) / gpp

    args = (r, th, m, _a, Q)
    exprs = {"k_norm2": k_norm2, "a": rho, "b": sp.sqrt(gpp), "H": H, "trk": trk, "p_phi": p_phi, "p_theta": p_theta,
             "komar": komar, "E_nu": E_nu, "B_nu": B_nu, "A_phi": Aphi, "Delta": Delta,
             "lapse2": -(gtt - gtp**2 / gpp), "J_eta": J_eta, "mu": mu_field,
             "omega": omega}
    return {k: sp.lambdify(args, v, "numpy") for k, v in exprs.items()}


def _kn_eval(name, r, theta, spec):
    f = _kn_numeric()[name]
    return np.broadcast_to(np.asarray(f(r, theta, spec.m, spec.a, spec.Q), dtype=float),
                           np.broadcast(r, theta).shape).astype(float)


def kn_quantity(spec: SpacetimeSpec, name: str, r, theta):
    """Evaluate a Boyer-Lindquist field (for tests and diagnostics)."""
    return _kn_eval(name, r, theta, spec)


# ---------------------------------------------------------------- surfaces

def extract_surface(data, r0: float, polar_order: int = None) -> AxisymSurfaceData:
    """Coordinate sphere r = r0 of an exact slice as surface data."""
    spec = data.spec if hasattr(data, "spec") else data
    if hasattr(data, "r") and not (data.r[0] * (1 - 1e-12) <= r0 <= data.r[-1] * (1 + 1e-12)):
        raise ValueError("r0 lies outside the sampled radial range")
    if r0 < spec.horizon_coordinate * (1 - 1e-12):
        raise ValueError("r0 lies inside the horizon")
    order = polar_order or getattr(data, "polar_order", 64)
    g = PolarGrid(order)
    meta = {"family": spec.family, "slicing": spec.slicing, "m": spec.m, "a": spec.a,
            "Q": spec.Q, "r": float(r0)}
    if spec.rotating:
        th = g.theta
        r0v = max(r0, spec.r_plus)
        vals = {k: _kn_eval(k, r0v, th, spec) for k in
                ("a", "b", "H", "trk", "p_phi", "p_theta", "komar", "E_nu", "B_nu", "A_phi")}
        if abs(r0v - spec.r_plus) < 1e-12 * r0v:
            vals["H"] = np.zeros_like(th)
        return AxisymSurfaceData(g, a=vals["a"], b=vals["b"], H=vals["H"], trk=vals["trk"],
                                 p_theta=vals["p_theta"], p_phi=vals["p_phi"],
                                 E_nu=vals["E_nu"], B_nu=vals["B_nu"], A_phi=vals["A_phi"],
                                 komar=vals["komar"], meta=meta)
    f = _spherical_numeric(spec.slicing)
    m, Q = spec.m, spec.Q
    R = float(f["R"](r0, m, Q))
    Ainv = float(f["Ainv"](r0, m, Q))
    H = float(f["H"](r0, m, Q)) if Ainv > 0 else 0.0
    kT = float(f["kT"](r0, m, Q))
    E = float(f["E"](r0, m, Q))
    return AxisymSurfaceData(g, a=np.full(order, R), b=R * g.sin, H=H, trk=2 * kT,
                             E_nu=E, komar=np.zeros(order), meta=meta)


def coordinate_sphere_area(spec: SpacetimeSpec, r0: float, polar_order: int = 64) -> float:
    s = extract_surface(spec, r0, polar_order)
    return s.integrate(1.0)


# ---------------------------------------------------------------- horizons

def _outermost_root(f, lo: float, hi: float, samples: int = 400) -> float:
    xs = np.geomspace(lo, hi, samples) if lo > 0 else np.linspace(lo, hi, samples)
    vals = np.array([f(x) for x in xs])
    for i in range(samples - 1, 0, -1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i - 1]) and vals[i - 1] * vals[i] <= 0:
            if vals[i - 1] == 0:
                return float(xs[i - 1])
            return float(brentq(f, xs[i - 1], xs[i], xtol=1e-15, rtol=1e-15))
    res = minimize_scalar(lambda x: abs(f(x)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    if abs(f(res.x)) < 1e-6:
        return float(res.x)
    raise ValueError("no marginally outer trapped sphere found in the search range")


def horizon_locate(data, r_hi: float = None) -> dict:
    """Outermost coordinate sphere with vanishing outer null expansion."""
    spec = data.spec if hasattr(data, "spec") else data
    if spec.m == 0:
        raise ValueError("flat data has no horizon")
    hi = r_hi or (8.0 * spec.m + 1.0)
    if spec.rotating:
        def theta_plus(x):
            d = spec_delta(spec, x)
            return np.sign(d) * np.sqrt(abs(d))
        lo = 0.5 * spec.m
    else:
        f = _spherical_numeric(spec.slicing)

        def theta_plus(x):
            ainv = float(f["Ainv"](x, spec.m, spec.Q))
            R = float(f["R"](x, spec.m, spec.Q))
            dR = float(f["dR"](x, spec.m, spec.Q))
            kT = float(f["kT"](x, spec.m, spec.Q)) if spec.slicing == "painleve_gullstrand" else 0.0
            return 2 * dR * np.sign(ainv) * np.sqrt(abs(ainv)) / R + 2 * kT
        lo = spec.horizon_coordinate * 0.25 if spec.slicing != "painleve_gullstrand" else 0.5 * spec.m
    if spec.extreme:
        rh = spec.horizon_coordinate
        if abs(theta_plus(rh)) > 1e-6:
            raise ValueError("extreme horizon check failed")
    else:
        rh = _outermost_root(theta_plus, lo, hi)
    area = coordinate_sphere_area(spec, rh) if spec.rotating else \
        4 * np.pi * float(_spherical_numeric(spec.slicing)["R"](rh, spec.m, spec.Q)) ** 2
    return {"r": rh, "area": area}


def spec_delta(spec: SpacetimeSpec, r):
    return r * r - 2 * spec.m * r + spec.a**2 + spec.Q**2


# ---------------------------------------------------------------- energy

def energy_condition_report(data, tol: float = 1e-10) -> dict:
    """Dominant energy conditions and related structural flags of a slice."""
    spec = data.spec
    if spec.rotating:
        g = PolarGrid(data.polar_order)
        # field components along theta are 0/0 on the horizon itself
        rs = np.maximum(data.r, spec.r_plus * (1 + 1e-7))
        rr, th = np.meshgrid(rs, g.theta, indexing="ij")
        mu = _kn_eval("mu", rr, th, spec)
        Jeta = _kn_eval("J_eta", rr, th, spec)
        J = np.abs(Jeta) / np.maximum(_kn_eval("b", rr, th, spec), 1e-300)
        dec = mu - J
        horizon = dec[0]
        rep = {"mu_minus_J_min": float(dec.min()), "mu_em_minus_J_em_min": 0.0,
               "dec": bool(dec.min() >= -tol), "charged_dec": True,
               "horizon_mu_minus_J": float(horizon.min()),
               "strict_dec_on_horizon": bool(horizon.min() > tol),
               "strict_dec_em_on_horizon": False,
               "J_eta_max": float(np.max(np.abs(Jeta))),
               "J_eta_zero": bool(np.max(np.abs(Jeta)) <= tol),
               "maximal": True, "time_symmetric": spec.a == 0,
               "vacuum": spec.Q == 0, "electrovac": True}
        return _with_aliases(rep)
    dec = data.mu - np.abs(data.J)
    dec_em = data.mu_em - np.abs(data.J)
    trk = data.krr * data.Ainv + 2 * data.kT
    at_horizon = spec.m > 0 and abs(data.r[0] - spec.horizon_coordinate) < 1e-9 * data.r[0]
    return _with_aliases({"mu_minus_J_min": float(dec.min()), "mu_em_minus_J_em_min": float(dec_em.min()),
            "dec": bool(dec.min() >= -tol), "charged_dec": bool(dec_em.min() >= -tol),
            "horizon_mu_minus_J": float(dec[0]) if at_horizon else None,
            "strict_dec_on_horizon": bool(at_horizon and dec[0] > tol),
            "strict_dec_em_on_horizon": bool(at_horizon and dec_em[0] > tol),
            "J_eta_max": 0.0, "J_eta_zero": True,
            "maximal": bool(np.max(np.abs(trk)) <= tol),
            "time_symmetric": bool(np.max(np.abs(data.krr)) + np.max(np.abs(data.kT)) <= tol),
            "vacuum": spec.Q == 0, "electrovac": True})


def _with_aliases(rep: dict) -> dict:
    rep["dec_ok"] = rep["dec"]
    rep["dec_em_ok"] = rep["charged_dec"]
    rep["strict_on_horizon"] = rep["strict_dec_on_horizon"]
    rep["strict_em_on_horizon"] = rep["strict_dec_em_on_horizon"]
    return rep
