"""Jang equation for spherically symmetric initial data.

For f = f(r) the Jang equation reduces to a first-order ODE for
W = f_s / sqrt(1 + f_s^2), where s is g-arclength:

    W' = (k_rr / sqrt(A)) (1 - W^2) + 2 sqrt(A) k_T - (2 R' / R) W.

A solution blowing up at a future apparent horizon has W -> -1 there, and
the graph is asymptotic to a cylinder over the horizon.  Near the horizon
the unknown is carried as delta = 1 + W so that 1 - W^2 = delta (2 - delta)
stays accurate.

All deformed quantities (metric, second fundamental form h, the 1-forms w
and X, scalar curvature, deformed electric field) are closed-form
functions of (r, delta, delta', delta''), with delta' given by the ODE and
delta'' by its derivative.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import csv

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly
from scipy.optimize import brentq

from .exact_slices import RadialInitialData, spherical_symbolic, _r, _m, _Q

_d0, _d1, _d2 = sp.symbols("d0 d1 d2", real=True)
FOUR_PI = 4.0 * np.pi


def _regular_profiles(slicing: str) -> tuple:
    """Horizon location and profiles written so nothing cancels near it.

    Returns (r_h, R, R', A^-1, theta_+ sqrt(A)) as expressions in (r, m, Q).
    """
    r, m, Q = _r, _m, _Q
    ex = spherical_symbolic(slicing)
    root = sp.sqrt(m**2 - Q**2)
    rp, rm = m + root, m - root
    R = ex["R"]
    if slicing == "static":
        Ainv = (r - rp) * (r - rm) / r**2
        dR = sp.Integer(1)
        tp = 2 / r
        rh = rp
    elif slicing == "painleve_gullstrand":
        Ainv = sp.Integer(1)
        dR = sp.Integer(1)
        v = sp.sqrt(2 * m / r - Q**2 / r**2)
        # 2 (1 - v) / r with 1 - v = (1 - v^2) / (1 + v)
        tp = 2 * (r - rp) * (r - rm) / (r**3 * (1 + v))
        rh = rp
    else:
        rh = root / 2
        dR = (r - rh) * (r + rh) / r**2
        Ainv = ex["Ainv"]
        tp = 2 * dR / R
    return rh, R, dR, Ainv, tp


@lru_cache(maxsize=None)
def _jang_functions(slicing: str) -> dict:
    """Lambdified Jang quantities in (x, m, Q, delta, delta', delta'') with r = r_h + x."""
    ex = spherical_symbolic(slicing)
    r, d0, d1, d2 = _r, _d0, _d1, _d2
    rh, R, dR, Ainv, tp = _regular_profiles(slicing)
    krr, kT, E, mu, J = ex["krr"], ex["kT"], ex["E"], ex["mu"], ex["J"]
    W = d0 - 1
    omw = d0 * (2 - d0)
    sqAinv = sp.sqrt(Ainv)
    F = krr * sqAinv * omw + tp - 2 * dR / R * d0
    dF = sp.diff(F, r) + sp.diff(F, d0) * d1

    def total(expr):
        return sp.diff(expr, r) + sp.diff(expr, d0) * d1 + sp.diff(expr, d1) * d2

    inv_sAbar = sqAinv * sp.sqrt(d0) * sp.sqrt(2 - d0)
    hnn = d1 * sqAinv
    hT = dR * sqAinv * W / R
    knn_bar = krr * Ainv * omw
    # X(nu_bar) = W (h - k)(nu_bar, nu_bar) / sqrt(1 - W^2)
    XN = W * (d1 * sqAinv / (sp.sqrt(d0) * sp.sqrt(2 - d0)) - krr * Ainv * sp.sqrt(d0) * sp.sqrt(2 - d0))
    divX = inv_sAbar / R**2 * total(R**2 * XN)
    Rsb = dR * inv_sAbar
    Rbar = 2 * (1 - Rsb**2) / R**2 - 4 * inv_sAbar * total(Rsb) / R
    normhk2 = (hnn - knn_bar) ** 2 + 2 * (hT - kT) ** 2
    Jw = J * W
    fprime = W / (sqAinv * sp.sqrt(d0) * sp.sqrt(2 - d0))
    exprs = {"F": F, "dF": dF, "inv_sAbar": inv_sAbar, "hnn": hnn, "hT": hT, "knn_bar": knn_bar,
             "XN": XN, "divX": divX, "Rbar": Rbar, "normhk2": normhk2, "Jw": Jw, "mu": mu,
             "J": J, "E": E, "R": R, "dR": dR, "Ainv": Ainv, "krr": krr, "kT": kT,
             "fprime": fprime, "Hbar": 2 * Rsb / R}
    x = sp.Symbol("x", positive=True)
    args = (x, _m, _Q, d0, d1, d2)
    out = {k: sp.lambdify(args, v.subs(r, rh + x), "numpy") for k, v in exprs.items()}
    out["rh"] = sp.lambdify((_m, _Q), rh, "numpy")
    return out


def _ev(fns, name, r, m, Q, d0, d1=0.0, d2=0.0):
    out = fns[name](r, m, Q, d0, d1, d2)
    return np.broadcast_to(np.asarray(out, dtype=float), np.shape(r)).astype(float)


@dataclass
class JangSolution:
    """Radial Jang solution with its deformed data sampled on a grid.

    delta = 1 + W.  Abar = A / (1 - W^2) is the radial coefficient of
    g_bar = g + df^2.  sbar is g_bar-arclength measured inward from the
    outer boundary.  hnn, hT and knn are components in a g_bar-orthonormal
    frame; XN = X(nu_bar); Ebar = |E_bar|_{g_bar}.
    """

    data: RadialInitialData
    r: np.ndarray
    x: np.ndarray
    delta: np.ndarray
    ddelta: np.ndarray
    d2delta: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    blowup: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        fns = _jang_functions(self.data.spec.slicing)
        m, Q = self.data.spec.m, self.data.spec.Q
        args = (self.x, m, Q, self.delta, self.ddelta, self.d2delta)
        for name in ("inv_sAbar", "hnn", "hT", "knn_bar", "XN", "divX", "Rbar", "normhk2",
                     "Jw", "mu", "R", "dR", "E", "kT", "Hbar"):
            setattr(self, name, _ev(fns, name, *args))
        self.W = self.delta - 1.0
        self.sqrt_Abar = 1.0 / self.inv_sAbar
        self.Abar = self.sqrt_Abar**2
        self.Ebar = np.abs(self.E)
        self.kbar2 = self.normhk2
        self.X2 = self.XN**2
        # g_bar arclength from the outer boundary, integrated in log(x)
        integrand = self.sqrt_Abar * self.x
        t = np.log(self.x)
        seg = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.sbar = cum[-1] - cum

    def ode_residual(self) -> float:
        """Max ODE residual at interval midpoints of the quintic Hermite interpolant.

        The interpolant matches delta, delta' and delta'' at the nodes; its
        derivative at the midpoints is compared with the right-hand side of
        the ODE, relative to the size of delta'.
        """
        fns = _jang_functions(self.data.spec.slicing)
        y = np.column_stack([self.delta, self.ddelta, self.d2delta])
        poly = BPoly.from_derivatives(self.x, y)
        xm = 0.5 * (self.x[1:] + self.x[:-1])
        dm = poly(xm)
        lhs = poly.derivative()(xm)
        rhs = _ev(fns, "F", xm, self.data.spec.m, self.data.spec.Q, dm)
        scale = np.maximum(np.abs(rhs), np.abs(self.ddelta).max() * 1e-3)
        return float(np.max(np.abs(lhs - rhs) / scale))

    @property
    def W_outer(self) -> float:
        return float(self.W[-1])

    def identity_residual(self) -> np.ndarray:
        """R_bar - [16 pi (mu - J(w)) + |h - k|^2 + 2|X|^2 - 2 div X] at every node."""
        rhs = 16 * np.pi * (self.mu - self.Jw) + self.normhk2 + 2 * self.X2 - 2 * self.divX
        return self.Rbar - rhs

    def energy_slack(self) -> np.ndarray:
        """R_bar - 2|X|^2 + 2 div X - 2|E_bar|^2 - |k_bar|^2, nonnegative under charged DEC."""
        return self.Rbar - 2 * self.X2 + 2 * self.divX - 2 * self.Ebar**2 - self.kbar2

    def conformal_coefficient(self) -> np.ndarray:
        """R_bar - 2|E_bar|^2 - |k_bar|^2."""
        return self.Rbar - 2 * self.Ebar**2 - self.kbar2


def _blowup_solution(data: RadialInitialData, tau_outer: float, n: int, x_min_rel: float):
    spec = data.spec
    m, Q = spec.m, spec.Q
    fns = _jang_functions(spec.slicing)
    rh = float(fns["rh"](m, Q))
    r_out = float(data.r[-1])
    x_min = x_min_rel * rh
    # Taylor start: delta(rh) = 0, delta' = F(rh, 0), delta'' = dF(rh, 0, delta')
    d1h = float(_ev(fns, "F", 0.0, m, Q, 0.0))
    d2h = float(_ev(fns, "dF", 0.0, m, Q, 0.0, d1h))
    delta0 = d1h * x_min + 0.5 * d2h * x_min**2
    if delta0 <= 0:
        raise ValueError("no blow-up solution: the outer null expansion does not vanish at the inner boundary")

    def rhs(t, y):
        x = np.exp(t)
        F = float(_ev(fns, "F", x, m, Q, y[0]))
        fp = float(_ev(fns, "fprime", x, m, Q, y[0]))
        return [x * F, x * fp]

    t_grid = np.linspace(np.log(x_min), np.log(r_out - rh), n)
    fp0 = float(_ev(fns, "fprime", x_min, m, Q, delta0))
    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), [delta0, 0.0], t_eval=t_grid, method="DOP853",
                    rtol=1e-13, atol=[1e-30, 1e-13], first_step=1e-4)
    if not sol.success:
        raise RuntimeError("Jang integration failed: " + sol.message)
    x = np.exp(t_grid)
    x[-1] = r_out - rh
    r = rh + x
    r[-1] = r_out
    delta = sol.y[0]
    if np.any(delta <= 0) or np.any(delta >= 2):
        raise RuntimeError("Jang solution left the admissible range |W| < 1")
    f = sol.y[1] - sol.y[1][-1] + tau_outer
    d1 = _ev(fns, "F", x, m, Q, delta)
    d2 = _ev(fns, "dF", x, m, Q, delta, d1)
    fprime = _ev(fns, "fprime", x, m, Q, delta)
    meta = {"x_min": x_min, "fprime_start": fp0, "horizon": rh}
    return r, x, delta, d1, d2, f, fprime, meta


def _dirichlet_solution(data: RadialInitialData, tau_outer: float, tau_inner, W_inner: float):
    spec = data.spec
    m, Q = spec.m, spec.Q
    fns = _jang_functions(spec.slicing)
    r = data.r
    rh = float(fns["rh"](m, Q))
    if np.any(data.Ainv[0] <= 0) or r[0] <= rh:
        raise ValueError("Dirichlet Jang problem needs a regular inner boundary")

    def shoot(W0, dense=False):
        def rhs(rr, y):
            d = y[0] + 1.0
            if not (0.0 < d < 2.0):
                return [0.0, 0.0]
            x = rr - rh
            return [float(_ev(fns, "F", x, m, Q, d)), float(_ev(fns, "fprime", x, m, Q, d))]

        def hit(x, y):
            return 1.0 - abs(y[0]) - 1e-12
        hit.terminal = True
        sol = solve_ivp(rhs, (r[0], r[-1]), [W0, 0.0], t_eval=r if dense else None,
                        method="DOP853", rtol=1e-12, atol=1e-14, events=hit)
        return sol

    def mismatch(W0):
        sol = shoot(W0)
        if sol.status == 1:
            return np.sign(sol.y_events[0][0][0]) * 1e6
        return sol.y[1][-1] - (tau_outer - tau_inner)

    if tau_inner is None:
        if not -1.0 < W_inner < 1.0:
            raise ValueError("inner slope W must lie in (-1, 1)")
        W0 = float(W_inner)
    elif mismatch(0.0) == 0.0:
        W0 = 0.0
    else:
        lo, hi = -1 + 1e-9, 1 - 1e-9
        m_lo, m_hi = mismatch(lo), mismatch(hi)
        if m_lo * m_hi > 0:
            raise ValueError("two-sided Dirichlet data out of reach: the height difference must lie in "
                             f"({m_lo + tau_outer - tau_inner:.6g}, {m_hi + tau_outer - tau_inner:.6g})")
        W0 = brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    sol = shoot(W0, dense=True)
    if sol.status != 0 or len(sol.t) != len(r):
        raise RuntimeError("Jang shooting did not converge")
    delta = sol.y[0] + 1.0
    f = sol.y[1] - sol.y[1][-1] + tau_outer
    x = r - rh
    d1 = _ev(fns, "F", x, m, Q, delta)
    d2 = _ev(fns, "dF", x, m, Q, delta, d1)
    fprime = _ev(fns, "fprime", x, m, Q, delta)
    meta = {"W_inner": float(W0), "horizon": rh}
    return r.copy(), x, delta, d1, d2, f, fprime, meta


def solve_jang_radial(data: RadialInitialData, tau_outer: float = 0.0, blowup_at_horizon: bool = False,
                      tau_inner: float = None, W_inner: float = 0.0, n: int = 600,
                      x_min_rel: float = 1e-9) -> JangSolution:
    """Solve the radial Jang equation on the sampled slice.

    f always equals tau_outer on the outer sphere.  Without blow-up the
    inner condition is the slope W = W_inner at the inner sphere (default
    0, a horizontal graph), or, if tau_inner is given, the height f =
    tau_inner found by shooting on W_inner.  With blow-up,
    W = -1 at the outermost apparent horizon and the ODE is integrated
    outward from there on a grid geometric in r - r_h, starting at
    r_h + x_min_rel * r_h.
    """
    spec = data.spec
    if spec.rotating:
        raise ValueError("the Jang solver handles spherically symmetric data only")
    out_sphere = (data.profile("H", data.r[-1]), 2 * data.profile("kT", data.r[-1]))
    if out_sphere[0] - abs(out_sphere[1]) <= 0:
        raise ValueError("outer boundary is trapped")
    if blowup_at_horizon:
        if spec.m == 0:
            raise ValueError("flat data has no horizon to blow up at")
        parts = _blowup_solution(data, tau_outer, n, x_min_rel)
    else:
        parts = _dirichlet_solution(data, tau_outer, tau_inner, W_inner)
    r, x, delta, d1, d2, f, fprime, meta = parts
    sol = JangSolution(data, r, x, delta, d1, d2, f, fprime, blowup_at_horizon, meta)
    if blowup_at_horizon:
        sol.meta.update(cylinder_report(sol))
    return sol


def ode_residual(data: RadialInitialData, r: np.ndarray, fprime: np.ndarray) -> np.ndarray:
    """Residual of the radial Jang ODE for a candidate slope f'(r).

    W' is taken by second-order finite differences on r, so the residual of
    an exact solution is at the level of the truncation error.
    """
    r = np.asarray(r, dtype=float)
    fprime = np.asarray(fprime, dtype=float)
    A = 1.0 / data.profile("Ainv", r)
    fs = fprime / np.sqrt(A)
    W = fs / np.sqrt(1.0 + fs**2)
    dW = np.gradient(W, r, edge_order=2)
    R = data.profile("R", r)
    rhs = (data.profile("krr", r) / np.sqrt(A)) * (1 - W**2) + 2 * np.sqrt(A) * data.profile("kT", r) \
        - 2 * data.profile("dR", r) / R * W
    return dW - rhs


def cylinder_report(sol: JangSolution) -> dict:
    """Asymptotics of the cylindrical end: cross-section area and log rate."""
    x = sol.x[:3]
    # sqrt(Abar) ~ c / x on a cylindrical end, so x sqrt(Abar) tends to a constant
    c = x * sol.sqrt_Abar[:3]
    return {"cross_section_area": float(4 * np.pi * sol.R[0] ** 2),
            "log_rate": float(c[0]), "log_rate_drift": float(abs(c[1] - c[0]) / abs(c[0]))}


def blowup_sequence(data: RadialInitialData, tau_outer: float = 0.0, n: int = 600,
                    starts=(1e-7, 1e-8, 1e-9)) -> dict:
    """Re-solve with shrinking inner offsets and report the drift of boundary data."""
    vals = []
    for x in starts:
        s = solve_jang_radial(data, tau_outer, True, n=n, x_min_rel=x)
        vals.append((s.W_outer, float(s.Hbar[-1] - s.XN[-1])))
    W = np.array([v[0] for v in vals])
    B = np.array([v[1] for v in vals])
    return {"starts": list(starts), "W_outer": W.tolist(), "boundary": B.tolist(),
            "drift": float(max(np.ptp(W), np.ptp(B)))}


def jang_identities(sol: JangSolution) -> dict:
    res = sol.identity_residual()
    slack = sol.energy_slack()
    scale = np.maximum(1.0, np.abs(sol.Rbar))
    return {"scalar_residual": float(np.max(np.abs(res) / scale)),
            "energy_slack_min": float(np.min(slack)),
            "E_bound": bool(np.all(sol.Ebar <= np.abs(sol.E) + 1e-14))}


def jang_boundary(sol: JangSolution, tol: float = 1e-10) -> dict:
    """Boundary data on the outer sphere: H_bar, X(nu_bar) and |H vec|."""
    data = sol.data
    r = sol.r[-1]
    H = float(data.profile("H", r))
    trk = 2 * float(data.profile("kT", r))
    Hbar = float(sol.Hbar[-1])
    XN = float(sol.XN[-1])
    Hvec = np.sqrt(max(H * H - trk * trk, 0.0))
    slack = Hbar - XN - Hvec
    if slack < -tol * max(1.0, Hvec):
        raise RuntimeError(f"boundary inequality violated by {slack:.3e}")
    return {"Hbar": Hbar, "X_nu": XN, "Hbar_minus_X": Hbar - XN, "Hvec": Hvec, "slack": slack,
            "sinh_psi": float(sol.W[-1])}


def deformed_charge(data: RadialInitialData, r: float, fprime: float) -> dict:
    """Charge through the level sphere at r before and after a graph deformation.

    The deformed field is E_bar_i = (E_i + f_i f^j E_j) / sqrt(1 + |df|^2) and
    the deformed unit normal is computed from its explicit formula.
    """
    A = 1.0 / float(data.profile("Ainv", r))
    R = float(data.profile("R", r))
    E_nu = float(data.profile("E", r))
    E_r = np.sqrt(A) * E_nu
    grad2 = fprime**2 / A
    root = np.sqrt(1 + grad2)
    Ebar_r = (E_r + fprime * (fprime / A) * E_r) / root
    nu_r = 1 / np.sqrt(A)
    nubar_r = nu_r * root - (fprime / A) * (nu_r * fprime) / root
    area = FOUR_PI * R**2
    return {"Q": E_nu * area / FOUR_PI, "Qbar": Ebar_r * nubar_r * area / FOUR_PI}


JANG_COLUMNS = ("r", "f", "fprime", "Abar", "Rbar", "absX", "divX")


def write_jang_csv(sol: JangSolution, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(JANG_COLUMNS)
        for row in zip(sol.r, sol.f, sol.fprime, sol.Abar, sol.Rbar, np.abs(sol.XN), sol.divX):
            w.writerow([repr(float(v)) for v in row])
