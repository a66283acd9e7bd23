"""Composite Jang interior with a quasi-spherical exterior, corner smoothing
and the conformal factor problem, all in the spherically symmetric model.

Radial coordinates: s is g_bar-arclength with the corner at s = 0, the
interior at s < 0 and the cylindrical end at s -> -infinity.  The exterior
metric is u_ext(r)^2 dr^2 + r^2 dOmega with zero scalar curvature, so a
radial harmonic function there satisfies r^2 du/ds = const.
"""

from dataclasses import dataclass, field
import csv

import mpmath
import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .jang import JangSolution, jang_boundary
from .flows import ShiTamTrace, imcf_profile, lambda_ratio

FOUR_PI = 4.0 * np.pi


# ---------------------------------------------------------------- composite

@dataclass
class CompositeRadialManifold:
    """Jang interior glued to a round-leaf exterior along the corner sphere.

    Interior arrays are ordered from the innermost sample to the corner.
    H_minus is the mean curvature of the corner from the interior, H_plus
    from the exterior, X_nu the normal component of X at the corner.
    jump is the mismatch (H_minus - X_nu) - H_plus of the exterior boundary
    condition; corner_jump is the geometric jump H_minus - H_plus that
    appears as a curvature spike.  g_corner is the exterior integral of
    u_ext / r^2 from the corner to infinity.
    """

    s: np.ndarray
    R: np.ndarray
    coefficient: np.ndarray
    X_nu_interior: np.ndarray
    r_corner: float
    H_minus: float
    H_plus: float
    X_nu: float
    u_ext0: float
    du_ext0: float
    m_ext: float
    g_corner: float
    horizon_area: float
    cylindrical: bool
    meta: dict = field(default_factory=dict)

    @property
    def jump(self) -> float:
        return float(self.H_minus - self.X_nu - self.H_plus)

    @property
    def corner_jump(self) -> float:
        return float(self.H_minus - self.H_plus)

    @property
    def chi_vanishes(self) -> bool:
        """|X| on the cylindrical end below the 1e-8 cut."""
        return bool(abs(self.X_nu_interior[0]) < 1e-8)

    def scaled(self, c: float) -> "CompositeRadialManifold":
        """The same composite for the metric c^2 g."""
        if c <= 0:
            raise ValueError("scale must be positive")
        return CompositeRadialManifold(
            self.s * c, self.R * c, self.coefficient / c**2, self.X_nu_interior / c,
            self.r_corner * c, self.H_minus / c, self.H_plus / c, self.X_nu / c, self.u_ext0,
            self.du_ext0 / c, self.m_ext * c, self.g_corner / c, self.horizon_area * c * c,
            self.cylindrical, dict(self.meta))


def exterior_kernel(r: float, m_ext: float) -> float:
    """Integral of (1 - 2m/rho)^(-1/2) / rho^2 from r to infinity."""
    if m_ext == 0:
        return 1.0 / r
    if r <= 2 * m_ext:
        raise ValueError("corner lies inside the exterior horizon")
    return float(-np.expm1(0.5 * np.log1p(-2 * m_ext / r)) / m_ext)


def _exterior_data(shitam: ShiTamTrace):
    """Mean profile of the exterior factor with its kernel integral at the corner."""
    r = shitam.r
    um = shitam.u.mean(axis=1)
    m_ext = shitam.mass_limit
    if shitam.reference == "schwarzschild":
        # radial arclength of u^2 dr^2 / (1 - 2m/r) + r^2 dOmega
        um = um / np.sqrt(1.0 - 2.0 * shitam.m_ref / r)
    spl = CubicSpline(r, um)
    body, _ = quad(lambda x: spl(x) / x**2, r[0], r[-1], limit=400, epsabs=1e-14, epsrel=1e-13)
    tail = exterior_kernel(r[-1], m_ext) if m_ext >= 0 else 1.0 / r[-1]
    return float(um[0]), float(spl(r[0], 1)), float(m_ext), float(body + tail)


def compose(jang: JangSolution, shitam: ShiTamTrace, tol: float = 1e-10) -> CompositeRadialManifold:
    """Glue the Jang graph to the exterior along the outer sphere."""
    if np.ptp(shitam.u[0]) > 1e-12 * np.max(shitam.u[0]):
        raise ValueError("the radial composite needs a uniform exterior boundary value")
    R_corner = float(jang.R[-1])
    r_corner = float(shitam.r[0])
    if abs(R_corner - r_corner) > tol * r_corner:
        raise ValueError(f"induced-metric mismatch at the corner: {R_corner} vs {r_corner}")
    bd = jang_boundary(jang)
    u0, du0, m_ext, g = _exterior_data(shitam)
    s = -jang.sbar
    c = jang.conformal_coefficient()
    cyl = bool(jang.blowup)
    area_h = float(FOUR_PI * jang.R[0] ** 2) if cyl else 0.0
    # u0 here is the radial stretch factor, so H_plus = 2 / (u0 r) for either reference
    cm = CompositeRadialManifold(s, jang.R.copy(), c, jang.XN.copy(), r_corner, bd["Hbar"],
                                 2.0 / (u0 * r_corner), bd["X_nu"], u0, du0, m_ext, g, area_h, cyl,
                                 {"Hvec": bd["Hvec"], "dR_corner": float(jang.dR[-1] * jang.inv_sAbar[-1])})
    cm.meta["jang_x"] = jang.x
    return cm


def product_cylinder(L: float, radius: float = 1.0, n: int = 401, exterior: str = "flat") -> CompositeRadialManifold:
    """Round cylinder of length L with zero coefficient, optionally capped by a flat exterior."""
    if L <= 0 or radius <= 0:
        raise ValueError("length and radius must be positive")
    s = np.linspace(-L, 0.0, n)
    R = np.full(n, float(radius))
    z = np.zeros(n)
    g = exterior_kernel(radius, 0.0)
    # the corner spike is switched off so the cap only transmits flux
    H = 2.0 / radius
    return CompositeRadialManifold(s, R, z, z.copy(), float(radius), H, H, 0.0, 1.0, 0.0, 0.0, g,
                                   FOUR_PI * radius**2, True, {"exterior": exterior, "truncated": True})


# ---------------------------------------------------------------- mollification

def mollifier(s) -> np.ndarray:
    """Normalized exponential bump supported in (-1, 1)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out / _PHI_NORM


_PHI_NORM = float(mpmath.quad(lambda s: mpmath.exp(-1 / (1 - s * s)), [-1, 0, 1]))


def _smoothstep(y, d: int = 0):
    """C^3 step 35y^4 - 84y^5 + 70y^6 - 20y^7 on [0, 1] and its derivatives."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    if d == 0:
        return y**4 * (35 - 84 * y + 70 * y**2 - 20 * y**3)
    if d == 1:
        return 140 * y**3 * (1 - y) ** 3
    return 420 * y**2 * (1 - y) ** 2 * (1 - 2 * y)


def plateau(t, d: int = 0) -> np.ndarray:
    """sigma: 1/100 on |t| <= 1/4, positive on 1/4 < |t| < 1/2, zero beyond."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    y = (0.5 - a) / 0.25
    inner = a <= 0.25
    band = (a > 0.25) & (a < 0.5)
    out = np.zeros_like(t)
    if d == 0:
        out[inner] = 0.01
        out[band] = 0.01 * _smoothstep(y[band])
    elif d == 1:
        out[band] = -0.01 * 4 * np.sign(t[band]) * _smoothstep(y[band], 1)
    else:
        out[band] = 0.01 * 16 * _smoothstep(y[band], 2)
    return out


def sigma_delta(t, delta: float, d: int = 0) -> np.ndarray:
    """delta^2 sigma(t / delta) and its t-derivatives."""
    return delta ** (2 - d) * plateau(np.asarray(t) / delta, d)


def switch_delta(t, delta: float, eps: float) -> np.ndarray:
    """Switching profile: 2 for |t| < delta/4, 1 for |t| > eps, slope below 2/eps."""
    a = np.abs(np.asarray(t, dtype=float))
    y = np.clip((eps - a) / (eps - delta / 4), 0.0, 1.0)
    return 1.0 + y * y * (3 - 2 * y)


@dataclass
class CornerBand:
    """Round band dt^2 + rho(t)^2 dOmega with rho = rho0 + c t + q t^2 on each side."""

    rho0: float
    c_minus: float
    c_plus: float
    q_minus: float = 0.0
    q_plus: float = 0.0
    X_minus: float = 0.0
    X_plus: float = 0.0

    @property
    def H_minus(self) -> float:
        return 2 * self.c_minus / self.rho0

    @property
    def H_plus(self) -> float:
        return 2 * self.c_plus / self.rho0

    def psi(self, y, d: int = 0, side: int = 0):
        """rho^2 and its derivatives; side -1 or +1 forces one branch."""
        y = np.asarray(y, dtype=float)
        neg = y < 0 if side == 0 else np.full(y.shape, side < 0)
        c = np.where(neg, self.c_minus, self.c_plus)
        q = np.where(neg, self.q_minus, self.q_plus)
        rho = self.rho0 + c * y + q * y * y
        drho = c + 2 * q * y
        if d == 0:
            return rho * rho
        if d == 1:
            return 2 * rho * drho
        return 2 * drho * drho + 4 * rho * q

    def scalar(self, t) -> np.ndarray:
        """Scalar curvature away from the corner."""
        psi, dpsi, d2psi = self.psi(t), self.psi(t, 1), self.psi(t, 2)
        return _band_scalar(psi, dpsi, d2psi)

    def X_t(self, y) -> np.ndarray:
        return np.where(np.asarray(y) < 0, self.X_minus, self.X_plus)


def _band_scalar(psi, dpsi, d2psi):
    # dt^2 + psi dOmega: R = 2/psi - 2 psi''/psi + (psi'/psi)^2 / 2
    return 2 / psi - 2 * d2psi / psi + 0.5 * (dpsi / psi) ** 2


def corner_band(cm: CompositeRadialManifold) -> CornerBand:
    """Second-order model of the composite on both sides of the corner."""
    s, R = cm.s, cm.R
    k = min(6, len(s))
    p = np.polyfit(s[-k:], R[-k:], 2)
    c_minus = float(cm.meta.get("dR_corner", np.polyval(np.polyder(p), 0.0)))
    q_minus = float(p[0])
    c_plus = 1.0 / cm.u_ext0
    # d/ds (1/u) with ds = u dr
    q_plus = -0.5 * cm.du_ext0 / cm.u_ext0**3
    return CornerBand(cm.r_corner, c_minus, c_plus, q_minus, q_plus, cm.X_nu, 0.0)


@dataclass
class MollifiedCorner:
    """Samples of the smoothed band.  R_delta includes the corner spike."""

    delta: float
    eps: float
    t: np.ndarray
    psi_delta: np.ndarray
    R_delta: np.ndarray
    R_background: np.ndarray
    X_delta_t: np.ndarray
    sup_R: float
    sup_R_off_spike: float
    band_integral: float
    spike_integral: float
    spike_amplitude: float
    H_jump: float
    meta: dict = field(default_factory=dict)


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _smoothed_psi(band: CornerBand, t: np.ndarray, delta: float, nodes: int = 48):
    """psi_delta and its first two t-derivatives by differentiating under the integral.

    psi_delta(t) = integral of psi(t - sigma_delta(t) s) phi(s) ds.  The kink of
    psi at the corner contributes [psi'] (1 - sigma' s*)^2 phi(s*) / sigma with
    s* = t / sigma to the second derivative; the smooth parts are integrated
    by Gauss-Legendre on each side of s*.
    """
    sg = sigma_delta(t, delta)
    d1 = sigma_delta(t, delta, 1)
    d2 = sigma_delta(t, delta, 2)
    x, w = _gl(nodes)
    out0 = band.psi(t).astype(float)
    out1 = band.psi(t, 1).astype(float)
    out2 = band.psi(t, 2).astype(float)
    zero = np.zeros(1)
    kink = float(band.psi(zero, 1, 1)[0] - band.psi(zero, 1, -1)[0])
    on = sg > 0
    for i in np.flatnonzero(on):
        ti, si, s1, s2 = t[i], sg[i], d1[i], d2[i]
        star = ti / si
        pieces = [(-1.0, min(max(star, -1.0), 1.0)), (min(max(star, -1.0), 1.0), 1.0)]
        v0 = v1 = v2 = 0.0
        for lo, hi in pieces:
            if hi <= lo:
                continue
            sq = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            wq = 0.5 * (hi - lo) * w * mollifier(sq)
            y = ti - si * sq
            side = 1 if hi <= star else -1
            fac = 1 - s1 * sq
            v0 += wq @ band.psi(y, 0, side)
            v1 += wq @ (band.psi(y, 1, side) * fac)
            v2 += wq @ (band.psi(y, 2, side) * fac**2 - band.psi(y, 1, side) * s2 * sq)
        if abs(star) < 1:
            v2 += kink * (1 - s1 * star) ** 2 * float(mollifier(np.array([star]))[0]) / si
        out0[i], out1[i], out2[i] = v0, v1, v2
    return out0, out1, out2


def _smoothed_X(band: CornerBand, t: np.ndarray, delta: float, eps: float, nodes: int = 64):
    """X_delta_t = integral of X_t(t - 2 sigma_delta(t) s) phi(varsigma_delta(t) s) ds."""
    sg = sigma_delta(t, delta)
    vs = switch_delta(t, delta, eps)
    x, w = _gl(nodes)
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        lim = 1.0 / vs[i]
        sq = lim * x
        out[i] = lim * (w @ (band.X_t(ti - 2 * sg[i] * sq) * mollifier(vs[i] * sq)))
    return out


def mollify_corner(cm, delta: float, eps: float = None, n: int = 4001) -> MollifiedCorner:
    """Smooth the corner of a composite (or a CornerBand) at scale delta.

    Returns R_delta on |t| < delta with the spike term separated by a fit to
    (100/delta^2) phi(100 t / delta^2) on |t| <= delta^2/50.
    """
    band = cm if isinstance(cm, CornerBand) else corner_band(cm)
    eps = 0.1 * band.rho0 if eps is None else eps
    if delta <= 0:
        raise ValueError("delta must be positive")
    if delta >= eps / 2:
        raise ValueError("delta too large for the band")
    w2 = delta**2 / 50
    # dense near the spike, uniform across the band
    t_spike = np.linspace(-w2, w2, n // 2)
    t_band = np.linspace(-delta, delta, n)
    t = np.unique(np.concatenate([t_spike, t_band]))
    t = t[t != 0.0] if not np.any(t == 0.0) else t
    psi, dpsi, d2psi = _smoothed_psi(band, t, delta)
    R = _band_scalar(psi, dpsi, d2psi)
    R0 = band.scalar(t)
    Xd = _smoothed_X(band, t, delta, eps)
    spike_zone = np.abs(t) <= w2
    profile = (100 / delta**2) * mollifier(100 * t / delta**2)
    A = np.column_stack([profile[spike_zone], np.ones(spike_zone.sum())])
    coef, *_ = np.linalg.lstsq(A, R[spike_zone], rcond=None)
    band_int = _trapz(R, t)
    spike_int = _trapz(R - R0, t)
    off = ~spike_zone
    return MollifiedCorner(delta, eps, t, psi, R, R0, Xd, float(np.max(np.abs(R))),
                           float(np.max(np.abs(R[off]))), band_int, spike_int, float(coef[0]),
                           band.H_minus - band.H_plus,
                           {"band": band, "smooth_outside": float(np.max(np.abs(
                               (psi - band.psi(t))[np.abs(t) >= delta / 2])) if np.any(np.abs(t) >= delta / 2) else 0.0)})


def _trapz(y, x) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def mollification_audit(cm, deltas=(1e-2, 5e-3, 2.5e-3), eps: float = None) -> list:
    """sup |R_delta|, band integral and fitted spike amplitude over a delta sweep."""
    rows = []
    prev = None
    for d in deltas:
        mc = mollify_corner(cm, d, eps)
        row = {"delta": d, "sup_R": mc.sup_R, "band_integral": mc.band_integral,
               "spike_integral": mc.spike_integral, "spike_amplitude": mc.spike_amplitude,
               "H_jump": mc.H_jump}
        row["sup_ratio"] = None if prev is None else mc.sup_R / prev
        prev = mc.sup_R
        rows.append(row)
    return rows


AUDIT_COLUMNS = ("delta", "sup_R", "band_integral", "spike_amplitude")


def write_audit_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AUDIT_COLUMNS)
        for r in rows:
            w.writerow([repr(float(r[k])) for k in AUDIT_COLUMNS])


# ---------------------------------------------------------------- conformal BVP

@dataclass
class ConformalSolution:
    """Radial solution of the conformal factor problem on a composite.

    u is sampled on the interior nodes s (cylindrical extension included);
    C = r^2 du/ds in the exterior, so u = 1 - C g(r) there and the expansion
    coefficient is A = -C.  energy_interior is the Dirichlet energy over the
    interior (the Jang region); energy_exterior that of the exterior.
    """

    s: np.ndarray
    R: np.ndarray
    coefficient: np.ndarray
    u: np.ndarray
    C: float
    A: float
    energy_interior: float
    energy_exterior: float
    inner: str
    outer: str
    composite: CompositeRadialManifold
    meta: dict = field(default_factory=dict)

    @property
    def P(self) -> float:
        return functional_P(self)

    @property
    def mass_shift(self) -> float:
        return 2 * self.A

    @property
    def conformal_mass(self) -> float:
        return self.composite.m_ext + 2 * self.A

    def u_exterior(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        m = self.composite.m_ext
        return 1.0 - self.C * np.vectorize(lambda x: exterior_kernel(x, m))(r)


def _extend_cylinder(s, R, c, X, T, min_h):
    """Append a product-cylinder continuation so the end reaches length T past the cut."""
    cut = np.searchsorted(R, 1.01 * R[0]) if R[-1] > 1.01 * R[0] else 0
    s_cut = s[cut]
    s_end = s_cut - T
    if s_end >= s[0]:
        keep = s >= s_end
        s2, R2, c2, X2 = s[keep], R[keep], c[keep], X[keep]
        if s2[0] > s_end:
            s2 = np.concatenate([[s_end], s2])
            R2 = np.concatenate([[R2[0]], R2])
            c2 = np.concatenate([[c2[0]], c2])
            X2 = np.concatenate([[X2[0]], X2])
        return s2, R2, c2, X2
    m = int(np.ceil((s[0] - s_end) / min_h))
    ext = np.linspace(s_end, s[0], m + 1)[:-1]
    return (np.concatenate([ext, s]), np.concatenate([np.full(m, R[0]), R]),
            np.concatenate([np.full(m, c[0]), c]), np.concatenate([np.full(m, X[0]), X]))


def solve_conformal(cm: CompositeRadialManifold, coefficient="full", inner: str = "dirichlet",
                    outer: str = "exterior", T: float = None, refine: int = 1) -> ConformalSolution:
    """Solve Delta u - (coefficient / 8) u = 0 on the composite.

    coefficient "full" uses R_bar - 2|E_bar|^2 - |k_bar|^2; an array or a
    callable of (s, R) gives a custom coefficient.  The corner contributes the
    curvature spike 2 (H_minus - H_plus) as a jump condition on du/ds.  inner
    is "dirichlet" (u = 0 at the truncated end) or "robin" (the zero Hawking
    mass condition).  outer is "exterior" (u -> 1 at infinity through the
    exterior) or "dirichlet" (u = 1 on the corner sphere, no exterior).  T is
    the cylinder length past the sphere of radius 1.01 times the horizon
    radius; the default is 8 horizon radii.
    """
    if inner not in ("dirichlet", "robin"):
        raise ValueError("inner condition must be 'dirichlet' or 'robin'")
    if outer not in ("exterior", "dirichlet"):
        raise ValueError("outer condition must be 'exterior' or 'dirichlet'")
    s, R = cm.s.copy(), cm.R.copy()
    if isinstance(coefficient, str):
        if coefficient != "full":
            raise ValueError(f"unknown coefficient source {coefficient!r}")
        c = cm.coefficient.copy()
    elif callable(coefficient):
        c = np.asarray(coefficient(s, R), dtype=float) * np.ones_like(s)
    else:
        c = np.broadcast_to(np.asarray(coefficient, dtype=float), s.shape).copy()
    X = cm.X_nu_interior.copy()
    if refine > 1:
        sf = np.concatenate([np.linspace(a, b, refine + 1)[:-1] for a, b in zip(s[:-1], s[1:])] + [s[-1:]])
        R = CubicSpline(s, R)(sf)
        c = CubicSpline(s, c)(sf)
        X = np.interp(sf, s, X)
        s = sf
    if cm.cylindrical and not cm.meta.get("truncated"):
        T = 8.0 * R[0] if T is None else T
        h = np.diff(s)
        s, R, c, X = _extend_cylinder(s, R, c, X, T, float(np.median(h[: max(3, len(h) // 10)])))
    n = len(s)
    h = np.diff(s)
    if np.any(h <= 0):
        raise ValueError("interior grid must be increasing")
    Rm2 = (0.5 * (R[1:] + R[:-1])) ** 2
    a = Rm2 / h  # conductances
    V = np.zeros(n)
    V[:-1] += 0.5 * h * R[:-1] ** 2
    V[1:] += 0.5 * h * R[1:] ** 2
    # tridiagonal system in banded storage
    ab = np.zeros((3, n))
    rhs = np.zeros(n)
    diag = np.zeros(n)
    diag[:-1] += a
    diag[1:] += a
    diag += c / 8 * V
    ab[0, 1:] = -a
    ab[2, :-1] = -a
    Rin = R[0]
    if inner == "dirichlet":
        diag[0] = 1.0
        ab[0, 1] = 0.0
    else:
        # du/ds + (Hbar/4) u = u / (2R), normal and Hbar = 2 R_s / R toward the outer end
        Rs = (R[1] - R[0]) / h[0]
        diag[0] += Rin * (1 - Rs) / 2
    jump = cm.corner_jump if outer == "exterior" else 0.0
    if outer == "exterior":
        g = cm.g_corner
        diag[-1] += R[-1] ** 2 * jump / 4 + 1.0 / g
        rhs[-1] = 1.0 / g
    else:
        diag[-1] = 1.0
        ab[2, -2] = 0.0
        rhs[-1] = 1.0
    ab[1] = diag
    u = solve_banded((1, 1), ab, rhs)
    if np.any(u[1:] <= 0) or not np.all(np.isfinite(u)):
        raise RuntimeError("conformal factor is not positive; the coefficient is pathological")
    if outer == "exterior":
        C = (1 - u[-1]) / cm.g_corner
        e_ext = FOUR_PI * C * C * cm.g_corner
    else:
        C = a[-1] * (u[-1] - u[-2]) + c[-1] / 8 * 0.5 * h[-1] * R[-1] ** 2 * u[-1]
        e_ext = 0.0
    du = np.diff(u)
    e_int = float(FOUR_PI * np.sum(a * du * du))
    res = _residual(a, c, V, u, R, outer, C, jump)
    return ConformalSolution(s, R, c, u, float(C), float(-C), e_int, float(e_ext), inner, outer, cm,
                             {"T": T, "residual": res, "n": n, "corner_jump": jump,
                              "decay_rate": float(np.sqrt(max(c[0], 0.0) / 8))})


def _residual(a, c, V, u, R, outer, C, jump) -> float:
    r = np.zeros(len(u))
    flux = a * np.diff(u)
    r[1:-1] = flux[1:] - flux[:-1] - c[1:-1] / 8 * V[1:-1] * u[1:-1]
    if outer == "exterior":
        r[-1] = C - flux[-1] - c[-1] / 8 * V[-1] * u[-1] - jump / 4 * R[-1] ** 2 * u[-1]
    scale = max(1.0, float(np.max(np.abs(flux))))
    return float(np.max(np.abs(r)) / scale)


def functional_P(sol: ConformalSolution, v=None) -> float:
    """Quadrature of the energy functional at 1 + v (v defaults to the solution).

    The bulk term runs over the interior and the exterior, the corner spike
    adds (1/8) of its weight times (1 + v)^2, and for the Robin inner
    condition the boundary terms in H_bar and the L^4 norm are included.
    """
    w = sol.u if v is None else 1.0 + np.asarray(v, dtype=float)
    s, R, c = sol.s, sol.R, sol.coefficient
    h = np.diff(s)
    a = (0.5 * (R[1:] + R[:-1])) ** 2 / h
    V = np.zeros(len(s))
    V[:-1] += 0.5 * h * R[:-1] ** 2
    V[1:] += 0.5 * h * R[1:] ** 2
    bulk = FOUR_PI * (np.sum(a * np.diff(w) ** 2) + np.sum(c / 8 * V * w * w))
    total = 0.5 * bulk
    cm = sol.composite
    if sol.outer == "exterior":
        wN = w[-1]
        # exterior harmonic continuation of the boundary value and its energy
        C = (1 - wN) / cm.g_corner
        total += 0.5 * FOUR_PI * C * C * cm.g_corner
        total += 0.5 * (sol.meta["corner_jump"] / 4) * FOUR_PI * R[-1] ** 2 * wN**2
    if sol.inner == "robin":
        Rin = R[0]
        Rs = (R[1] - R[0]) / h[0]
        Hbar = 2 * Rs / Rin
        area = FOUR_PI * Rin**2
        total += -Hbar * area * w[0] ** 2 / 8 + 0.5 * np.sqrt(np.pi) * np.sqrt(area * w[0] ** 4)
    return float(total)


def gamma_constant(sol: ConformalSolution, horizon_areas=None) -> float:
    """Dirichlet energy of u over the interior divided by the sum of sqrt(4 pi |Sigma_h|)."""
    if horizon_areas is None:
        horizon_areas = [sol.composite.horizon_area]
    areas = np.atleast_1d(np.asarray(horizon_areas, dtype=float))
    if np.any(areas <= 0):
        raise ValueError("horizon areas must be positive")
    return float(sol.energy_interior / np.sum(np.sqrt(FOUR_PI * areas)))


def conformal_mass_fit(sol: ConformalSolution, r_max: float = 1e4, n: int = 200) -> dict:
    """Mass of u^4 g_bar from the Hawking masses of large exterior spheres.

    Independent of A: the areal radius u^2 r and the conformal mean curvature
    u^-2 (H + 4 u_s / u) give Hawking masses that are fitted by M + c/r over
    the last decade.
    """
    cm = sol.composite
    m = cm.m_ext
    r = np.geomspace(max(cm.r_corner, r_max / 100), r_max, n)
    u = sol.u_exterior(r)
    ue = 1.0 / np.sqrt(1 - 2 * m / r)
    us = sol.C / r**2
    H = 2.0 / (ue * r)
    rho = u * u * r
    Ht = (H + 4 * us / u) / u**2
    mH = 0.5 * rho * (1 - rho**2 * Ht**2 / 4)
    sel = r >= r[-1] / 10
    X = np.column_stack([np.ones(sel.sum()), 1 / r[sel]])
    coef, *_ = np.linalg.lstsq(X, mH[sel], rcond=None)
    return {"m_tilde": float(coef[0]), "m_bar_plus_2A": float(m + 2 * sol.A)}


def t_drift(cm: CompositeRadialManifold, factors=(4, 8, 16), **kw) -> dict:
    """Solve with cylinder lengths factor * horizon radius and report the drift of A and gamma."""
    Rh = float(cm.R[0])
    A, G = [], []
    for f in factors:
        sol = solve_conformal(cm, T=f * Rh, **kw)
        A.append(sol.A)
        G.append(gamma_constant(sol))
    return {"T": [f * Rh for f in factors], "A": A, "gamma": G,
            "drift_A": float(abs(A[-1] - A[-2])), "drift_gamma": float(abs(G[-1] - G[-2]))}


def conformal_lambda(sol: ConformalSolution) -> dict:
    """lambda from a weak IMCF in u^4 g_bar over the interior spheres.

    Areas in the conformal metric drive the flow; the sup runs over the same
    spheres measured in g_bar.
    """
    cm = sol.composite
    keep = sol.s >= cm.s[0]
    ca = FOUR_PI * sol.R[keep] ** 2 * sol.u[keep] ** 4
    ba = FOUR_PI * sol.R[keep] ** 2
    return lambda_ratio(ca, ba, cm.horizon_area)


def interior_imcf(cm: CompositeRadialManifold):
    """Weak IMCF through the interior spheres of the composite, in g_bar."""
    dR = np.gradient(cm.R, cm.s)
    return imcf_profile(cm.s, cm.R, dR)
