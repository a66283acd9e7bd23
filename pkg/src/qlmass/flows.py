"""Exterior flows and monotone quantities.

Two flows are provided.  The quasi-spherical parabolic flow builds a zero
scalar curvature extension u^2 ds^2 + sigma_s outside an embedded surface,
either over its Euclidean parallel surfaces or over round spheres of a
Schwarzschild reference.  The radial inverse mean curvature flow runs over
coordinate spheres of an initial data set with the weak jump rule, and
carries the leafwise integrals used by the charge and angular momentum
refinements of Hawking mass monotonicity.
"""

from dataclasses import dataclass, field
import csv

import numpy as np
from scipy.integrate import solve_ivp, cumulative_simpson

from ._polar import PolarGrid
from .surfaces import AxisymSurfaceData, laplacian_matrix
from .embedding import EmbeddedProfile

SIXTEEN_PI_32 = (16.0 * np.pi) ** 1.5


# ---------------------------------------------------------------- Shi-Tam

@dataclass
class ShiTamTrace:
    """Samples of the parabolic extension along its foliation.

    s is the distance parameter of the foliation and r the areal radius of
    the leaf.  M is the monotone quantity (1/8pi) of H_r (1 - 1/u) over the
    leaf; for a Schwarzschild reference M_static is m plus the V-weighted
    version.  mass_raw is the last sample, mass_limit the tail fit.
    """

    s: np.ndarray
    r: np.ndarray
    u: np.ndarray
    M: np.ndarray
    reference: str
    m_ref: float
    M_static: np.ndarray = None
    mass_raw: float = None
    mass_limit: float = None
    monotone: bool = None
    max_increase: float = None
    meta: dict = field(default_factory=dict)

    def quantity(self) -> np.ndarray:
        return self.M if self.M_static is None else self.M_static


def _tail_fit(r: np.ndarray, M: np.ndarray) -> float:
    """Fit M = M_inf + c / r over the last decade of radii."""
    sel = r >= r[-1] / 10.0
    if sel.sum() < 3:
        sel = np.arange(len(r)) >= len(r) - 3
    X = np.column_stack([np.ones(sel.sum()), 1.0 / r[sel]])
    coef, *_ = np.linalg.lstsq(X, M[sel], rcond=None)
    return float(coef[0])


def _profile_metric(profile: EmbeddedProfile):
    g = PolarGrid(len(profile.theta))
    if not np.allclose(g.theta, profile.theta, atol=1e-12):
        raise ValueError("profile is not sampled on Gauss-Legendre nodes")
    drho = g.d_odd(profile.rho)
    dz = g.d_even(profile.z)
    a = np.hypot(drho, dz)
    return g, a, profile.rho.copy()


def _integrate_parabolic(g, coeffs, u0, s_end, s_out, rtol):
    """Integrate c(s) u_s = u^2 L(s) u + K(s)(u - u^3) by an implicit method."""

    def rhs(s, u):
        c, K, L = coeffs(s)
        return (u * u * (L @ u) + K * (u - u**3)) / c

    def jac(s, u):
        c, K, L = coeffs(s)
        Lu = L @ u
        J = (u * u)[:, None] * L
        J[np.diag_indices_from(J)] += 2 * u * Lu + K * (1 - 3 * u * u)
        return J / c[:, None]

    sol = solve_ivp(rhs, (0.0, s_end), u0, method="Radau", t_eval=s_out, jac=jac,
                    rtol=rtol, atol=rtol * 1e-2)
    if not sol.success:
        raise RuntimeError("parabolic integration failed: " + sol.message)
    u = sol.y.T
    if np.any(u <= 0) or not np.all(np.isfinite(u)):
        raise RuntimeError("u left the positive range")
    return u


def shi_tam_flow(profile: EmbeddedProfile, u0, r_max: float, reference: str = "flat",
                 m_ref: float = 0.0, n_out: int = 200, rtol: float = 1e-10) -> ShiTamTrace:
    """Zero scalar curvature extension outside an embedded surface.

    With reference="flat" the leaves are the Euclidean parallel surfaces of
    the profile.  With reference="schwarzschild" the profile must be a
    round sphere of the Schwarzschild slice of mass m_ref; the leaves are
    the round spheres outside it and u is measured against the background
    radial metric.  r_max is the areal radius of the last leaf.
    """
    g = PolarGrid(len(profile.theta))
    n = g.order
    u0 = np.broadcast_to(np.asarray(u0, dtype=float), (n,)).copy()
    if np.any(u0 <= 0):
        raise ValueError("initial data u0 must be positive")
    if reference == "flat":
        g, a, b = _profile_metric(profile)
        k1, k2 = profile.kappa1, profile.kappa2
        if np.any(k1 <= 0) or np.any(k2 <= 0):
            raise ValueError("parallel surfaces need a convex profile")
        base = AxisymSurfaceData(g, a=a, b=b, H=0.0, trk=0.0)
        A0 = base.integrate(1.0)
        intH = base.integrate(k1 + k2)
        r0 = np.sqrt(A0 / (4 * np.pi))
        if r_max <= r0:
            raise ValueError("r_max must exceed the areal radius of the surface")
        # area(s) = A0 + s intH + 4 pi s^2
        s_end = (-intH + np.sqrt(intH**2 - 16 * np.pi * (A0 - 4 * np.pi * r_max**2))) / (8 * np.pi)

        def leaf(s):
            f1, f2 = 1 + s * k1, 1 + s * k2
            return AxisymSurfaceData(g, a=a * f1, b=b * f2, H=k1 / f1 + k2 / f2, trk=0.0), k1 * k2 / (f1 * f2)

        def coeffs(s):
            surf, K = leaf(s)
            return surf.H, K, laplacian_matrix(surf)

        s_out = np.concatenate([[0.0], np.geomspace(1e-3 * r0, s_end, n_out - 1)])
        s_out[-1] = s_end
        u = _integrate_parabolic(g, coeffs, u0, s_end, s_out, rtol)
        M = np.empty(len(s_out))
        r = np.empty(len(s_out))
        for i, s in enumerate(s_out):
            surf, _ = leaf(s)
            M[i] = surf.integrate(surf.H * (1 - 1 / u[i])) / (8 * np.pi)
            r[i] = np.sqrt(surf.integrate(1.0) / (4 * np.pi))
        Ms = None
    elif reference == "schwarzschild":
        if m_ref < 0:
            raise ValueError("reference mass must be nonnegative")
        spread = np.ptp(profile.kappa1) + np.ptp(profile.kappa2) + np.ptp(profile.kappa1 - profile.kappa2)
        if spread > 1e-8 * np.max(np.abs(profile.kappa1)):
            raise ValueError("the Schwarzschild reference flow supports round leaves only")
        r0 = float(np.mean(profile.rho / g.sin))
        if r0 <= 2 * m_ref:
            raise ValueError("surface lies inside the reference horizon")
        if r_max <= r0:
            raise ValueError("r_max must exceed the areal radius of the surface")
        L1 = laplacian_matrix(AxisymSurfaceData(g, a=np.ones(n), b=g.sin.copy(), H=0.0, trk=0.0))

        # areal radius r as the flow parameter, with c = H_m / sqrt(g_rr) of the background
        def coeffs(s):
            rr = r0 + s
            c = np.full(n, 2.0 / rr * (1 - 2 * m_ref / rr))
            return c, 1.0 / rr**2, L1 / rr**2

        s_end = r_max - r0
        s_out = np.concatenate([[0.0], np.geomspace(1e-3 * r0, s_end, n_out - 1)])
        s_out[-1] = s_end
        u = _integrate_parabolic(g, coeffs, u0, s_end, s_out, rtol)
        r = r0 + s_out
        Hm = 2.0 / r * np.sqrt(1 - 2 * m_ref / r)
        V = np.sqrt(1 - 2 * m_ref / r)
        w = g.w / np.sum(g.w)
        M = r**2 * Hm / 2 * ((1 - 1 / u) @ w)
        Ms = m_ref + r**2 * V * Hm / 2 * ((1 - 1 / u) @ w)
    else:
        raise ValueError(f"unknown reference {reference!r}")
    Q = M if Ms is None else Ms
    inc = np.diff(Q)
    scale = max(1.0, float(np.max(np.abs(Q))))
    trace = ShiTamTrace(s_out, r, u, M, reference, float(m_ref), Ms)
    trace.mass_raw = float(Q[-1])
    trace.mass_limit = _tail_fit(r, Q)
    trace.max_increase = float(inc.max()) if len(inc) else 0.0
    trace.monotone = bool(trace.max_increase <= 1e-8 * scale)
    trace.meta.update({"r0": float(r0), "rtol": rtol})
    return trace


def round_exact_u(r, r0: float, u0: float, m_ref: float = 0.0) -> np.ndarray:
    """Closed-form u for round leaves and uniform data: a Schwarzschild exterior."""
    r = np.asarray(r, dtype=float)
    m_hat = m_ref + 0.5 * (r0 - 2 * m_ref) * (1 - 1 / u0**2)
    return np.sqrt((1 - 2 * m_ref / r) / (1 - 2 * m_hat / r))


def exterior_mass(r0: float, u0: float, m_ref: float = 0.0) -> float:
    """Mass of the round-leaf extension with uniform initial value u0."""
    return m_ref + 0.5 * (r0 - 2 * m_ref) * (1 - 1 / u0**2)


# ---------------------------------------------------------------- IMCF

@dataclass
class IMCFTrace:
    """Weak inverse mean curvature flow through a one-parameter family of spheres.

    Arrays are indexed by the sampled spheres from the inside out.  jump
    marks spheres that are skipped by the flow (a larger-area sphere lies
    inside a smaller-area one further out); on the flow leaves area equals
    area[0] e^t.  The integrals are over each sphere: E2 of |E|^2, flux of
    E(nu), Rint of scalar curvature, k2 of |k|^2, keta2 of
    k(eta/|eta|, nu)^2, eta2 of |eta|^2 and keta of k(eta, nu).
    """

    r: np.ndarray
    area: np.ndarray
    t: np.ndarray
    m_H: np.ndarray
    jump: np.ndarray
    E2: np.ndarray
    flux: np.ndarray
    Rint: np.ndarray
    k2: np.ndarray
    keta2: np.ndarray
    eta2: np.ndarray
    keta: np.ndarray
    i0: int
    meta: dict = field(default_factory=dict)

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(~self.jump)

    @property
    def t0(self) -> float:
        return float(self.t[self.i0])

    @property
    def area0(self) -> float:
        return float(self.area[0])

    @property
    def alpha2(self) -> float:
        """1 - sqrt(|S_0| / |S_t0|)."""
        return float(1 - np.sqrt(self.area[0] / self.area[self.i0]))

    def area_law_error(self) -> float:
        lv = self.leaves
        return float(np.max(np.abs(np.log(self.area[lv] / self.area[0]) - self.t[lv])))

    def scaled(self, c: float) -> "IMCFTrace":
        """The same flow for the metric c^2 g."""
        c2 = c * c
        return IMCFTrace(self.r * c, self.area * c2, self.t.copy(), self.m_H * c, self.jump.copy(),
                         self.E2, self.flux * c2 / c, self.Rint, self.k2, self.keta2,
                         self.eta2 * c2 * c2, self.keta * c, self.i0, dict(self.meta))


def _hull_times(area: np.ndarray):
    """Flow times and skipped spheres of the weak flow through nested spheres."""
    hull = np.minimum.accumulate(area[::-1])[::-1]
    jump = area > hull * (1 + 1e-14)
    t = np.log(hull / hull[0])
    return t, jump


def _finish_trace(r, area, m_H, integrals, stop_index, meta) -> IMCFTrace:
    t, jump = _hull_times(area)
    leaves = np.flatnonzero(~jump[: stop_index + 1])
    i0 = int(leaves[-1])
    return IMCFTrace(r, area, t, m_H, jump, integrals["E2"], integrals["flux"], integrals["Rint"],
                     integrals["k2"], integrals["keta2"], integrals["eta2"], integrals["keta"], i0, meta)


def imcf_radial(data, start="horizon", stop_surface: float = None, n: int = 400,
                polar_order: int = 32) -> IMCFTrace:
    """Radial weak IMCF over coordinate spheres of an exact slice.

    start is "horizon" or a starting radius; stop_surface is the coordinate
    radius of the outer boundary.  t0 is the last flow leaf whose area
    does not exceed that of the outer boundary.  For rotating data the coordinate
    spheres are used as a surrogate for the flow leaves (flagged in meta).
    """
    spec = data.spec
    if start == "horizon":
        if spec.m == 0:
            raise ValueError("flat data has no horizon to start from")
        r_start = spec.horizon_coordinate
    elif start == "cylindrical_end":
        raise ValueError("a cylindrical end needs Jang data; use imcf_jang")
    else:
        r_start = float(start)
    r_stop = float(stop_surface if stop_surface is not None else data.r[-1])
    if r_stop <= r_start:
        raise ValueError("stop surface must lie outside the start")
    r = np.linspace(r_start, r_stop, n) if spec.rotating else \
        r_start + (r_stop - r_start) * (np.geomspace(1.0, 101.0, n) - 1.0) / 100.0
    meta = {"family": spec.family, "start": start, "stop": r_stop, "proxy": bool(spec.rotating)}
    if spec.rotating:
        return _imcf_rotating(data, r, polar_order, meta)
    m, Q = spec.m, spec.Q
    f = lambda k: data.profile(k, r)  # noqa: E731
    R, dR, Ainv = f("R"), f("dR"), f("Ainv")
    Ainv = np.maximum(Ainv, 0.0)
    if spec.horizon_coordinate == r_start and spec.m > 0:
        Ainv[0] = 0.0 if spec.slicing == "static" else Ainv[0]
    area = 4 * np.pi * R**2
    Rs = dR * np.sqrt(Ainv)
    H = 2 * Rs / R
    if start == "horizon" and spec.slicing == "static":
        H[0] = 0.0
    m_H = np.sqrt(area / (16 * np.pi)) * (1 - area * H**2 / (16 * np.pi))
    E = f("E")
    krr, kT = f("krr"), f("kT")
    knn = krr * Ainv
    k2 = knn**2 + 2 * kT**2
    trk = knn + 2 * kT
    Rscal = 16 * np.pi * f("mu") + k2 - trk**2
    zeros = np.zeros_like(r)
    ints = {"E2": area * E**2, "flux": area * E, "Rint": area * Rscal, "k2": area * k2,
            "keta2": zeros, "eta2": zeros, "keta": zeros}
    return _finish_trace(r, area, m_H, ints, n - 1, meta)


def _imcf_rotating(data, r, polar_order, meta) -> IMCFTrace:
    from .exact_slices import extract_surface, kn_quantity

    spec = data.spec
    g = PolarGrid(polar_order)
    n = len(r)
    out = {k: np.zeros(n) for k in ("area", "m_H", "E2", "flux", "Rint", "k2", "keta2", "eta2", "keta")}
    for i, ri in enumerate(r):
        rr = max(ri, spec.r_plus * (1 + 1e-9))
        s = extract_surface(spec, ri, polar_order)
        area = s.integrate(1.0)
        out["area"][i] = area
        out["m_H"][i] = np.sqrt(area / (16 * np.pi)) * (1 - s.integrate(s.H**2) / (16 * np.pi))
        Enu = s.E_nu
        Eth = 0.0
        out["E2"][i] = s.integrate(Enu**2 + Eth**2)
        out["flux"][i] = s.integrate(Enu)
        k2 = kn_quantity(spec, "k_norm2", rr, g.theta)
        mu = kn_quantity(spec, "mu", rr, g.theta)
        out["Rint"][i] = s.integrate(16 * np.pi * mu + k2 - s.trk**2)
        out["k2"][i] = s.integrate(k2)
        out["keta2"][i] = s.integrate((s.p_phi / s.b) ** 2)
        out["eta2"][i] = s.integrate(s.b**2)
        out["keta"][i] = s.integrate(s.p_phi)
    area = out.pop("area")
    m_H = out.pop("m_H")
    meta["circumference"] = float(2 * np.pi * max(
        float(np.max(kn_quantity(spec, "b", max(ri, spec.r_plus), g.theta))) for ri in r))
    return _finish_trace(r, area, m_H, out, n - 1, meta)


def imcf_profile(s: np.ndarray, R: np.ndarray, dR_ds: np.ndarray, E=None, Rscal=None,
                 stop_index: int = None, meta: dict = None) -> IMCFTrace:
    """Radial weak IMCF for a spherically symmetric metric ds^2 + R(s)^2 dOmega^2."""
    s = np.asarray(s, dtype=float)
    area = 4 * np.pi * np.asarray(R, dtype=float) ** 2
    H = 2 * np.asarray(dR_ds) / np.asarray(R)
    m_H = np.sqrt(area / (16 * np.pi)) * (1 - area * H**2 / (16 * np.pi))
    E = np.zeros_like(s) if E is None else np.asarray(E, dtype=float)
    Rscal = np.zeros_like(s) if Rscal is None else np.asarray(Rscal, dtype=float)
    zeros = np.zeros_like(s)
    ints = {"E2": area * E**2, "flux": area * E, "Rint": area * Rscal, "k2": zeros,
            "keta2": zeros, "eta2": zeros, "keta": zeros}
    stop = len(s) - 1 if stop_index is None else stop_index
    return _finish_trace(s, area, m_H, ints, stop, meta or {})


def _leaf_integral(trace: IMCFTrace, values: np.ndarray, upto: int) -> np.ndarray:
    """Cumulative integral in t over the flow leaves up to index upto."""
    lv = trace.leaves
    lv = lv[lv <= upto]
    t = trace.t[lv]
    v = values[lv]
    if len(lv) < 3:
        return lv, np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])
    return lv, cumulative_simpson(v, x=t, initial=0.0)


def geroch_chain(trace: IMCFTrace, Q: float) -> dict:
    """Leafwise lines of the charged Hawking mass monotonicity chain.

    Returns, per flow leaf up to t0, the Hawking mass increment and the
    successive lower bounds from scalar curvature, from |E|^2, from the
    squared flux and the closed form in Q and t.
    """
    lv, I_R = _leaf_integral(trace, np.sqrt(trace.area) * trace.Rint, trace.i0)
    _, I_E = _leaf_integral(trace, np.sqrt(trace.area) * trace.E2, trace.i0)
    _, I_F = _leaf_integral(trace, trace.flux**2 / np.sqrt(trace.area), trace.i0)
    t = trace.t[lv]
    lines = {
        "t": t,
        "increment": trace.m_H[lv] - np.sqrt(trace.area0 / (16 * np.pi)),
        "scalar": I_R / SIXTEEN_PI_32,
        "field": 2 * I_E / SIXTEEN_PI_32,
        "flux": 2 * I_F / SIXTEEN_PI_32,
        "closed": np.sqrt(np.pi / trace.area0) * Q * Q * (1 - np.exp(-t / 2)),
    }
    names = ["increment", "scalar", "field", "flux", "closed"]
    gaps = {f"{a}-{b}": lines[a] - lines[b] for a, b in zip(names, names[1:])}
    lines["gaps"] = gaps
    lines["min_gap"] = float(min(np.min(v) for v in gaps.values()))
    return lines


def charge_monotonicity_bound(trace: IMCFTrace, Q: float, tol: float = 1e-6) -> dict:
    """sqrt(pi/|S_0|) Q^2 (1 - e^{-t0/2}) and the leafwise chain behind it.

    Raises if the Hawking mass increment falls below the bound by more than
    tol at some leaf, which signals data violating the hypotheses.
    """
    chain = geroch_chain(trace, Q)
    bound = float(np.sqrt(np.pi / trace.area0) * Q * Q * (1 - np.exp(-trace.t0 / 2)))
    slack = chain["increment"] - chain["closed"]
    if np.min(slack) < -tol:
        raise ValueError(f"charged monotonicity violated by {-np.min(slack):.3e}")
    return {"bound": bound, "limit": float(np.sqrt(np.pi / trace.area0) * Q * Q),
            "min_slack": float(np.min(slack)), "chain_min_gap": chain["min_gap"],
            "increment_t0": float(chain["increment"][-1])}


def am_monotonicity_bound(trace: IMCFTrace, J: float, C: float, tol: float = 1e-6) -> dict:
    """(2 pi alpha)^2 / C^2 sqrt(4 pi / |S_0|) J^2 with the Holder chain audited leafwise.

    The chain compares, for each leaf, the integrals of |k|^2,
    k(eta/|eta|, nu)^2 and (integral of k(eta, nu))^2 / integral of |eta|^2.
    """
    if C <= 0:
        raise ValueError("circumference must be positive")
    value = float((2 * np.pi) ** 2 * trace.alpha2 / C**2 * np.sqrt(4 * np.pi / trace.area0) * J * J)
    lv = trace.leaves[trace.leaves <= trace.i0]
    with np.errstate(invalid="ignore", divide="ignore"):
        holder = np.where(trace.eta2[lv] > 0, trace.keta[lv] ** 2 / trace.eta2[lv], 0.0)
    gaps = {"k2-keta2": trace.k2[lv] - trace.keta2[lv], "keta2-holder": trace.keta2[lv] - holder}
    scale = max(1e-300, float(np.max(np.abs(trace.k2[lv]))))
    chain_ok = bool(all(np.min(v) >= -tol * scale for v in gaps.values()))
    # integral of the Holder line against the closed form it bounds
    _, I_H = _leaf_integral(trace, np.sqrt(trace.area) * np.where(trace.eta2 > 0, trace.keta**2 / np.where(
        trace.eta2 > 0, trace.eta2, 1.0), 0.0), trace.i0)
    return {"bound": value, "chain_ok": chain_ok,
            "chain_min_gap": float(min(np.min(v) for v in gaps.values())),
            "holder_integral": float(I_H[-1] / SIXTEEN_PI_32)}


def lambda_ratio(conformal_areas: np.ndarray, barred_areas: np.ndarray, horizon_area: float,
                 stop_index: int = None) -> dict:
    """sqrt(|S_t0|~ |Sigma_h|) / sup over t <= t0 of the barred leaf area.

    conformal_areas are the sphere areas in the conformal metric, which
    drives the weak flow; barred_areas are the same spheres measured in the
    unscaled metric.  The sup runs over the sampled flow leaves only.
    """
    ca = np.asarray(conformal_areas, dtype=float)
    ba = np.asarray(barred_areas, dtype=float)
    if horizon_area <= 0:
        raise ValueError("horizon area must be positive")
    _, jump = _hull_times(ca)
    stop = len(ca) - 1 if stop_index is None else stop_index
    leaves = np.flatnonzero(~jump[: stop + 1])
    i0 = int(leaves[-1])
    sup = float(np.max(ba[leaves]))
    if sup <= 0:
        raise ValueError("degenerate barred areas")
    lam = float(np.sqrt(ca[i0] * horizon_area) / sup)
    return {"lambda": lam, "i0": i0, "argmax": int(leaves[np.argmax(ba[leaves])]), "sup_area": sup}


def write_flow_csv(trace, path) -> None:
    """Write an IMCF or parabolic trace as plot-ready CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(trace, IMCFTrace):
            w.writerow(["t", "area", "m_H", "E2", "keta2", "jump"])
            for row in zip(trace.t, trace.area, trace.m_H, trace.E2, trace.keta2, trace.jump):
                w.writerow([repr(float(v)) for v in row[:-1]] + [int(row[-1])])
        else:
            w.writerow(["r", "area", "M", "u_mean", "jump"])
            q = trace.quantity()
            for ri, mi, ui in zip(trace.r, q, trace.u.mean(axis=1)):
                w.writerow([repr(float(ri)), repr(float(4 * np.pi * ri * ri)), repr(float(mi)),
                            repr(float(ui)), 0])
