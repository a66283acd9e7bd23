"""Quasi-local mass and angular momentum functionals on axisymmetric surfaces.

Conventions: the physical mean curvature vector is H nu - (Tr k) n with nu
the outward normal and n the future unit normal of the slice, and the
connection 1-form of a normal frame (e3, e4) is <nabla e3, e4>.  For the
(nu, n) frame this is -p(nu)^T, stored on the surface as alpha_theta and
alpha_phi.  A frame boosted by angle psi, e3 = cosh(psi) nu + ..., has
connection alpha_nu + d psi and <H, e3> = H cosh(psi) - (Tr k) sinh(psi).

The Minkowski reference surface is built from the embedding of the projected
metric sigma + d tau^2 together with the time function tau, and its normal
geometry is computed directly in the meridian 3-space (t, rho, z).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .embedding import EmbeddedProfile, convexity_check, embed_hat, embed_rotational
from .surfaces import AxisymSurfaceData, angular_momentum, charges, gauss_curvature, laplacian

SMALL_HVEC = 1e-10


def _check_convex(s: AxisymSurfaceData) -> None:
    if np.any(gauss_curvature(s) <= 0):
        raise ValueError("surface Gauss curvature is not positive")


def brown_york(s: AxisymSurfaceData, prof: EmbeddedProfile = None) -> float:
    """Brown-York mass (1/8pi) int (H0 - H) dA against the Euclidean embedding."""
    if np.any(s.H <= 0):
        raise ValueError("surface is not mean convex")
    _check_convex(s)
    prof = embed_rotational(s) if prof is None else prof
    return s.integrate(prof.H0 - s.H) / (8.0 * np.pi)


def liu_yau(s: AxisymSurfaceData, prof: EmbeddedProfile = None) -> float:
    """Liu-Yau energy (1/8pi) int (H0 - |H|) dA; needs a spacelike mean curvature vector."""
    Hn = s.Hvec
    _check_convex(s)
    prof = embed_rotational(s) if prof is None else prof
    return s.integrate(prof.H0 - Hn) / (8.0 * np.pi)


def static_mass(s: AxisymSurfaceData, prof_static: EmbeddedProfile, kind: str = "LY") -> float:
    """Static-reference mass (1/8pi) int V (H_s - H) dA, or with |H| for kind LY."""
    kind = kind.upper()
    if kind == "BY":
        if np.any(s.H <= 0):
            raise ValueError("surface is not mean convex")
        Hphys = s.H
    elif kind == "LY":
        Hphys = s.Hvec
    else:
        raise ValueError(f"unknown static mass kind {kind!r}")
    return s.integrate(prof_static.V * (prof_static.H0 - Hphys)) / (8.0 * np.pi)


def _asinh(x: np.ndarray) -> np.ndarray:
    """Inverse hyperbolic sine with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = x * small
    return np.where(small, xs - xs**3 / 6.0 + 3.0 * xs**5 / 40.0, np.arcsinh(x))


def _mink(u, v):
    return -u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def reference_normal_geometry(s: AxisymSurfaceData, tau: np.ndarray, prof_hat: EmbeddedProfile = None) -> dict:
    """Norm of H0 and the theta component of its connection 1-form.

    The reference surface is (tau, rho_hat, z_hat) in Minkowski space.  Its
    mean curvature vector is oriented outward like the physical one, and the
    connection is taken in the frame e3 = H0 / |H0| with e4 future timelike.
    """
    g = s.grid
    prof = embed_hat(s, tau) if prof_hat is None else prof_hat
    a, rho, z = s.a, prof.rho, prof.z
    t1, r1, z1 = g.d_even(tau), g.d_odd(rho), g.d_even(z)
    X1 = np.array([t1, r1, z1])
    v = np.array([g.d_odd(t1), g.d_even(r1), g.d_odd(z1)]) / a**2
    v[1] -= 1.0 / rho
    Hv = -(v - _mink(v, X1) / a**2 * X1)
    H0sq = _mink(Hv, Hv)
    if np.any(H0sq <= 0):
        raise ValueError("reference mean curvature vector is not spacelike")
    H0 = np.sqrt(H0sq)
    e3 = Hv / H0
    c = np.cross(X1.T, e3.T).T
    e4 = np.array([-c[0], c[1], c[2]])
    e4 = e4 / np.sqrt(-_mink(e4, e4))
    e4 = e4 * np.sign(e4[0])
    de3 = np.array([g.d_even(e3[0]), g.d_odd(e3[1]), g.d_even(e3[2])])
    return {"Hvec0": H0, "alpha0_theta": _mink(de3, e4), "profile": prof}


@dataclass
class WangYauEvaluation:
    """Wang-Yau energy of a surface for one time function.

    h0 and h are the reference and physical generalized mean curvatures,
    rho the mass density and j_theta the theta component of the momentum
    1-form (its phi component is alpha_phi, since the reference surface
    carries no twist).  psi_bar is the boost angle of the frame fixed by
    the time function, measured from (nu, n).
    """

    tau: np.ndarray
    h0: np.ndarray
    h: np.ndarray
    rho: np.ndarray
    j_theta: np.ndarray
    j_phi: np.ndarray
    energy: float
    energy_rho_form: float
    psi_bar: np.ndarray
    surface: AxisymSurfaceData
    meta: dict = field(default_factory=dict)

    @property
    def form_gap(self) -> float:
        return abs(self.energy - self.energy_rho_form)

    @property
    def rho_mass(self) -> float:
        return self.surface.integrate(self.rho) / (8.0 * np.pi)

    def divergence_j(self) -> np.ndarray:
        s = self.surface
        g = s.grid
        # (1/ab) d/dtheta(b j / a) written through the smooth flux (1-x^2) beta j / (a sin)
        flux = g.sin * s.beta * self.j_theta / s.a
        return -g.dx(flux) / (s.a * s.beta)


def _tau_fields(s: AxisymSurfaceData, tau: np.ndarray) -> tuple:
    t1 = s.grid.d_even(tau)
    S = np.sqrt(1.0 + t1**2 / s.a**2)
    return t1, S, laplacian(s, tau)


def generalized_mean_curvature(s: AxisymSurfaceData, tau: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Physical generalized mean curvature in the frame boosted by psi from (nu, n)."""
    t1, S, _ = _tau_fields(s, tau)
    Hdot = s.H * np.cosh(psi) - s.trk * np.sinh(psi)
    alpha = s.alpha_theta + s.grid.d_even(psi)
    return S * Hdot - alpha * t1 / s.a**2


def wang_yau_energy(s: AxisymSurfaceData, tau, prof_hat: EmbeddedProfile = None,
                    jang_psi: np.ndarray = None, check_admissible: bool = True) -> WangYauEvaluation:
    """Wang-Yau energy for the time function tau, evaluated in two forms.

    The first form integrates h0 - h with h0 from the projected embedding;
    the second integrates rho + <j, grad tau> with the reference normal
    geometry computed in Minkowski space.  jang_psi, when given, is the boost
    angle of the frame from a Jang solution and h must be positive there.
    """
    g = s.grid
    tau = np.broadcast_to(np.asarray(tau, dtype=float), g.theta.shape).copy()
    Hn = s.Hvec
    if np.any(Hn < SMALL_HVEC):
        raise ValueError("mean curvature vector is too small to fix the frame")
    if check_admissible:
        cc = convexity_check(s, tau)
        if not cc["ok"]:
            raise ValueError(f"time function violates the convexity condition (min {cc['min']:.3e})")
        if np.any(s.theta_plus <= 0) or np.any(s.theta_minus <= 0):
            raise ValueError("surface is trapped")
    ref = reference_normal_geometry(s, tau, prof_hat)
    H0, al0, prof = ref["Hvec0"], ref["alpha0_theta"], ref["profile"]
    t1, S, Lt = _tau_fields(s, tau)
    a = s.a
    chi = np.arcsinh(s.trk / Hn)
    bphys = Lt / (S * Hn)
    bref = Lt / (S * H0)
    psi_bar = chi - _asinh(bphys)
    h = S * np.sqrt(Hn**2 + Lt**2 / S**2) - (s.alpha_theta + g.d_even(psi_bar)) * t1 / a**2
    h0 = S * prof.H0
    E1 = s.integrate(h0 - h) / (8.0 * np.pi)
    # stable difference of the two square roots
    A0 = np.sqrt(H0**2 + Lt**2 / S**2)
    A1 = np.sqrt(Hn**2 + Lt**2 / S**2)
    rho = (H0**2 - Hn**2) / (A0 + A1) / S
    alH = s.alpha_theta + g.d_even(chi)
    # alpha terms enter with the sign that makes both energy forms agree
    j_theta = rho * t1 - g.d_even(_asinh(rho * Lt / (H0 * Hn))) - al0 + alH
    j_phi = s.alpha_phi.copy()
    E2 = s.integrate(rho + j_theta * t1 / a**2) / (8.0 * np.pi)
    ref_identity = S * A0 - (al0 - g.d_even(_asinh(bref))) * t1 / a**2 - h0
    meta = {"reference_identity_residual": float(np.max(np.abs(ref_identity))),
            "Hvec0_min": float(H0.min())}
    if jang_psi is not None:
        hj = generalized_mean_curvature(s, tau, np.asarray(jang_psi, dtype=float))
        meta["h_jang_min"] = float(hj.min())
        if check_admissible and hj.min() <= 0:
            raise ValueError("generalized mean curvature in the Jang frame is not positive")
    return WangYauEvaluation(tau, h0, h, rho, j_theta, j_phi, E1, E2, psi_bar, s, meta)


def optimal_embedding_residual(ev: WangYauEvaluation) -> dict:
    """Sup-norm of div j and the integral of div j (zero by the divergence theorem)."""
    d = ev.divergence_j()
    return {"sup": float(np.max(np.abs(d))), "integral": ev.surface.integrate(d),
            "l2": float(np.sqrt(ev.surface.integrate(d**2)))}


def chen_wang_yau_J(ev: WangYauEvaluation, s: AxisymSurfaceData = None) -> float:
    """Chen-Wang-Yau angular momentum of an axisymmetric evaluation.

    For an axisymmetric reference <eta, T0> = 0, so only j(eta) survives.
    The momentum 1-form is built from alpha = <nabla nu, n> = -k(., nu), the
    opposite orientation to the k(eta, nu) convention of the other angular
    momenta, so the integral is negated to report the same rotation sense.
    """
    s = ev.surface if s is None else s
    return -s.integrate(ev.j_phi) / (8.0 * np.pi)


def cosine_time_function(s: AxisymSurfaceData, coeffs) -> np.ndarray:
    """tau = R sum_k c_k cos(k theta) with R the area radius of the surface."""
    R = np.sqrt(s.integrate(1.0) / (4.0 * np.pi))
    th = s.grid.theta
    return R * sum(c * np.cos((k + 1) * th) for k, c in enumerate(coeffs))


def wang_yau_mass(s: AxisymSurfaceData, n_coeffs: int = 4, bound: float = 0.3, seed: int = 0,
                  maxiter: int = 400, x0=None) -> dict:
    """Minimize the Wang-Yau energy over a truncated cosine family of time functions.

    The minimum is an upper bound for the Wang-Yau mass.  Inadmissible
    members are rejected.  Nelder-Mead starts at x0 (default tau = 0) with
    a simplex perturbed by a seeded generator, so runs are reproducible.
    """
    if n_coeffs < 1 or bound <= 0:
        raise ValueError("need at least one coefficient and a positive bound")
    cache = {}

    def energy(c):
        key = tuple(np.round(c, 14))
        if key in cache:
            return cache[key]
        if np.any(np.abs(c) > bound):
            val = np.inf
        else:
            try:
                val = wang_yau_energy(s, cosine_time_function(s, c)).energy
            except ValueError:
                val = np.inf
        cache[key] = val
        return val

    x0 = np.zeros(n_coeffs) if x0 is None else np.asarray(x0, dtype=float)
    if not np.isfinite(energy(x0)):
        raise ValueError("starting time function is not admissible")
    rng = np.random.default_rng(seed)
    step = 0.05 * bound
    simplex = [x0] + [x0 + step * (np.eye(n_coeffs)[i] + 0.1 * rng.standard_normal(n_coeffs))
                      for i in range(n_coeffs)]
    res = minimize(energy, x0, method="Nelder-Mead",
                   options={"initial_simplex": np.array(simplex), "xatol": 1e-8, "fatol": 1e-12,
                            "maxiter": maxiter})
    best = res.x if res.fun <= energy(x0) else x0
    ev = wang_yau_energy(s, cosine_time_function(s, best))
    return {"m_WY_upper": ev.energy, "rho_mass": ev.rho_mass, "coeffs": best, "tau": ev.tau,
            "evaluation": ev, "residual": optimal_embedding_residual(ev), "evaluations": len(cache),
            "upper_bound": True}


def mass_report(s: AxisymSurfaceData, wy_sweep: bool = False, seed: int = 0) -> dict:
    """Masses, angular momenta and charges of one surface."""
    out = {"area": s.integrate(1.0)}
    prof = embed_rotational(s)
    out["m_BY"] = brown_york(s, prof) if np.all(s.H > 0) else None
    out["m_LY"] = liu_yau(s, prof)
    ev = wang_yau_energy(s, np.zeros(s.grid.order), check_admissible=False)
    out["E_WY_tau0"] = ev.energy
    if wy_sweep:
        wy = wang_yau_mass(s, seed=seed)
        out["m_WY_upper"] = wy["m_WY_upper"]
        out["wy_coeffs"] = [float(c) for c in wy["coeffs"]]
        out["optimality_residual"] = wy["residual"]["sup"]
    out["J_BY"] = angular_momentum(s, "BY")
    out["J_LY"] = angular_momentum(s, "LY")
    out["J_Komar"] = angular_momentum(s, "KOMAR") if s.komar is not None else None
    out["J_CWY"] = chen_wang_yau_J(ev)
    ch = charges(s)
    out["Q_e"], out["Q_b"] = ch.get("Q_e"), ch.get("Q_b")
    return out
