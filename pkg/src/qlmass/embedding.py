"""Isometric embeddings of axisymmetric spheres into model spaces.

Three targets are supported: Euclidean space, the t = const slice of
Schwarzschild (in isotropic coordinates) and Minkowski space through the
projection of a graph over a time function tau.
"""

from dataclasses import dataclass, field
import csv

import numpy as np
from scipy.optimize import least_squares

from .surfaces import AxisymSurfaceData, gauss_curvature


@dataclass
class EmbeddedProfile:
    """Profile curve (rho(theta), z(theta)) of an embedded surface of revolution.

    kappa1 is the meridian curvature, kappa2 the azimuthal one, H0 their sum.
    V is the static potential of the target on the surface (1 for flat space)
    and ric_nn its Ricci curvature in the normal direction.
    """

    theta: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    V: np.ndarray
    ric_nn: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def H0(self) -> np.ndarray:
        return self.kappa1 + self.kappa2


def _bad_band(mask, theta) -> str:
    th = theta[mask]
    return f"[{th.min():.4f}, {th.max():.4f}]"


def embed_rotational(surf: AxisymSurfaceData, tol: float = 1e-10) -> EmbeddedProfile:
    """Embed a positively curved axisymmetric sphere as a surface of revolution."""
    g = surf.grid
    K = gauss_curvature(surf)
    if np.any(K <= 0):
        raise ValueError("Gauss curvature is not positive on theta in "
                         + _bad_band(K <= 0, g.theta))
    a, b = surf.a, surf.b
    db = g.d_odd(b)
    disc = a**2 - db**2
    scale = np.max(a**2)
    if np.any(disc < -tol * scale):
        raise ValueError("|b'| exceeds a on theta in " + _bad_band(disc < -tol * scale, g.theta))
    disc = np.maximum(disc, 0.0)
    # dz/dx = sqrt(a^2 - b'^2) / sin(theta) is smooth in x
    w = np.sqrt(disc) / g.sin
    z = g.antiderivative_x(w)
    z_south = float(g.interp(z, [-1.0])[0])
    z = z - 0.5 * z_south
    psi = np.arctan2(np.sqrt(disc), db)
    dpsi = 1.0 + g.d_odd_reduced((psi - g.theta) / g.sin)
    kappa1 = dpsi / a
    kappa2 = w / (a * surf.beta)
    # support function <x, n> / |x| about the midpoint of the axis
    dz = -np.sqrt(disc)
    cos_chi = (-dz * b + db * z) / (a * np.hypot(b, z))
    return EmbeddedProfile(g.theta.copy(), b.copy(), z, kappa1, kappa2,
                            np.ones_like(a), np.zeros_like(a),
                            {"target": "euclidean", "cos_chi": cos_chi})


def hat_metric(surf: AxisymSurfaceData, tau: np.ndarray) -> AxisymSurfaceData:
    """Metric sigma + d tau^2 of the projection of a Minkowski graph over tau."""
    dtau = surf.grid.d_even(tau)
    return surf.copy(a=np.sqrt(surf.a**2 + dtau**2))


def embed_hat(surf: AxisymSurfaceData, tau: np.ndarray, tol: float = 1e-10) -> EmbeddedProfile:
    """Embed sigma into Minkowski space with time function tau.

    The spatial part is the Euclidean embedding of the projected metric, so
    the returned curvatures are those of the projection.
    """
    prof = embed_rotational(hat_metric(surf, tau), tol)
    prof.meta["target"] = "minkowski"
    return prof


def convexity_check(surf: AxisymSurfaceData, tau: np.ndarray, tol: float = 0.0) -> dict:
    """Positivity of (1 + |grad tau|^2) K_hat, evaluated two independent ways.

    The left side comes from the curvature of the projected metric itself,
    the right side from K + det(hess tau) / (1 + |grad tau|^2) on sigma.
    """
    g = surf.grid
    dt = g.d_even(tau)
    grad2 = dt**2 / surf.a**2
    lhs = (1 + grad2) * gauss_curvature(hat_metric(surf, tau))
    rhs = (1 + grad2) * projected_curvature_formula(surf, tau)
    i = int(np.argmin(lhs))
    return {"ok": bool(lhs.min() > tol), "min": float(lhs.min()), "theta_min": float(g.theta[i]),
            "identity_residual": float(np.max(np.abs(lhs - rhs)))}


def projected_curvature_formula(surf: AxisymSurfaceData, tau: np.ndarray) -> np.ndarray:
    """Gauss curvature of the projected metric from the intrinsic data of sigma.

    Uses K_hat (1 + |grad tau|^2) = K + det(hess tau) / (1 + |grad tau|^2).
    """
    g = surf.grid
    a, b = surf.a, surf.b
    K = gauss_curvature(surf)
    dt = g.d_even(tau)
    d2t = g.d_odd(dt)
    da = g.d_even(a)
    db = g.d_odd(b)
    h11 = (d2t - da * dt / a) / a**2
    h22 = db * dt / (a**2 * b)
    grad2 = dt**2 / a**2
    return (K + h11 * h22 / (1 + grad2)) / (1 + grad2)


def embed_static_schwarzschild(surf: AxisymSurfaceData, m: float, tol: float = 1e-9) -> EmbeddedProfile:
    """Embed sigma into the exterior Schwarzschild slice of mass m.

    The target metric is psi^4 delta with psi = 1 + m / (2 R), and the
    surface is R = R_E(theta), polar angle vartheta(theta).  The unknowns are
    solved by nonlinear least squares starting from the Euclidean embedding.
    """
    if m < 0:
        raise ValueError("reference mass must be nonnegative")
    g = surf.grid
    flat = embed_rotational(surf)
    RE0 = np.hypot(flat.rho, flat.z)
    vt0 = np.arctan2(flat.rho, flat.z)
    n = g.order
    sin, cos = g.sin, g.cos

    def unpack(u):
        RE = u[:n]
        gv = u[n:]
        vt = g.theta + sin * gv
        dvt = 1.0 + cos * gv - sin**2 * g.dx(gv)
        dRE = g.d_even(RE)
        return RE, gv, vt, dvt, dRE

    def residual(u, mm):
        RE, gv, vt, dvt, dRE = unpack(u)
        psi = 1.0 + mm / (2.0 * RE)
        r1 = psi**2 * RE * np.sin(vt) / sin - surf.beta
        r2 = psi**2 * np.sqrt(dRE**2 + RE**2 * dvt**2) - surf.a
        return np.concatenate([r1, r2])

    u = np.concatenate([RE0, (vt0 - g.theta) / sin])
    steps = max(1, int(np.ceil(8 * m / max(RE0.min(), 1e-300))))
    for mm in np.linspace(0.0, m, steps + 1)[1:]:
        sol = least_squares(residual, u, args=(mm,), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            method="lm")
        u = sol.x
    res = np.max(np.abs(residual(u, m)))
    RE, gv, vt, dvt, dRE = unpack(u)
    if np.any(RE <= m / 2.0):
        raise ValueError("surface does not fit outside the Schwarzschild horizon")
    if res > tol * np.max(surf.a):
        raise ValueError(f"Schwarzschild embedding did not converge (residual {res:.2e})")
    # flat profile of the conformally related surface
    rho = RE * np.sin(vt)
    z = RE * np.cos(vt)
    drho = dRE * np.sin(vt) + RE * np.cos(vt) * dvt
    dz = dRE * np.cos(vt) - RE * np.sin(vt) * dvt
    # second derivatives through the parity-aware operators
    d2rho = g.d_even(drho)
    d2z = g.d_odd(dz)
    s = np.sqrt(drho**2 + dz**2)
    k1f = -(drho * d2z - dz * d2rho) / s**3
    k2f = -dz / (rho * s)
    cos_chi = (-dz * rho + drho * z) / (s * RE)
    psi = 1.0 + m / (2.0 * RE)
    dlnpsi = -(m / (2.0 * RE**2)) / psi * cos_chi
    kappa1 = (k1f + 2.0 * dlnpsi) / psi**2
    kappa2 = (k2f + 2.0 * dlnpsi) / psi**2
    V = (1.0 - m / (2.0 * RE)) / (1.0 + m / (2.0 * RE))
    r_areal = psi**2 * RE
    ric = (m / r_areal**3) * (1.0 - 3.0 * cos_chi**2) if m > 0 else np.zeros(n)
    return EmbeddedProfile(g.theta.copy(), psi**2 * rho, psi**2 * z, kappa1, kappa2, V, ric,
                            {"target": "schwarzschild", "m": m, "residual": float(res),
                             "R_E": RE, "cos_chi": cos_chi})


def convexity_report(prof: EmbeddedProfile) -> dict:
    """Star-shapedness and 2-convexity flags of an embedded profile."""
    k1, k2 = prof.kappa1, prof.kappa2
    RE = prof.meta.get("R_E")
    star = bool(np.all(prof.meta["cos_chi"] > 0))
    return {"star_shaped": star, "two_convex": bool(np.all(k1 + k2 > 0) and np.all(k1 * k2 > 0)),
            "ric_nn_max": float(np.max(prof.ric_nn)),
            "ric_nonpositive": bool(np.all(prof.ric_nn <= 1e-14)),
            "min_R_E": None if RE is None else float(np.min(RE))}


PROFILE_COLUMNS = ("theta", "rho", "z", "kappa1", "kappa2", "H0", "V")


def write_profile_csv(prof: EmbeddedProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PROFILE_COLUMNS)
        for row in zip(prof.theta, prof.rho, prof.z, prof.kappa1, prof.kappa2, prof.H0, prof.V):
            w.writerow([repr(float(v)) for v in row])
