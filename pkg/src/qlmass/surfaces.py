"""Axisymmetric 2-surface data and its intrinsic geometry.

A surface is described by the induced metric a(theta)^2 dtheta^2 +
b(theta)^2 dphi^2 sampled on a :class:`PolarGrid`, together with the extrinsic
data of its embedding in an initial data set: mean curvature H along the
outward normal, tangential trace of k, the momentum 1-form p(nu)^T and the
normal electric and magnetic fields.
"""

from dataclasses import dataclass, field
import csv
import json

import numpy as np

from ._polar import PolarGrid


@dataclass
class AxisymSurfaceData:
    """Surface data on a polar grid.

    p_theta and p_phi are the coordinate components of p(nu)^T, so p_phi is
    k(eta, nu) for the rotational field eta = d/dphi.  A_phi is the azimuthal
    component of an electromagnetic potential, used only for the field
    contribution to angular momentum.  komar holds the density of the
    spacetime Komar integrand when the surface comes from a known spacetime.
    """

    grid: PolarGrid
    a: np.ndarray
    b: np.ndarray
    H: np.ndarray
    trk: np.ndarray
    p_theta: np.ndarray = None
    p_phi: np.ndarray = None
    E_nu: np.ndarray = None
    B_nu: np.ndarray = None
    A_phi: np.ndarray = None
    komar: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.grid.order
        zeros = np.zeros(n)
        for name in ("a", "b", "H", "trk", "p_theta", "p_phi", "E_nu", "B_nu", "A_phi"):
            v = getattr(self, name)
            v = zeros.copy() if v is None else np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
            setattr(self, name, v)
        if self.komar is not None:
            self.komar = np.broadcast_to(np.asarray(self.komar, dtype=float), (n,)).copy()
        if np.any(self.a <= 0) or np.any(self.b <= 0):
            raise ValueError("metric functions a and b must be positive at all nodes")

    @property
    def beta(self) -> np.ndarray:
        """Reduced azimuthal radius b / sin(theta), smooth across the poles."""
        return self.b / self.grid.sin

    @property
    def theta_plus(self) -> np.ndarray:
        return self.H + self.trk

    @property
    def theta_minus(self) -> np.ndarray:
        return self.H - self.trk

    @property
    def embeddable(self) -> bool:
        """True when the Gauss curvature is positive at every node."""
        return bool(np.all(gauss_curvature(self) > 0))

    @property
    def alpha_theta(self) -> np.ndarray:
        """Connection 1-form of the (nu, n) frame, theta component."""
        return -self.p_theta

    @property
    def alpha_phi(self) -> np.ndarray:
        return -self.p_phi

    @property
    def Hvec(self) -> np.ndarray:
        """Norm of the mean curvature vector sqrt(H^2 - (Tr k)^2)."""
        d = self.H**2 - self.trk**2
        if np.any(d < 0):
            raise ValueError("mean curvature vector is not spacelike on this surface")
        return np.sqrt(d)

    def integrate(self, F) -> float:
        """Surface integral of a field over the sphere."""
        return self.grid.surface_integral(np.broadcast_to(F, self.a.shape), self.a, self.b)

    def copy(self, **changes) -> "AxisymSurfaceData":
        fields = dict(
            grid=self.grid, a=self.a, b=self.b, H=self.H, trk=self.trk,
            p_theta=self.p_theta, p_phi=self.p_phi, E_nu=self.E_nu, B_nu=self.B_nu,
            A_phi=self.A_phi, komar=self.komar, meta=dict(self.meta),
        )
        fields.update(changes)
        return AxisymSurfaceData(**fields)


def round_sphere(r: float, order: int = 64, H=None, **kw) -> AxisymSurfaceData:
    """Round sphere of radius r; H defaults to the Euclidean value 2/r."""
    if r <= 0:
        raise ValueError("radius must be positive")
    g = PolarGrid(order)
    H = 2.0 / r if H is None else H
    return AxisymSurfaceData(g, a=np.full(order, r), b=r * g.sin, H=H, trk=kw.pop("trk", 0.0), **kw)


def area(surf: AxisymSurfaceData) -> float:
    return surf.integrate(1.0)


def circumference(surfs, samples: int = 2001) -> float:
    """Length of the longest rotation orbit, 2 pi max b, over one or several surfaces."""
    if isinstance(surfs, AxisymSurfaceData):
        surfs = [surfs]
    th = np.linspace(0.0, np.pi, samples)
    best = 0.0
    for surf in surfs:
        beta = surf.grid.interp(surf.beta, np.cos(th))
        best = max(best, float(np.max(np.sin(th) * beta)))
    return 2.0 * np.pi * best


def gauss_curvature(surf: AxisymSurfaceData) -> np.ndarray:
    """K = -b''/(a^2 b) + a' b'/(a^3 b)."""
    g = surf.grid
    a, b = surf.a, surf.b
    da = g.d_even(a)
    db = g.d_odd(b)
    d2b = g.d_even(db)
    return -d2b / (a**2 * b) + da * db / (a**3 * b)


def gauss_bonnet(surf: AxisymSurfaceData) -> float:
    """Total curvature; equals 4 pi for a smooth sphere."""
    return surf.integrate(gauss_curvature(surf))


def laplacian_matrix(surf: AxisymSurfaceData) -> np.ndarray:
    """Matrix of the Laplace-Beltrami operator on axisymmetric even fields."""
    g = surf.grid
    inner = (1.0 - g.x**2) * surf.beta / surf.a
    return (1.0 / (surf.a * surf.beta))[:, None] * (g.Dx @ (inner[:, None] * g.Dx))


def laplacian(surf: AxisymSurfaceData, f: np.ndarray) -> np.ndarray:
    return laplacian_matrix(surf) @ np.asarray(f, dtype=float)


def _solve_flux_form(surf: AxisymSurfaceData, flux: np.ndarray) -> np.ndarray:
    """Solve d/dx((1-x^2) beta/a f_x) = -d/dx(flux) for f with area-weighted mean zero.

    Both fluxes vanish at the poles, so regularity fixes the integration
    constant to zero and f_x = -flux a / ((1-x^2) beta) pointwise.
    """
    g = surf.grid
    fx = -flux * surf.a / ((1.0 - g.x**2) * surf.beta)
    f = g.antiderivative_x(fx)
    row = g.w * surf.a * surf.beta
    return f - np.dot(row, f) / row.sum()


def hodge_decompose(surf: AxisymSurfaceData) -> dict:
    """Split p(nu)^T = d(upsilon) + *d(varpi) with mean-zero potentials.

    Uses the analyst's Laplacian, so the potentials solve
    lap(upsilon) = div p and lap(varpi) = *dp with the orientation
    (theta, phi).  Returns both potentials and the phi component of the
    coexact part j = *d(varpi).
    """
    g = surf.grid
    q = surf.p_theta / g.sin
    upsilon = _solve_flux_form(surf, (1.0 - g.x**2) * surf.beta * q / surf.a)
    varpi = _solve_flux_form(surf, surf.p_phi)
    j_phi = surf.b / surf.a * g.d_even(varpi)
    j_theta = np.zeros_like(j_phi)
    return {"upsilon": upsilon, "varpi": varpi, "j_theta": j_theta, "j_phi": j_phi,
            "exact_theta": g.d_even(upsilon)}


def charge(surf: AxisymSurfaceData) -> float:
    """Electric charge (1/4pi) of the flux of E through the surface."""
    return surf.integrate(surf.E_nu) / (4.0 * np.pi)


def magnetic_charge(surf: AxisymSurfaceData) -> float:
    return surf.integrate(surf.B_nu) / (4.0 * np.pi)


def charges(surf: AxisymSurfaceData) -> dict:
    qe, qb = charge(surf), magnetic_charge(surf)
    return {"Q_e": qe, "Q_b": qb, "Q2": qe * qe + qb * qb}


def hodge_residual(surf: AxisymSurfaceData, hp: dict) -> float:
    """Sup-norm mismatch between p(nu)^T and d(upsilon) + *d(varpi)."""
    return float(max(np.max(np.abs(hp["exact_theta"] - surf.p_theta)),
                     np.max(np.abs(hp["j_phi"] - surf.p_phi))))


def field_angular_momentum(surf: AxisymSurfaceData) -> float:
    """Electromagnetic contribution -(1/4pi) of the integral of A(eta) E(nu)."""
    return -surf.integrate(surf.A_phi * surf.E_nu) / (4.0 * np.pi)


def angular_momentum(surf: AxisymSurfaceData, which: str = "BY", include_field: bool = False) -> float:
    """Angular momentum about the symmetry axis.

    BY integrates p(eta, nu), LY integrates the coexact part j(eta) of the
    Hodge decomposition and Komar integrates the spacetime Komar density.
    With include_field the electromagnetic term of the potential is added.
    """
    which = which.upper()
    if which == "BY":
        val = surf.integrate(surf.p_phi) / (8.0 * np.pi)
    elif which == "LY":
        val = surf.integrate(hodge_decompose(surf)["j_phi"]) / (8.0 * np.pi)
    elif which == "KOMAR":
        if surf.komar is None:
            raise ValueError("surface carries no Komar density")
        val = surf.integrate(surf.komar) / (8.0 * np.pi)
    else:
        raise ValueError(f"unknown angular momentum definition {which!r}")
    if include_field:
        val += field_angular_momentum(surf)
    return val


CSV_COLUMNS = ("theta", "a", "b", "H", "TrSigma_k", "p_theta", "p_phi",
               "alpha_theta", "E_nu", "B_nu", "A_phi")


def write_surface_csv(surf: AxisymSurfaceData, path) -> None:
    """Write surface data with a one-line JSON metadata header."""
    meta = dict(surf.meta)
    meta["polar_order"] = surf.grid.order
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps(meta, default=float) + "\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for i in range(surf.grid.order):
            w.writerow([repr(float(v)) for v in (
                surf.grid.theta[i], surf.a[i], surf.b[i], surf.H[i], surf.trk[i],
                surf.p_theta[i], surf.p_phi[i], surf.alpha_theta[i], surf.E_nu[i],
                surf.B_nu[i], surf.A_phi[i])])


def read_surface_csv(path) -> AxisymSurfaceData:
    """Read a file written by :func:`write_surface_csv`."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError("missing metadata header")
        meta = json.loads(first[1:])
        rows = list(csv.DictReader(fh))
    order = int(meta.pop("polar_order"))
    g = PolarGrid(order)
    if len(rows) != order:
        raise ValueError("row count does not match the polar order")
    col = {k: np.array([float(r[k]) for r in rows]) for k in CSV_COLUMNS}
    if not np.allclose(col["theta"], g.theta, atol=1e-12):
        raise ValueError("theta column does not match Gauss-Legendre nodes")
    return AxisymSurfaceData(g, a=col["a"], b=col["b"], H=col["H"], trk=col["TrSigma_k"],
                             p_theta=col["p_theta"], p_phi=col["p_phi"], E_nu=col["E_nu"],
                             B_nu=col["B_nu"], A_phi=col["A_phi"], meta=meta)
