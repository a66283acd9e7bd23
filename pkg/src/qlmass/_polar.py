"""Spectral polar grid for axisymmetric fields on a topological sphere.

Fields are sampled at Gauss-Legendre nodes in x = cos(theta).  A field that
is even under reflection through the poles is a smooth function of x; an odd
field is sin(theta) times a smooth function of x.  All derivatives are taken
through a Legendre interpolant, so smooth data is differentiated to spectral
accuracy.
"""

import numpy as np
from numpy.polynomial import legendre as L


class PolarGrid:
    """Gauss-Legendre collocation in x = cos(theta), ordered by increasing theta."""

    def __init__(self, order: int = 64):
        if order < 4:
            raise ValueError("polar order must be at least 4")
        self.order = int(order)
        x, w = L.leggauss(self.order)
        self.x = x[::-1].copy()
        self.w = w[::-1].copy()
        self.theta = np.arccos(self.x)
        self.sin = np.sqrt(1.0 - self.x**2)
        self.cos = self.x
        n = self.order
        V = L.legvander(self.x, n - 1)
        scale = (2.0 * np.arange(n) + 1.0) / 2.0
        # projection onto Legendre coefficients (exact for degree < 2n-1 products)
        self._proj = (scale[:, None] * V.T) * self.w[None, :]
        dV = np.empty_like(V)
        iV = np.empty_like(V)
        eye = np.eye(n)
        for k in range(n):
            dV[:, k] = L.legval(self.x, L.legder(eye[k]))
            iV[:, k] = L.legval(self.x, L.legint(eye[k], lbnd=1.0))
        self.Dx = dV @ self._proj
        self.Ix = iV @ self._proj

    def coeffs(self, f: np.ndarray) -> np.ndarray:
        """Legendre coefficients of a field that is smooth in x."""
        return self._proj @ np.asarray(f, dtype=float)

    def interp(self, f: np.ndarray, xq) -> np.ndarray:
        """Evaluate the interpolant of a smooth-in-x field at arbitrary x."""
        return L.legval(np.asarray(xq, dtype=float), self.coeffs(f))

    def dx(self, f: np.ndarray) -> np.ndarray:
        return self.Dx @ np.asarray(f, dtype=float)

    def d_even(self, f: np.ndarray) -> np.ndarray:
        """theta-derivative of an even field; the result is odd."""
        return -self.sin * self.dx(f)

    def d_odd(self, f: np.ndarray) -> np.ndarray:
        """theta-derivative of an odd field f = sin(theta) g; the result is even."""
        g = np.asarray(f, dtype=float) / self.sin
        return self.cos * g - self.sin**2 * self.dx(g)

    def d_odd_reduced(self, g: np.ndarray) -> np.ndarray:
        """theta-derivative of sin(theta) g given the reduced field g."""
        return self.cos * g - self.sin**2 * self.dx(g)

    def poles(self, f: np.ndarray) -> tuple:
        """Values of a smooth-in-x field at theta = 0 and theta = pi."""
        v = self.interp(f, [1.0, -1.0])
        return float(v[0]), float(v[1])

    def integrate(self, F: np.ndarray) -> float:
        """Integral of F sin(theta) dtheta over [0, pi]."""
        return float(np.dot(self.w, F))

    def surface_integral(self, F: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
        """Integral of F over the surface with metric a^2 dtheta^2 + b^2 dphi^2."""
        return 2.0 * np.pi * float(np.dot(self.w, F * a * b / self.sin))

    def antiderivative_x(self, f: np.ndarray) -> np.ndarray:
        """Integral from x = 1 (theta = 0) to x of a smooth-in-x field."""
        return self.Ix @ np.asarray(f, dtype=float)
