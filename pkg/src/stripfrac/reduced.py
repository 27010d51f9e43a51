"""Exact elimination of the harmonic interior: the trace-reduced quadratic form.

The discrete Dirichlet energy of the 5-point (n=1) / 7-point (n=2) harmonic
extension is a quadratic form in the bottom-trace values.  With homogeneous
Dirichlet lateral sides the form diagonalizes in the DST-I basis, and the
vertical elimination per lateral mode is a scalar continuant recurrence, so
assembling the reduced form costs O(modes * my) and applying its gradient
costs one forward+inverse transform.

Energy convention: trapezoid weights in the transverse directions give a
second-order-accurate natural boundary condition at y=0.  An edge in
direction d carries weight prod_{t != d}(h_t * theta_t) / h_d with
theta = 1/2 on the outermost transverse layers.  u_A is clamped to zero on
the lateral boundary (the data must decay there; see BoundaryData).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dst, dstn

from .boundary import BoundaryData
from .grid import StripGrid

__all__ = ["ReducedForm", "GridDegenerateError", "dirichlet_to_neumann"]


class GridDegenerateError(RuntimeError):
    """Vertical elimination became singular (should not happen on a valid grid)."""


def _ortho_dst(t, n):
    if n == 1:
        return dst(t, type=1, norm="ortho")
    return dstn(t, type=1, norm="ortho", axes=(0, 1))


# DST-I with norm="ortho" is unitary and symmetric, hence self-inverse.
_ortho_idst = _ortho_dst


@dataclass(eq=False)
class ReducedForm:
    """q(t) + linear(t) + const on interior bottom-trace values.

    ``P`` are the per-mode quadratic coefficients in the orthonormal DST
    basis (so the Hessian of the smooth part has eigenvalues exactly 2*P),
    ``B`` the cross coefficients against the transformed top data ``Ahat``.
    ``trace_weight`` is the lateral quadrature weight hx^n of one interior
    trace node, used to scale the nonsmooth term and to convert energy
    gradients into a discrete normal derivative.
    """

    grid: StripGrid
    P: np.ndarray
    B: np.ndarray
    Ahat: np.ndarray
    top_interior: np.ndarray
    const: float
    trace_weight: float
    _dk: np.ndarray
    _e: float

    # -- smooth part ---------------------------------------------------

    def energy_smooth(self, t: np.ndarray) -> float:
        X = _ortho_dst(np.asarray(t, dtype=float), self.grid.n)
        return float(np.sum(self.P * X * X) + 2.0 * np.sum(self.B * self.Ahat * X) + self.const)

    def grad_smooth(self, t: np.ndarray) -> np.ndarray:
        X = _ortho_dst(np.asarray(t, dtype=float), self.grid.n)
        return _ortho_idst(2.0 * self.P * X + 2.0 * self.B * self.Ahat, self.grid.n)

    def apply_quadratic(self, t: np.ndarray) -> np.ndarray:
        """S t, the homogeneous part of grad/2."""
        X = _ortho_dst(np.asarray(t, dtype=float), self.grid.n)
        return _ortho_idst(self.P * X, self.grid.n)

    @property
    def lipschitz(self) -> float:
        """Largest eigenvalue of the Hessian of the smooth part (exact)."""
        return float(2.0 * np.max(self.P))

    @property
    def lambda_min(self) -> float:
        return float(2.0 * np.min(self.P))

    def flux(self, t: np.ndarray, grad: np.ndarray = None) -> np.ndarray:
        """Scheme-consistent discrete normal derivative d_y u(x, 0).

        Stationarity of the full energy at an open trace node reads
        flux = g'(2|t|) sgn(t); at a stuck node |flux| <= g'(0+).
        """
        if grad is None:
            grad = self.grad_smooth(t)
        return -grad / (2.0 * self.trace_weight)

    # -- harmonic extension ---------------------------------------------

    def extend(self, t: np.ndarray) -> np.ndarray:
        """Full-field harmonic extension of the trace (n=1: (mx,my) array)."""
        g = self.grid
        n, mx, my = g.n, g.mx, g.my
        q = my - 2
        N = mx - 1
        scale = (2.0 / N) ** (n / 2.0)   # ortho coefficients -> sine-basis coefficients
        That = _ortho_dst(np.asarray(t, dtype=float), n) * scale
        Ahat_s = self.Ahat * scale
        e = self._e
        dk = self._dk.reshape(-1)
        nm = dk.size

        rhs = np.zeros((nm, q))
        rhs[:, 0] += e * That.reshape(-1)
        rhs[:, -1] += e * Ahat_s.reshape(-1)
        # Thomas algorithm, vectorized over modes; off-diagonals are -e
        cp = np.empty((nm, q))
        dp = np.empty((nm, q))
        cp[:, 0] = -e / dk
        dp[:, 0] = rhs[:, 0] / dk
        for j in range(1, q):
            den = dk + e * cp[:, j - 1]
            cp[:, j] = -e / den
            dp[:, j] = (rhs[:, j] + e * dp[:, j - 1]) / den
        phi = np.empty((nm, q))
        phi[:, -1] = dp[:, -1]
        for j in range(q - 2, -1, -1):
            phi[:, j] = dp[:, j] - cp[:, j] * phi[:, j + 1]

        if n == 1:
            u = np.zeros((mx, my))
            u[1:-1, 0] = t
            u[1:-1, -1] = self.top_interior
            for j in range(q):
                u[1:-1, j + 1] = _ortho_idst(phi[:, j] / scale, 1)
        else:
            u = np.zeros((mx, mx, my))
            u[1:-1, 1:-1, 0] = t
            u[1:-1, 1:-1, -1] = self.top_interior
            sh = (mx - 2, mx - 2)
            for j in range(q):
                u[1:-1, 1:-1, j + 1] = _ortho_idst(phi[:, j].reshape(sh) / scale, 2)
        return u

    # -- densified form (tiny grids; oracle cross-checks) ----------------

    def dense(self):
        """(S, b, c) with reduced energy = t^T S t + 2 b^T t + c, row-major trace."""
        nt = int(np.prod(self.grid.trace_shape))
        if nt > 4096:
            raise ValueError("dense() is for small grids only")
        S = np.empty((nt, nt))
        eye = np.eye(nt)
        for j in range(nt):
            S[:, j] = self.apply_quadratic(eye[:, j].reshape(self.grid.trace_shape)).reshape(-1)
        b = _ortho_idst(self.B * self.Ahat, self.grid.n).reshape(-1)
        return S, b, self.const


def _mode_coefficients(grid: StripGrid):
    """Per-mode vertical elimination via continuant ratios.

    For the tridiagonal mode matrix tridiag(-e, d_k, -e) of size q = my-2:
    corner entries of the inverse come from the ratio recurrence
    R_1 = d, R_p = d - e^2/R_{p-1}; (M^-1)_{11} = 1/R_q and
    (M^-1)_{1q} = e^{q-1}/prod R_p (computed as a stable product of e/R_p).
    """
    n, mx, my = grid.n, grid.mx, grid.my
    N = mx - 1
    q = my - 2
    hx, hy = grid.hx, grid.hy
    e = hx**n / hy
    k = np.arange(1, N)
    lam = 4.0 * np.sin(np.pi * k / (2.0 * N)) ** 2
    if n == 1:
        a = (hy / hx) * lam
    else:
        a = hy * (lam[:, None] + lam[None, :])
    d = a + 2.0 * e

    R = d.copy()
    prod = e / R
    for _ in range(q - 1):
        R = d - e * e / R
        prod = prod * (e / R)
    if not np.all(np.isfinite(R)) or np.any(R <= 0):
        raise GridDegenerateError("vertical elimination produced a non-positive pivot")
    G11 = 1.0 / R
    G1m = prod / e
    P = (0.5 * a + e) - e * e * G11
    B = -(e * e) * G1m
    return P, B, d, e


def dirichlet_to_neumann(grid: StripGrid, data: BoundaryData) -> ReducedForm:
    """Reduce the discrete Dirichlet energy to the bottom trace.

    For any trace vector t the returned form reproduces the energy of the
    harmonic extension with u = u_A on top and zero lateral sides; it is
    symmetric positive definite (P > 0 entrywise).
    """
    if data.n != grid.n:
        raise ValueError("boundary data dimension does not match the grid")
    data.check_decay(grid.xs)
    P, B, d, e = _mode_coefficients(grid)
    xs = grid.xs[1:-1]
    if grid.n == 1:
        top = np.asarray(data(xs), dtype=float)
    else:
        X1, X2 = np.meshgrid(xs, xs, indexing="ij")
        top = np.asarray(data(X1, X2), dtype=float)
    Ahat = _ortho_dst(top, grid.n)
    const = float(np.sum(P * Ahat * Ahat))
    return ReducedForm(grid=grid, P=P, B=B, Ahat=Ahat, top_interior=top,
                       const=const, trace_weight=grid.hx**grid.n, _dk=d, _e=e)
