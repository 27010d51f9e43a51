"""Subtracted, evenly reflected field v on the full strip.

Near a crack-tip with nonnegative opening the object of all frequency and
blow-up analysis is v = u - g'(0+) y reflected evenly across y=0.  The
reflection copies values (exact evenness is a test asset); it never
re-solves below the plane.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .laws import CohesiveLaw
from .solver import Solution

__all__ = ["ReflectedField", "PhaseWindowError", "build_v", "flip_sign"]


class PhaseWindowError(ValueError):
    """The analysis window touches the negative phase; re-center it."""


@dataclass(eq=False)
class ReflectedField:
    """Even field sampled on [-L,L]^n x [-A,A]; treat as immutable.

    ``window`` restricts where the nonnegative-phase theory applies
    (lateral bounds per axis); balls used by the frequency machinery must
    stay inside it.  ``center_candidates`` are crack-tip abscissae found
    inside the window (empty for synthetic fields).
    """

    n: int
    xs: np.ndarray           # lateral axis (shared by both axes for n=2)
    ys: np.ndarray           # full vertical axis from -A to A, 0 is a node
    v: np.ndarray            # (mx, 2*my-1) or (mx, mx, 2*my-1)
    window: tuple            # ((lo, hi),) per lateral axis
    center_candidates: tuple = ()
    gp0: float = None

    def __post_init__(self):
        self._interp = None
        self._grads = None

    # -- geometry -------------------------------------------------------

    @property
    def L(self) -> float:
        return float(self.xs[-1])

    @property
    def A(self) -> float:
        return float(self.ys[-1])

    @property
    def hx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def hy(self) -> float:
        return float(self.ys[1] - self.ys[0])

    @property
    def j0(self) -> int:
        """Index of the y=0 row."""
        return (len(self.ys) - 1) // 2

    def lateral_margin(self, center) -> float:
        c = np.atleast_1d(np.asarray(center, dtype=float))
        return float(min(min(hi - c[k], c[k] - lo) for k, (lo, hi) in enumerate(self.window)))

    def max_ball_radius(self, center) -> float:
        return min(self.lateral_margin(center), self.A)

    # -- evaluation -------------------------------------------------------

    def _axes(self):
        return (self.xs, self.ys) if self.n == 1 else (self.xs, self.xs, self.ys)

    def v_at(self, pts: np.ndarray) -> np.ndarray:
        """Multilinear interpolation; pts shape (..., n+1), last coord is y."""
        if self._interp is None:
            self._interp = RegularGridInterpolator(self._axes(), self.v,
                                                   method="linear", bounds_error=True)
        return self._interp(pts)

    def grad_at(self, pts: np.ndarray) -> np.ndarray:
        """Gradient of v at points with y >= 0 (one-sided across the plane).

        Built from second-order differences of the upper-half samples; the
        |y|-type kink of v on y=0 makes the two-sided derivative meaningless
        there, so callers integrate over the upper half and double (every
        integrand in the identities is even).
        """
        if self._grads is None:
            j0 = self.j0
            up = self.v[..., j0:]
            ys_up = self.ys[j0:]
            comps = []
            for axis in range(self.n):
                comps.append(_central_diff(up, self.hx, axis))
            comps.append(_central_diff(up, self.hy, up.ndim - 1))
            axes_up = self._axes()[:-1] + (ys_up,)
            self._grads = [RegularGridInterpolator(axes_up, c, method="linear",
                                                   bounds_error=True) for c in comps]
        pts = np.asarray(pts, dtype=float)
        if np.any(pts[..., -1] < -1e-14):
            raise ValueError("grad_at is defined on the upper half y >= 0")
        pts = pts.copy()
        pts[..., -1] = np.maximum(pts[..., -1], 0.0)
        return np.stack([gi(pts) for gi in self._grads], axis=-1)

    def trace_values(self) -> np.ndarray:
        return self.v[..., self.j0]

    def dy_at_plane(self) -> np.ndarray:
        """One-sided d_y v(x, 0+), second order."""
        j0 = self.j0
        return (-3.0 * self.v[..., j0] + 4.0 * self.v[..., j0 + 1] - self.v[..., j0 + 2]) / (2.0 * self.hy)

    def superharmonic_defect(self) -> float:
        """Max positive discrete Laplacian on the plane (should be <= ~0).

        The even reflection makes v distributionally superharmonic: across
        y=0 the measure is 2 d_y v(x,0+) <= 0.  Discretely that is
        lap = lap_x(trace) + 2(v(x,hy) - v(x,0))/hy^2 up to O(h).
        """
        j0 = self.j0
        tr = self.v[..., j0]
        lap = 2.0 * (self.v[..., j0 + 1] - tr) / self.hy**2
        for axis in range(self.n):
            lap = lap + _second_diff_interior(tr, self.hx, axis)
        # lateral edges carry one-sided junk; score interior nodes only
        sl = tuple(slice(1, -1) for _ in range(self.n))
        return float(np.max(lap[sl]))

    @classmethod
    def from_function(cls, func, n, L, A, mx, my, window=None):
        """Sample an even closed-form v(x, y) on the reflected lattice."""
        xs = np.linspace(-L, L, mx)
        ys = np.linspace(-A, A, 2 * my - 1)
        if n == 1:
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            vals = np.asarray(func(X, Y), dtype=float)
        else:
            X1, X2, Y = np.meshgrid(xs, xs, ys, indexing="ij")
            vals = np.asarray(func(X1, X2, Y), dtype=float)
        win = window or tuple((-L, L) for _ in range(n))
        return cls(n=n, xs=xs, ys=ys, v=vals, window=tuple(win))


def _central_diff(arr, h, axis):
    out = np.empty_like(arr)
    sl = [slice(None)] * arr.ndim

    def at(s):
        sl2 = list(sl)
        sl2[axis] = s
        return tuple(sl2)

    out[at(slice(1, -1))] = (arr[at(slice(2, None))] - arr[at(slice(0, -2))]) / (2 * h)
    out[at(0)] = (-3 * arr[at(0)] + 4 * arr[at(1)] - arr[at(2)]) / (2 * h)
    out[at(-1)] = (3 * arr[at(-1)] - 4 * arr[at(-2)] + arr[at(-3)]) / (2 * h)
    return out


def _second_diff_interior(arr, h, axis):
    out = np.zeros_like(arr)
    sl = [slice(None)] * arr.ndim

    def at(s):
        sl2 = list(sl)
        sl2[axis] = s
        return tuple(sl2)

    out[at(slice(1, -1))] = (arr[at(slice(2, None))] - 2 * arr[at(slice(1, -1))]
                             + arr[at(slice(0, -2))]) / h**2
    return out


def build_v(sol: Solution, law: CohesiveLaw, window=None, open_tol: float = None) -> ReflectedField:
    """Subtract the linear ramp g'(0+) y and reflect evenly across y=0.

    ``window`` (lateral bounds per axis) must contain only the nonnegative
    phase of the trace; a negative-open node inside it raises
    PhaseWindowError with a hint to re-center (or flip_sign the solution).
    """
    grid = sol.grid
    open_tol = sol.open_tol if open_tol is None else open_tol
    if window is None:
        window = tuple((-grid.L, grid.L) for _ in range(grid.n))
    window = tuple((float(lo), float(hi)) for lo, hi in window)

    inside = _window_mask(grid, window)
    neg = (sol.trace < -open_tol) & inside
    if np.any(neg):
        raise PhaseWindowError(
            f"{int(np.count_nonzero(neg))} negative-phase trace nodes inside the "
            f"window {window}; re-center the window on the nonnegative phase "
            "(or analyze flip_sign(sol))")

    ramp = law.gp0 * grid.ys
    vtop = sol.u - ramp  # broadcasts over the last axis
    v = np.concatenate([vtop[..., ::-1][..., :-1], vtop], axis=-1)
    ys = np.concatenate([-grid.ys[::-1][:-1], grid.ys])

    cands = _crossings(sol, window, open_tol)
    return ReflectedField(n=grid.n, xs=grid.xs, ys=ys, v=v, window=window,
                          center_candidates=tuple(cands), gp0=law.gp0)


def _window_mask(grid, window):
    if grid.n == 1:
        lo, hi = window[0]
        return (grid.xs >= lo) & (grid.xs <= hi)
    X1, X2 = np.meshgrid(grid.xs, grid.xs, indexing="ij")
    (lo1, hi1), (lo2, hi2) = window
    return (X1 >= lo1) & (X1 <= hi1) & (X2 >= lo2) & (X2 <= hi2)


def _crossings(sol, window, open_tol):
    """Open/closed transition abscissae of the trace inside the window (n=1)."""
    if sol.grid.n != 1:
        return []
    xs = sol.grid.xs
    t = np.abs(sol.trace)
    opened = t > open_tol
    lo, hi = window[0]
    out = []
    for i in range(len(xs) - 1):
        if opened[i] == opened[i + 1]:
            continue
        a, b = t[i], t[i + 1]
        x = xs[i] + (xs[i + 1] - xs[i]) * (a - open_tol) / (a - b) if a != b else xs[i]
        if lo <= x <= hi:
            out.append(float(x))
    return out


def flip_sign(sol: Solution) -> Solution:
    """Mirror u -> -u (the negative-phase analysis is symmetric under it)."""
    return dataclasses.replace(
        sol, u=-sol.u, trace=-sol.trace, normal=-sol.normal, flux=-sol.flux)
