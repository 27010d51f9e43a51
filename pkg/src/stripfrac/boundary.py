"""Boundary data on the top of the strip and its propagated-regularity constants.

The trace analysis needs three numbers from the data u_A: a Lipschitz
constant L_A = sup|grad u_A|, a semiconvexity constant D_A (size of the
negative part of the smallest Hessian eigenvalue) and a semiconcavity
constant C_A (positive part of the largest).  They are estimated by dense
sampling of finite-difference gradients/Hessians, so user callables need no
analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["BoundaryData", "make_boundary", "gaussian_bump", "compact_bump", "dipole"]


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Scalar data on the lateral domain with sampled regularity constants."""

    func: Callable          # n=1: f(x); n=2: f(x1, x2); vectorized
    n: int
    L: float                # lateral half-extent the constants were sampled on
    L_A: float
    D_A: float
    C_A: float
    max_abs: float
    decay_tol: float = 1e-8
    name: str = "custom"
    params: dict = None

    def __call__(self, *coords):
        return np.asarray(self.func(*coords), dtype=float)

    def values_on(self, xs, second_axis=None):
        if self.n == 1:
            return self(xs)
        X1, X2 = np.meshgrid(xs, xs if second_axis is None else second_axis, indexing="ij")
        return self(X1, X2)

    def check_decay(self, xs) -> float:
        """Max |u_A| on the lateral boundary of [-L, L]^n (must be <= decay_tol)."""
        if self.n == 1:
            edge = float(max(abs(self(xs[0])), abs(self(xs[-1]))))
        else:
            vals = self.values_on(xs)
            edge = float(max(np.abs(vals[0, :]).max(), np.abs(vals[-1, :]).max(),
                             np.abs(vals[:, 0]).max(), np.abs(vals[:, -1]).max()))
        if edge > self.decay_tol:
            raise ValueError(
                f"boundary data does not decay: max |u_A| on the lateral boundary "
                f"is {edge:.3g} > decay_tol {self.decay_tol:.3g}; increase L")
        return edge


def _sample_constants_1d(func, L, samples):
    x = np.linspace(-L, L, samples)
    h = 1e-4 * max(1.0, L)
    f = lambda t: np.asarray(func(t), dtype=float)
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    L_A = float(np.max(np.abs(d1)))
    D_A = float(np.max(np.maximum(-d2, 0.0)))
    C_A = float(np.max(np.maximum(d2, 0.0)))
    max_abs = float(np.max(np.abs(f(x))))
    return L_A, D_A, C_A, max_abs


def _sample_constants_2d(func, L, samples):
    x = np.linspace(-L, L, samples)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    h = 1e-4 * max(1.0, L)
    f = lambda a, b: np.asarray(func(a, b), dtype=float)
    f0 = f(X1, X2)
    fx = (f(X1 + h, X2) - f(X1 - h, X2)) / (2 * h)
    fy = (f(X1, X2 + h) - f(X1, X2 - h)) / (2 * h)
    fxx = (f(X1 + h, X2) - 2 * f0 + f(X1 - h, X2)) / h**2
    fyy = (f(X1, X2 + h) - 2 * f0 + f(X1, X2 - h)) / h**2
    fxy = (f(X1 + h, X2 + h) - f(X1 + h, X2 - h) - f(X1 - h, X2 + h) + f(X1 - h, X2 - h)) / (4 * h**2)
    L_A = float(np.max(np.hypot(fx, fy)))
    # symmetric 2x2 eigenvalues
    tr = 0.5 * (fxx + fyy)
    disc = np.sqrt(np.maximum(0.25 * (fxx - fyy) ** 2 + fxy**2, 0.0))
    lam_min, lam_max = tr - disc, tr + disc
    D_A = float(np.max(np.maximum(-lam_min, 0.0)))
    C_A = float(np.max(np.maximum(lam_max, 0.0)))
    max_abs = float(np.max(np.abs(f0)))
    return L_A, D_A, C_A, max_abs


def boundary_from_callable(func, n: int, L: float, samples: int = 4001,
                           decay_tol: float = 1e-8, name: str = "custom",
                           params: dict = None) -> BoundaryData:
    if n == 1:
        L_A, D_A, C_A, max_abs = _sample_constants_1d(func, L, samples)
    elif n == 2:
        L_A, D_A, C_A, max_abs = _sample_constants_2d(func, L, min(samples, 513))
    else:
        raise ValueError("n must be 1 or 2")
    return BoundaryData(func=func, n=n, L=float(L), L_A=L_A, D_A=D_A, C_A=C_A,
                        max_abs=max_abs, decay_tol=decay_tol, name=name,
                        params=dict(params or {}))


# ----------------------------------------------------------------------
# named families (all C^2 with decay; compact_bump/dipole are compactly
# supported, so any L beyond the support satisfies the decay requirement
# exactly)
# ----------------------------------------------------------------------

def _radial(func_r, n):
    if n == 1:
        return lambda x: func_r(np.abs(np.asarray(x, dtype=float)))
    return lambda x1, x2: func_r(np.hypot(np.asarray(x1, dtype=float),
                                          np.asarray(x2, dtype=float)))


def gaussian_bump(n, center=0.0, width=0.5, amplitude=1.0):
    c, w, a = float(center), float(width), float(amplitude)
    if w <= 0:
        raise ValueError("width must be positive")
    def fr(r):
        return a * np.exp(-((r - 0.0) ** 2) / (2 * w**2))
    if n == 1:
        return lambda x: a * np.exp(-((np.asarray(x, dtype=float) - c) ** 2) / (2 * w**2))
    return lambda x1, x2: a * np.exp(-((np.asarray(x1, dtype=float) - c) ** 2
                                       + np.asarray(x2, dtype=float) ** 2) / (2 * w**2))


def compact_bump(n, center=0.0, width=0.5, amplitude=1.0):
    """Smooth bump supported on |x - center| < width, peak value = amplitude."""
    c, w, a = float(center), float(width), float(amplitude)
    if w <= 0:
        raise ValueError("width must be positive")

    def fr(d):
        d = np.asarray(d, dtype=float)
        out = np.zeros_like(d)
        m = d < w
        out[m] = a * np.exp(1.0 - w**2 / (w**2 - d[m] ** 2))
        return out

    if n == 1:
        return lambda x: fr(np.abs(np.asarray(x, dtype=float) - c))
    return lambda x1, x2: fr(np.hypot(np.asarray(x1, dtype=float) - c,
                                      np.asarray(x2, dtype=float)))


def dipole(n, separation=1.0, amplitude=1.0, width=0.4):
    """bump(x - a) - bump(x + a) with a = separation/2: two opposite phases."""
    a = float(separation) / 2.0
    pos = compact_bump(n, center=a, width=width, amplitude=amplitude)
    neg = compact_bump(n, center=-a, width=width, amplitude=amplitude)
    if n == 1:
        return lambda x: pos(x) - neg(x)
    return lambda x1, x2: pos(x1, x2) - neg(x1, x2)


_BOUNDARY_FAMILIES = {
    "gaussian": gaussian_bump,
    "compact_bump": compact_bump,
    "dipole": dipole,
    "zero": lambda n, **kw: ((lambda x: np.zeros_like(np.asarray(x, dtype=float)))
                             if n == 1 else
                             (lambda x1, x2: np.zeros_like(np.asarray(x1, dtype=float)))),
}


def make_boundary(family: str, n: int, L: float, decay_tol: float = 1e-8,
                  **params) -> BoundaryData:
    """Instantiate a named boundary family and sample its constants on [-L, L]^n."""
    if family not in _BOUNDARY_FAMILIES:
        raise ValueError(f"unknown boundary family {family!r}; known: {sorted(_BOUNDARY_FAMILIES)}")
    func = _BOUNDARY_FAMILIES[family](n, **params)
    return boundary_from_callable(func, n, L, decay_tol=decay_tol, name=family, params=params)
