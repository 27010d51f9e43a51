"""Independent brute-force and closed-form references.

Everything here is deliberately written without touching the fast solver
paths: the stiffness matrix is assembled edge by edge and eliminated with
dense linear algebra, the tiny-instance minimizer is golden-section
coordinate descent, and the synthetic fields are analytic formulas sampled
onto a lattice.  Tests cross-check the production code against these.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryData
from .extension import ReflectedField
from .grid import StripGrid
from .laws import CohesiveLaw

__all__ = [
    "OracleSizeError",
    "dense_schur",
    "brute_force_minimize",
    "SyntheticField",
    "closed_form_fields",
]


class OracleSizeError(ValueError):
    """Instance too large for the brute-force path."""


# ----------------------------------------------------------------------
# dense Schur complement of the full stiffness matrix
# ----------------------------------------------------------------------

def _node_list(grid):
    if grid.n == 1:
        return [(i, j) for i in range(grid.mx) for j in range(grid.my)]
    return [(i1, i2, j) for i1 in range(grid.mx) for i2 in range(grid.mx)
            for j in range(grid.my)]


def _edges(grid):
    """(node_a, node_b, weight) with trapezoid transverse weights."""
    mx, my = grid.mx, grid.my
    hx, hy = grid.hx, grid.hy

    def th(idx, m):
        return 0.5 if idx in (0, m - 1) else 1.0

    out = []
    if grid.n == 1:
        for j in range(my):
            for i in range(mx - 1):
                out.append(((i, j), (i + 1, j), th(j, my) * hy / hx))
        for i in range(mx):
            for j in range(my - 1):
                out.append(((i, j), (i, j + 1), th(i, mx) * hx / hy))
        return out
    for j in range(my):
        for i2 in range(mx):
            w = th(j, my) * th(i2, mx) * hy
            for i1 in range(mx - 1):
                out.append(((i1, i2, j), (i1 + 1, i2, j), w))
    for j in range(my):
        for i1 in range(mx):
            w = th(j, my) * th(i1, mx) * hy
            for i2 in range(mx - 1):
                out.append(((i1, i2, j), (i1, i2 + 1, j), w))
    for i1 in range(mx):
        for i2 in range(mx):
            w = th(i1, mx) * th(i2, mx) * hx * hx / hy
            for j in range(my - 1):
                out.append(((i1, i2, j), (i1, i2, j + 1), w))
    return out


def dense_schur(grid: StripGrid, data: BoundaryData):
    """(S, b, c): trace-reduced quadratic by dense block elimination.

    Reduced energy = t^T S t + 2 b^T t + c over row-major interior trace
    nodes.  u_A is clamped to zero on the lateral boundary, matching the
    production reduction.  Refuses grids above 10^4 nodes.
    """
    if grid.n_nodes > 10_000:
        raise OracleSizeError(f"{grid.n_nodes} nodes > 10^4: dense elimination refused")
    mx, my = grid.mx, grid.my
    xs = grid.xs

    def is_lateral_bdy(node):
        return any(node[k] in (0, mx - 1) for k in range(grid.n))

    def fixed_value(node):
        j = node[-1]
        if is_lateral_bdy(node):
            return 0.0
        if j == my - 1:
            if grid.n == 1:
                return float(data(xs[node[0]]))
            return float(data(xs[node[0]], xs[node[1]]))
        return None

    trace_ids = {}
    inter_ids = {}
    for node in _node_list(grid):
        if fixed_value(node) is not None:
            continue
        if node[-1] == 0:
            trace_ids[node] = len(trace_ids)
        else:
            inter_ids[node] = len(inter_ids)
    nt, ni = len(trace_ids), len(inter_ids)
    K = np.zeros((nt + ni, nt + ni))
    f = np.zeros(nt + ni)
    c = 0.0

    def dof(node):
        if node in trace_ids:
            return trace_ids[node]
        return nt + inter_ids[node]

    for a, bnode, w in _edges(grid):
        va, vb = fixed_value(a), fixed_value(bnode)
        if va is None and vb is None:
            da, db = dof(a), dof(bnode)
            K[da, da] += w
            K[db, db] += w
            K[da, db] -= w
            K[db, da] -= w
        elif va is None:
            da = dof(a)
            K[da, da] += w
            f[da] -= w * vb
            c += w * vb * vb
        elif vb is None:
            db = dof(bnode)
            K[db, db] += w
            f[db] -= w * va
            c += w * va * va
        else:
            c += w * (va - vb) ** 2

    Ktt = K[:nt, :nt]
    Ktw = K[:nt, nt:]
    Kww = K[nt:, nt:]
    ft, fw = f[:nt], f[nt:]
    sol_wt = np.linalg.solve(Kww, Ktw.T)
    sol_wf = np.linalg.solve(Kww, fw)
    S = Ktt - Ktw @ sol_wt
    b = ft - Ktw @ sol_wf
    c = c - fw @ sol_wf
    return S, b, float(c)


# ----------------------------------------------------------------------
# exhaustive tiny-instance minimizer
# ----------------------------------------------------------------------

def _golden_min(f, lo, hi, tol):
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    return x, f(x)


def brute_force_minimize(grid: StripGrid, data: BoundaryData, law: CohesiveLaw,
                         stat_tol: float = 1e-8, max_sweeps: int = 8000) -> np.ndarray:
    """Global minimizer of the reduced energy on a tiny instance.

    Cyclic exact one-dimensional minimization: per trace node, golden
    section on both sides of the kink plus the kink itself.  Convexity of
    the reduced energy under 2 A sup|g''| < 1 makes the limit global; if
    that hypothesis fails a warning is emitted and the result is only a
    critical point candidate.
    """
    nt = int(np.prod(grid.trace_shape))
    if nt > 7:
        raise OracleSizeError(f"{nt} trace nodes > 7: brute force refused")
    if 2.0 * grid.A * law.g2_sup >= 1.0:
        warnings.warn("2*A*sup|g''| >= 1: convexity not guaranteed, "
                      "brute-force result may be a non-global critical point")
    S, b, c = dense_schur(grid, data)
    m = grid.hx**grid.n
    scale = max(data.max_abs, 1.0)

    t = np.zeros(nt)
    for _ in range(max_sweeps):
        for i in range(nt):
            r = float(S[i] @ t - S[i, i] * t[i] + b[i])
            sq = -r / S[i, i]

            def phi1d(s, i=i, r=r):
                return S[i, i] * s * s + 2.0 * r * s + m * float(law.g(2.0 * abs(s)))

            B = 2.0 * abs(sq) + scale
            xp, fp = _golden_min(phi1d, 0.0, B, 1e-13 * scale)
            xn, fn = _golden_min(phi1d, -B, 0.0, 1e-13 * scale)
            cands = [(phi1d(0.0), 0.0), (fp, xp), (fn, xn)]
            t[i] = min(cands)[1]
        # stationarity: pointwise complementarity with flux from the oracle form
        flux = -(S @ t + b) / m
        opened = np.abs(t) > 1e-14 * scale
        res = 0.0
        if opened.any():
            want = law.g1(2.0 * np.abs(t[opened])) * np.sign(t[opened])
            res = float(np.max(np.abs(flux[opened] - want)))
        if (~opened).any():
            res = max(res, float(np.max(np.maximum(np.abs(flux[~opened]) - law.gp0, 0.0))))
        if res <= stat_tol:
            break
    else:
        warnings.warn(f"coordinate descent stalled at residual {res:.3e}")
    return t


# ----------------------------------------------------------------------
# closed-form synthetic fields
# ----------------------------------------------------------------------

@dataclass(eq=False)
class SyntheticField:
    name: str
    field: ReflectedField
    mu: float            # exact homogeneity degree
    phi: float           # exact frequency value n + 2*mu


def closed_form_fields(n: int = 1, L: float = 1.0, A: float = 1.0,
                       mx: int = 513, my: int = None, gp0: float = 1.0) -> list:
    """Library of exactly homogeneous even fields sampled on a lattice.

    The 3/2-homogeneous contact profile, the evenized harmonic polynomials
    Re((x_n + i y)^d) for d = 1..4, and the zero-opening ramp -gp0|y|; each
    tagged with its exact degree and frequency value.
    """
    if my is None:
        my = mx // 2 + 1

    def wrap(f):
        if n == 1:
            return f
        return lambda x1, x2, y: f(x2, y)  # constant in the tangential direction

    out = []

    def three_halves(x, y):
        rho = np.hypot(x, y)
        th = np.arctan2(np.abs(y), x)
        return rho**1.5 * np.cos(1.5 * th)

    out.append(("three_halves_profile", three_halves, 1.5))
    for d in (1, 2, 3, 4):
        def poly(x, y, d=d):
            return np.real((np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)) ** d)
        out.append((f"harmonic_deg{d}", poly, float(d)))
    out.append(("kink_ramp", lambda x, y: -gp0 * np.abs(y), 1.0))

    fields = []
    for name, f, mu in out:
        if n == 1:
            func = lambda x, y, f=f: f(x, y)
        else:
            func = wrap(f)
        rf = ReflectedField.from_function(func, n, L, A, mx, my)
        fields.append(SyntheticField(name=name, field=rf, mu=mu, phi=float(n + 2 * mu)))
    return fields
