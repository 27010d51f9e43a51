"""Crack-set extraction and the geometric bound diagnostics.

The crack is the thresholded open set {|trace| > open_tol}; its geometry
(support radius, phase gap, transition points, graph) plus the propagated
regularity bounds (maximum principle, normal-derivative bound, strip bound,
Lipschitz rows, semiconvexity rows) are all computed from a converged
Solution with no re-solving.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryData
from .laws import CohesiveLaw
from .solver import Solution

__all__ = [
    "CrackGeometry",
    "GraphReport",
    "extract",
    "lipschitz_profile",
    "semiconvexity_profile",
    "derivative_strip_bounds",
    "graph_extract",
    "propagated_bounds",
    "bound_suite",
]


@dataclass(eq=False)
class CrackGeometry:
    """Thresholded crack set of one Solution.

    phase_gap is +inf when a phase is empty; support_radius is 0 for a
    closed crack.  fb_points are the open/closed transition abscissae
    (n=1) or transition cell centers (n=2).
    """

    open_mask: np.ndarray
    open_tol: float
    fb_points: tuple
    support_radius: float
    phase_gap: float
    pos_intervals: tuple      # n=1: (x_lo, x_hi) per positive component
    neg_intervals: tuple
    graph: "GraphReport" = None

    def to_dict(self) -> dict:
        return {
            "open_nodes": int(np.count_nonzero(self.open_mask)),
            "open_tol": self.open_tol,
            "fb_points": [list(np.atleast_1d(p).astype(float)) for p in self.fb_points],
            "support_radius": self.support_radius,
            "phase_gap": "inf" if math.isinf(self.phase_gap) else self.phase_gap,
            "pos_intervals": [list(iv) for iv in self.pos_intervals],
            "neg_intervals": [list(iv) for iv in self.neg_intervals],
        }


def _components_1d(mask, xs):
    out = []
    i = 0
    while i < len(mask):
        if mask[i]:
            j = i
            while j + 1 < len(mask) and mask[j + 1]:
                j += 1
            out.append((float(xs[i]), float(xs[j])))
            i = j + 1
        else:
            i += 1
    return tuple(out)


def _crossing_points_1d(trace, xs, open_tol):
    t = np.abs(trace)
    opened = t > open_tol
    out = []
    for i in range(len(xs) - 1):
        if opened[i] == opened[i + 1]:
            continue
        a, b = t[i], t[i + 1]
        frac = (a - open_tol) / (a - b) if a != b else 0.0
        out.append(float(xs[i] + (xs[i + 1] - xs[i]) * frac))
    return tuple(out)


def extract(sol: Solution, open_tol: float = None) -> CrackGeometry:
    """Threshold the trace; ties at exactly open_tol classify as closed."""
    grid = sol.grid
    open_tol = sol.open_tol if open_tol is None else float(open_tol)
    tr = sol.trace
    opened = np.abs(tr) > open_tol
    pos = tr > open_tol
    neg = tr < -open_tol

    if grid.n == 1:
        xs = grid.xs
        fb = _crossing_points_1d(tr, xs, open_tol)
        support = float(np.max(np.abs(xs[opened]))) if opened.any() else 0.0
        if pos.any() and neg.any():
            gap = float(np.min(np.abs(xs[pos][:, None] - xs[neg][None, :])))
        else:
            gap = math.inf
        return CrackGeometry(open_mask=opened, open_tol=open_tol, fb_points=fb,
                             support_radius=support, phase_gap=gap,
                             pos_intervals=_components_1d(pos, xs),
                             neg_intervals=_components_1d(neg, xs))

    X1, X2 = grid.lateral_mesh()
    rad = np.hypot(X1, X2)
    support = float(np.max(rad[opened])) if opened.any() else 0.0
    if pos.any() and neg.any():
        from scipy.spatial import cKDTree
        ppts = np.stack([X1[pos], X2[pos]], axis=-1)
        npts = np.stack([X1[neg], X2[neg]], axis=-1)
        gap = float(cKDTree(ppts).query(npts, k=1)[0].min())
    else:
        gap = math.inf
    fb = _transition_cells_2d(opened, grid)
    geom = CrackGeometry(open_mask=opened, open_tol=open_tol, fb_points=fb,
                         support_radius=support, phase_gap=gap,
                         pos_intervals=(), neg_intervals=())
    try:
        geom.graph = graph_extract(sol, open_tol=open_tol)
    except ValueError:
        geom.graph = None
    return geom


def _transition_cells_2d(opened, grid):
    xs = grid.xs
    pts = []
    d1 = opened[1:, :] != opened[:-1, :]
    d2 = opened[:, 1:] != opened[:, :-1]
    i, j = np.nonzero(d1)
    pts.extend(((xs[a] + xs[a + 1]) / 2.0, xs[b]) for a, b in zip(i, j))
    i, j = np.nonzero(d2)
    pts.extend((xs[a], (xs[b] + xs[b + 1]) / 2.0) for a, b in zip(i, j))
    return tuple(pts)


# ----------------------------------------------------------------------
# row-wise regularity profiles
# ----------------------------------------------------------------------

@dataclass(eq=False)
class LipschitzProfile:
    y: np.ndarray
    L_of_y: np.ndarray
    max: float


def lipschitz_profile(sol: Solution) -> LipschitzProfile:
    """Per-row max lateral difference quotient of u."""
    grid = sol.grid
    u = sol.u
    hx = grid.hx
    if grid.n == 1:
        L = np.max(np.abs(np.diff(u, axis=0)), axis=0) / hx
    else:
        L1 = np.max(np.abs(np.diff(u, axis=0)), axis=(0, 1)) / hx
        L2 = np.max(np.abs(np.diff(u, axis=1)), axis=(0, 1)) / hx
        L = np.maximum(L1, L2)
    return LipschitzProfile(y=grid.ys.copy(), L_of_y=L, max=float(np.max(L)))


@dataclass(eq=False)
class SemiconvexityProfile:
    y: np.ndarray
    D_of_y: np.ndarray    # semiconvexity defect of u^+ per row
    C_of_y: np.ndarray    # semiconcavity defect of u^- per row
    D_max: float
    C_max: float


def _second_quotient_max(rows, h, offsets, sign):
    """Max over offsets of sign * -(f(x+h)+f(x-h)-2f(x))/|h|^2, rowwise."""
    best = np.zeros(rows.shape[-1])
    for k in offsets:
        d2 = rows[2 * k:, ...] + rows[:-2 * k or None, ...] - 2.0 * rows[k:-k, ...]
        q = sign * (-d2) / (k * h) ** 2
        if q.size:
            best = np.maximum(best, np.max(q, axis=tuple(range(q.ndim - 1))))
    return best


def semiconvexity_profile(sol: Solution, max_offset_cells: int = None) -> SemiconvexityProfile:
    """Second-difference defects of u^+ (convexity side) and u^- per row.

    Offsets run over whole lattice steps up to a quarter of the domain; the
    true quotients of a semiconvex function never exceed its constant at
    any offset, so the max over offsets is the discrete estimate.
    """
    grid = sol.grid
    up = np.maximum(sol.u, 0.0)
    um = np.minimum(sol.u, 0.0)
    kmax = max_offset_cells or max(1, (grid.mx - 1) // 4)
    offsets = range(1, kmax + 1)
    hx = grid.hx
    if grid.n == 1:
        D = _second_quotient_max(up, hx, offsets, +1.0)
        C = _second_quotient_max(-um, hx, offsets, +1.0)
    else:
        D = np.zeros(grid.my)
        C = np.zeros(grid.my)
        for axis_first in (True, False):
            a = up if axis_first else np.swapaxes(up, 0, 1)
            b = -um if axis_first else np.swapaxes(-um, 0, 1)
            D = np.maximum(D, _second_quotient_max(a, hx, offsets, +1.0))
            C = np.maximum(C, _second_quotient_max(b, hx, offsets, +1.0))
    return SemiconvexityProfile(y=grid.ys.copy(), D_of_y=D, C_of_y=C,
                                D_max=float(np.max(D)), C_max=float(np.max(C)))


def propagated_bounds(law: CohesiveLaw, data: BoundaryData, A: float) -> dict:
    """Constants the top data propagates to every row of the strip.

    c = 1 - 2 A sup|g''| is the contraction margin; the Lipschitz constant
    is L_A / c and the one-sided second-difference constants pick up an
    extra 4 A L_A^2 sup|g'''| / c^2 before the same division.
    """
    c = 1.0 - 2.0 * A * law.g2_sup
    if c <= 0:
        raise ValueError("2*A*sup|g''| >= 1: propagated bounds undefined")
    bump = 4.0 * A * data.L_A**2 * law.g3_sup / c**2
    return {
        "c_A": c,
        "lipschitz": data.L_A / c,
        "semiconvexity": (data.D_A + bump) / c,
        "semiconcavity": (data.C_A + bump) / c,
    }


# ----------------------------------------------------------------------
# strip bound on the normal derivative
# ----------------------------------------------------------------------

@dataclass(eq=False)
class StripBoundReport:
    c0: float
    c1: float
    max_upper_violation: float
    max_lower_violation: float
    fd_tol: float
    passed: bool


def _dy_field(u, hy):
    du = np.empty_like(u)
    du[..., 1:-1] = (u[..., 2:] - u[..., :-2]) / (2.0 * hy)
    du[..., 0] = (-3.0 * u[..., 0] + 4.0 * u[..., 1] - u[..., 2]) / (2.0 * hy)
    du[..., -1] = (3.0 * u[..., -1] - 4.0 * u[..., -2] + u[..., -3]) / (2.0 * hy)
    return du


def _fd_tol_auto(u, hy, scale):
    """Truncation budget for centered d_y: (hy^2/6) |d_yyy u|, estimated."""
    d3 = np.abs(np.diff(u, n=3, axis=-1)) / hy**3
    est = float(np.max(d3)) if d3.size else 0.0
    return (hy**2 / 6.0) * est * 2.0 + 1e-12 * scale


def derivative_strip_bounds(sol: Solution, law: CohesiveLaw, c0: float = None,
                            c1: float = None, fd_tol: float = None) -> StripBoundReport:
    """Two-sided linear-in-y envelope on d_y u across the whole strip.

    By default c0 = max|d_y u(., A)| and c1 = (c0 - g'(0+))/A come from the
    solution itself; pass them explicitly to use the report as a corruption
    detector with constants pinned from a trusted solve.
    """
    grid = sol.grid
    du = _dy_field(sol.u, grid.hy)
    if c0 is None:
        c0 = float(np.max(np.abs(du[..., -1])))
    if c1 is None:
        c1 = max(0.0, (c0 - law.gp0) / grid.A)
    if fd_tol is None:
        fd_tol = _fd_tol_auto(sol.u, grid.hy, max(law.gp0, c0))
    bound = law.gp0 + c1 * grid.ys
    upper = float(np.max(du - bound))
    lower = float(np.max(-bound - du))
    return StripBoundReport(c0=float(c0), c1=float(c1),
                            max_upper_violation=upper, max_lower_violation=lower,
                            fd_tol=float(fd_tol),
                            passed=bool(max(upper, lower) <= fd_tol))


# ----------------------------------------------------------------------
# free-boundary graph (n=2)
# ----------------------------------------------------------------------

@dataclass(eq=False)
class GraphReport:
    """Crossing abscissae x_n = f(x_1) of the open/closed transition."""

    x1: np.ndarray
    f: np.ndarray
    slope: np.ndarray
    holder_quotients: dict       # alpha -> max |f'(a)-f'(b)| / |a-b|^alpha
    nongraph_columns: tuple
    endpoints: tuple = ()        # n=1 fallback: the two transition abscissae

    def to_dict(self) -> dict:
        return {"x1": [float(x) for x in self.x1],
                "f": [float(x) for x in self.f],
                "slope": [float(x) for x in self.slope],
                "holder_quotients": {str(k): float(v) for k, v in self.holder_quotients.items()},
                "nongraph_columns": [float(x) for x in self.nongraph_columns],
                "endpoints": [float(x) for x in self.endpoints]}


def graph_extract(sol: Solution, open_tol: float = None, direction: int = +1,
                  alphas=(0.1, 0.2, 0.3, 0.5, 0.7, 0.9)) -> GraphReport:
    """Per-x1 crossing abscissa of the transition along +/-x2 (n=2).

    Columns with multiple crossings are reported as non-graph and skipped.
    For n=1 the zero-dimensional boundary is just the transition abscissae,
    returned in ``endpoints``.
    """
    grid = sol.grid
    open_tol = sol.open_tol if open_tol is None else float(open_tol)
    if grid.n == 1:
        ends = _crossing_points_1d(sol.trace, grid.xs, open_tol)
        return GraphReport(x1=np.empty(0), f=np.empty(0), slope=np.empty(0),
                           holder_quotients={}, nongraph_columns=(), endpoints=ends)

    xs = grid.xs
    t = np.abs(sol.trace)
    opened = t > open_tol
    cols, fvals, bad = [], [], []
    scan = slice(None, None, 1 if direction >= 0 else -1)
    for i in range(grid.mx):
        col_open = opened[i, scan]
        col_t = t[i, scan]
        idx = np.nonzero(col_open[:-1] != col_open[1:])[0]
        if idx.size == 0:
            continue
        # the graph exists where the column leaves the open set exactly once
        leave = [j for j in idx if col_open[j] and not col_open[j + 1]]
        if len(leave) != 1 or idx.size > 2:
            bad.append(float(xs[i]))
            continue
        j = leave[0]
        a, b = col_t[j], col_t[j + 1]
        frac = (a - open_tol) / (a - b) if a != b else 0.0
        xcol = xs[scan]
        fvals.append(float(xcol[j] + (xcol[j + 1] - xcol[j]) * frac))
        cols.append(float(xs[i]))
    if len(cols) < 3:
        raise ValueError("no graph: fewer than 3 columns with a single crossing")
    x1 = np.asarray(cols)
    f = np.asarray(fvals)
    slope = np.gradient(f, x1)
    hq = {}
    for alpha in alphas:
        da = np.abs(slope[:, None] - slope[None, :])
        dx = np.abs(x1[:, None] - x1[None, :])
        mask = dx > 0
        hq[alpha] = float(np.max(da[mask] / dx[mask] ** alpha))
    if bad:
        warnings.warn(f"{len(bad)} non-graph columns (multiple crossings)")
    return GraphReport(x1=x1, f=f, slope=slope, holder_quotients=hq,
                       nongraph_columns=tuple(bad))


# ----------------------------------------------------------------------
# combined bound suite
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BoundRow:
    name: str
    measured: float
    bound: float
    passed: bool


@dataclass(eq=False)
class BoundSuiteReport:
    rows: tuple

    def __getitem__(self, name):
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def to_dict(self):
        return {r.name: {"measured": r.measured, "bound": r.bound, "passed": r.passed}
                for r in self.rows}


def bound_suite(sol: Solution, law: CohesiveLaw, data: BoundaryData,
                fd_tol: float = None, rel_slack: float = 0.02) -> BoundSuiteReport:
    """Every pointwise bound a converged run must satisfy, in one report.

    fd_tol pads the finite-difference-limited normal and strip checks and
    defaults to a budget from the measured third differences of the field;
    the Lipschitz/semiconvexity rows get a relative slack instead (their
    discretization error is solver-level, not stencil-level).  Pass
    explicit tolerances for calibrated runs (the acceptance suite derives
    its own from a refinement halving).  The maximum principle is
    discretization-exact and gets only a roundoff allowance.
    """
    grid = sol.grid
    scale = max(data.max_abs, 1e-300)
    if fd_tol is None:
        fd_tol = _fd_tol_auto(sol.u, grid.hy, law.gp0)

    rows = []
    mp = float(np.max(np.abs(sol.u)))
    rows.append(BoundRow("max_principle", mp, data.max_abs + 1e-10 * scale,
                         mp <= data.max_abs + 1e-10 * scale))

    slack = float(np.max(np.abs(sol.normal) - law.g1(2.0 * np.abs(sol.trace))))
    rows.append(BoundRow("normal_bound", max(slack, 0.0), fd_tol,
                         slack <= fd_tol))

    strip = derivative_strip_bounds(sol, law, fd_tol=fd_tol)
    worst = max(strip.max_upper_violation, strip.max_lower_violation, 0.0)
    rows.append(BoundRow("strip_bound", worst, fd_tol, strip.passed))

    pb = propagated_bounds(law, data, grid.A)
    lp = lipschitz_profile(sol)
    lb = pb["lipschitz"] * (1.0 + rel_slack) + 1e-12
    rows.append(BoundRow("lipschitz", lp.max, lb, lp.max <= lb))

    sc = semiconvexity_profile(sol)
    db = pb["semiconvexity"] * (1.0 + rel_slack) + 1e-12
    cb = pb["semiconcavity"] * (1.0 + rel_slack) + 1e-12
    rows.append(BoundRow("semiconvexity", sc.D_max, db, sc.D_max <= db))
    rows.append(BoundRow("semiconcavity", sc.C_max, cb, sc.C_max <= cb))

    return BoundSuiteReport(rows=tuple(rows))
