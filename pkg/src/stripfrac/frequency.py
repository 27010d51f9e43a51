"""Frequency diagnostics: boundary mass F(r), its log-derivative Phi(r),
truncation, monotonicity fit and the integral identities behind them.

All ball/sphere quadratures exploit the evenness of v across y=0: they
integrate over the upper half and double, which keeps second-order accuracy
in the presence of the |y|-type kink on the plane (the kink then sits on
the quadrature boundary, never inside a panel).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .extension import ReflectedField
from .laws import CohesiveLaw

__all__ = [
    "GeometryError",
    "FrequencyProfile",
    "IdentityReport",
    "Classification",
    "F_of_r",
    "default_radii",
    "phi_profile",
    "classify_point",
    "check_identities",
    "TRACE_POINCARE_CONSTANT",
]

# Sharp constant in the trace bound used by the truncation argument: the
# minimizing profile over the unit ball with zero plane values is w = y.
TRACE_POINCARE_CONSTANT = 1.0


class GeometryError(ValueError):
    """Ball leaves the sampled domain (or the nonnegative-phase window)."""


class Classification(enum.Enum):
    REGULAR_3HALF = "regular_3half"
    DEGENERATE_GE_NPLUS4 = "degenerate_ge_nplus4"
    NOT_APPLICABLE = "not_applicable"


def _center_arr(field, center):
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size != field.n:
        raise ValueError(f"center must have {field.n} lateral coordinate(s)")
    return c


def _check_ball(field: ReflectedField, c, r):
    if r <= 0:
        raise GeometryError("radius must be positive")
    if r > field.A + 1e-12 or field.lateral_margin(c) < r - 1e-12:
        raise GeometryError(
            f"ball of radius {r:.4g} at {tuple(c)} leaves the sampled window")


def _circle_count(field, r):
    M = int(max(64, math.ceil(8.0 * r / field.hx)))
    return M + (M % 2)


def F_of_r(field: ReflectedField, center, r: float, n_nodes: int = None) -> float:
    """Boundary mass of v^2 over the sphere of radius r about a plane point.

    n=1: composite trapezoid on the circle (nodes hit the plane, so the
    trace kink falls on quadrature nodes); n=2: product rule, Gauss-Legendre
    in the polar cosine split at the equator times a periodic trapezoid in
    azimuth.  Second-order in the node count.
    """
    c = _center_arr(field, center)
    _check_ball(field, c, r)
    if field.n == 1:
        M = n_nodes or _circle_count(field, r)
        th = 2.0 * np.pi * np.arange(M) / M
        pts = np.stack([c[0] + r * np.cos(th), r * np.sin(th)], axis=-1)
        vals = field.v_at(pts)
        return float(np.sum(vals**2) * r * (2.0 * np.pi / M))
    pts, w = _sphere_nodes(c, r, field, n_az=n_nodes)
    vals = field.v_at(pts)
    return float(np.sum(vals**2 * w))


def _gauss(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _sphere_nodes(c, r, field, n_u=None, n_az=None):
    """Upper-hemisphere product nodes doubled by evenness; weights include r^n."""
    M = n_az or _circle_count(field, r)
    nu = n_u or max(32, M // 4)
    u, wu = _gauss(nu, 0.0, 1.0)
    al = 2.0 * np.pi * np.arange(M) / M
    s = np.sqrt(1.0 - u**2)
    X1 = c[0] + r * s[:, None] * np.cos(al)[None, :]
    X2 = c[1] + r * s[:, None] * np.sin(al)[None, :]
    Y = np.broadcast_to((r * u)[:, None], X1.shape)
    w = np.broadcast_to((wu * 2.0)[:, None] * (2.0 * np.pi / M), X1.shape) * r**2
    pts = np.stack([X1, X2, Y], axis=-1).reshape(-1, 3)
    return pts, w.reshape(-1)


def _upper_sphere_nodes(c, r, field, n_theta=96):
    """Nodes with y >= 0 for gradient-carrying boundary integrals (doubled)."""
    if field.n == 1:
        th = np.linspace(0.0, np.pi, n_theta + 1)
        wth = np.full(n_theta + 1, np.pi / n_theta)
        wth[0] *= 0.5
        wth[-1] *= 0.5
        pts = np.stack([c[0] + r * np.cos(th), r * np.sin(th)], axis=-1)
        nu = np.stack([np.cos(th), np.sin(th)], axis=-1)
        return pts, nu, 2.0 * r * wth
    M = n_theta
    u, wu = _gauss(max(24, M // 4), 0.0, 1.0)
    al = 2.0 * np.pi * np.arange(M) / M
    s = np.sqrt(1.0 - u**2)
    N1 = s[:, None] * np.cos(al)[None, :]
    N2 = s[:, None] * np.sin(al)[None, :]
    N3 = np.broadcast_to(u[:, None], N1.shape)
    nu_ = np.stack([N1, N2, N3], axis=-1).reshape(-1, 3)
    pts = np.concatenate([c, [0.0]])[None, :] + r * nu_
    w = (np.broadcast_to((wu * 2.0)[:, None] * (2.0 * np.pi / M), N1.shape) * r**2).reshape(-1)
    return pts, nu_, w


def _ball_nodes(c, r, field, n_rho=48, n_theta=96):
    """Upper-half ball nodes doubled by evenness; weights include the volume."""
    rho, wr = _gauss(n_rho, 0.0, r)
    if field.n == 1:
        th = np.linspace(0.0, np.pi, n_theta + 1)
        wth = np.full(n_theta + 1, np.pi / n_theta)
        wth[0] *= 0.5
        wth[-1] *= 0.5
        X = c[0] + rho[:, None] * np.cos(th)[None, :]
        Y = rho[:, None] * np.sin(th)[None, :]
        w = 2.0 * rho[:, None] * wr[:, None] * wth[None, :]
        pts = np.stack([X, Y], axis=-1).reshape(-1, 2)
        return pts, w.reshape(-1)
    spts, snu, sw = _upper_sphere_nodes(np.zeros(2), 1.0, field, n_theta)
    pts = np.concatenate([c, [0.0]])[None, None, :] + rho[:, None, None] * spts[None, :, :]
    w = (rho**2 * wr)[:, None] * sw[None, :]
    return pts.reshape(-1, 3), w.reshape(-1)


def _lateral_nodes(c, r, field, n_lat=48):
    """Quadrature on the plane section {|x - c| < r, y = 0}."""
    if field.n == 1:
        xl, wl = _gauss(n_lat, c[0] - r, c[0])
        xr, wrt = _gauss(n_lat, c[0], c[0] + r)
        x = np.concatenate([xl, xr])
        w = np.concatenate([wl, wrt])
        pts = np.stack([x, np.zeros_like(x)], axis=-1)
        return pts, w
    rho, wr = _gauss(n_lat, 0.0, r)
    M = 2 * n_lat
    al = 2.0 * np.pi * np.arange(M) / M
    X1 = c[0] + rho[:, None] * np.cos(al)[None, :]
    X2 = c[1] + rho[:, None] * np.sin(al)[None, :]
    w = rho[:, None] * wr[:, None] * np.full((1, M), 2.0 * np.pi / M)
    pts = np.stack([X1, X2, np.zeros_like(X1)], axis=-1).reshape(-1, 3)
    return pts, w.reshape(-1)


def default_radii(field: ReflectedField, center, r_min_cells: float = 4.0,
                  r_max_frac: float = 0.999) -> np.ndarray:
    """Geometric radii r_k = r_max 2^{-k/2} down to r_min_cells*hx, increasing.

    r_max is half the distance to the nearest window/strip boundary; radii
    below a few cells are interpolation noise and are not generated.
    """
    c = _center_arr(field, center)
    r_max = r_max_frac * field.max_ball_radius(c) / 2.0
    r_min = r_min_cells * field.hx
    if r_max < r_min:
        raise GeometryError("no admissible radii: center too close to the boundary "
                            "or the grid too coarse")
    out = []
    k = 0
    while True:
        r = r_max * 2.0 ** (-k / 2.0)
        if r < r_min:
            break
        out.append(r)
        k += 1
    return np.array(out[::-1])


@dataclass(eq=False)
class FrequencyProfile:
    """Radial frequency data at one plane center."""

    center: tuple
    n: int
    radii: np.ndarray
    F: np.ndarray
    Phi: np.ndarray
    truncated: np.ndarray
    C_fit: float
    Phi0: float
    degenerate: bool
    mono_tol: float

    def monotone_with(self, C: float, mono_tol: float = None) -> bool:
        tol = self.mono_tol if mono_tol is None else mono_tol
        vals = self.Phi * np.exp(C * self.radii)
        return bool(np.all(np.diff(vals) >= -tol))

    def to_dict(self) -> dict:
        return {
            "center": list(np.atleast_1d(self.center).astype(float)),
            "n": self.n,
            "radii": [float(r) for r in self.radii],
            "F": [float(f) for f in self.F],
            "Phi": [float(p) for p in self.Phi],
            "truncated": [bool(t) for t in self.truncated],
            "C_fit": None if math.isinf(self.C_fit) else float(self.C_fit),
            "Phi0": float(self.Phi0),
            "degenerate": self.degenerate,
        }


def phi_profile(field: ReflectedField, center, radii=None, mono_tol: float = 1e-3,
                r_min_cells: float = 4.0) -> FrequencyProfile:
    """F, Phi and the fitted monotonicity constant over a radius ladder.

    Phi is the centered log-log difference of max{F(r), r^{n+4}}; radii
    where F falls below the truncation are flagged, and Phi there reproduces
    n+4 exactly because the truncated branch is a pure power.  Phi0
    extrapolates the last four reliable values linearly in r; C_fit is the
    smallest constant on a log grid making Phi(r) e^{C r} nondecreasing
    within mono_tol.
    """
    c = _center_arr(field, center)
    if radii is None:
        radii = default_radii(field, c, r_min_cells=r_min_cells)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 8:
        warnings.warn(f"phi_profile prefers >= 8 radii, got {radii.size}")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if np.any(radii >= field.max_ball_radius(c) / 2.0 + 1e-12):
        raise GeometryError("profile radii must stay below half the distance "
                            "to the strip/window boundary")

    n = field.n
    F = np.array([F_of_r(field, c, r) for r in radii])
    trunc_val = radii ** (n + 4)
    truncated = F < trunc_val
    G = np.maximum(F, trunc_val)
    lg, lr = np.log(G), np.log(radii)
    Phi = np.gradient(lg, lr)

    if np.all(truncated):
        return FrequencyProfile(center=tuple(c), n=n, radii=radii, F=F,
                                Phi=np.full_like(radii, float(n + 4)),
                                truncated=truncated, C_fit=0.0,
                                Phi0=float(n + 4), degenerate=True,
                                mono_tol=mono_tol)

    ok = np.where(~truncated)[0]
    take = ok[:4] if ok.size >= 4 else ok
    if take.size >= 2:
        coef = np.polyfit(radii[take], Phi[take], 1)
        Phi0 = float(coef[1])
    else:
        Phi0 = float(Phi[take[0]])

    C_fit = math.inf
    for C in np.concatenate([[0.0], np.logspace(-3, 3, 121)]):
        if np.all(np.diff(Phi * np.exp(C * radii)) >= -mono_tol):
            C_fit = float(C)
            break

    return FrequencyProfile(center=tuple(c), n=n, radii=radii, F=F, Phi=Phi,
                            truncated=truncated, C_fit=C_fit, Phi0=Phi0,
                            degenerate=False, mono_tol=mono_tol)


def classify_point(profile: FrequencyProfile, class_tol: float = 0.15) -> Classification:
    """Sort the extrapolated Phi(0+) into the two admissible branches.

    The gap (n+3, n+4) contains no admissible value; landing there flags a
    discretization failure rather than a third kind of point.
    """
    n = profile.n
    if abs(profile.Phi0 - (n + 3)) <= class_tol:
        return Classification.REGULAR_3HALF
    if profile.Phi0 >= (n + 4) - class_tol:
        return Classification.DEGENERATE_GE_NPLUS4
    warnings.warn(
        f"Phi0 = {profile.Phi0:.3f} sits in the excluded gap ({n+3}, {n+4}): "
        "finite-grid ambiguity, treat the center as unresolved")
    return Classification.NOT_APPLICABLE


@dataclass(frozen=True)
class IdentityRow:
    name: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float


@dataclass(eq=False)
class IdentityReport:
    center: tuple
    r: float
    rows: tuple

    def __getitem__(self, name):
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def max_rel(self) -> float:
        return max(row.rel_err for row in self.rows)

    def to_dict(self) -> dict:
        return {"center": list(np.atleast_1d(self.center).astype(float)),
                "r": float(self.r),
                "rows": [{"name": w.name, "lhs": w.lhs, "rhs": w.rhs,
                          "abs_err": w.abs_err, "rel_err": w.rel_err}
                         for w in self.rows]}


def check_identities(field: ReflectedField, law: CohesiveLaw, center, r: float,
                     n_rho: int = 96, n_theta: int = 256, n_lat: int = 96,
                     fd_frac: float = 0.01) -> IdentityReport:
    """Evaluate both sides of the three integral identities at radius r.

    law=None treats the coupling g'(2v) - g'(0+) as identically zero (the
    linearized case, where the divergence identity reduces to Green's
    identity).  Report-only: mismatches are returned, never asserted.
    """
    c = _center_arr(field, center)
    _check_ball(field, c, r * (1.0 + fd_frac))
    n = field.n

    bpts, bw = _ball_nodes(c, r, field, n_rho=n_rho, n_theta=n_theta)
    grad_b = field.grad_at(bpts)
    dirichlet = float(np.sum(np.sum(grad_b**2, axis=-1) * bw))

    spts, snu, sw = _upper_sphere_nodes(c, r, field, n_theta=n_theta)
    vals_s = field.v_at(spts)
    grad_s = field.grad_at(spts)
    v_nu = np.sum(grad_s * snu, axis=-1)
    tau_sq = np.sum(grad_s**2, axis=-1) - v_nu**2
    bdy_vvnu = float(np.sum(vals_s * v_nu * sw))
    bdy_split = float(np.sum((tau_sq - v_nu**2) * sw))
    bdy_scale = float(np.sum((tau_sq + v_nu**2) * sw))

    lpts, lw = _lateral_nodes(c, r, field, n_lat=n_lat)
    vals_l = field.v_at(lpts)
    if law is None:
        coupling = np.zeros_like(vals_l)
    else:
        coupling = law.g1(2.0 * vals_l) - law.gp0
    lat_vg = float(np.sum(vals_l * coupling * lw))
    grad_l = field.grad_at(lpts)
    xrel = lpts[:, :n] - c[None, :]
    x_dot_grad = np.sum(xrel * grad_l[:, :n], axis=-1)
    lat_rellich = float(np.sum(coupling * x_dot_grad * lw))

    tiny = 1e-300
    rows = []

    lhs = dirichlet
    rhs = bdy_vvnu - 2.0 * lat_vg
    rows.append(IdentityRow("divergence", lhs, rhs, abs(lhs - rhs),
                            abs(lhs - rhs) / max(abs(lhs), abs(rhs), tiny)))

    lhs = (n - 1) * dirichlet
    rhs = r * bdy_split + 4.0 * lat_rellich
    scale = max(abs(lhs), r * bdy_scale, tiny)
    rows.append(IdentityRow("rellich", lhs, rhs, abs(lhs - rhs),
                            abs(lhs - rhs) / scale))

    # step scales with the grid so the truncation error refines with it;
    # one node count for all three evaluations, else the adaptive count
    # injects O(M^-2) jumps into the finite difference
    dr = max(field.hx, fd_frac * r)
    M = _circle_count(field, r + dr)
    Fp = (F_of_r(field, c, r + dr, n_nodes=M)
          - F_of_r(field, c, r - dr, n_nodes=M)) / (2.0 * dr)
    Fr = F_of_r(field, c, r, n_nodes=M)
    rhs = 2.0 * bdy_vvnu + n * Fr / r
    scale = max(abs(Fp), abs(rhs), n * Fr / r, tiny)
    rows.append(IdentityRow("flux_derivative", Fp, rhs, abs(Fp - rhs),
                            abs(Fp - rhs) / scale))

    return IdentityReport(center=tuple(c), r=float(r), rows=tuple(rows))
