"""Unit-ball rescaling, homogeneity fit and distance to the 3/2 contact profile.

v_r(z) = v(center + r z)/d_r with d_r = sqrt(F(r)/r^n) is normalized to unit
boundary mass; its homogeneity is read off a log-log fit of d_r, and at a
regular point the finest rescaling is compared, after orientation and
normalization alignment, to the explicit contact profile
rho^{3/2} cos(3 theta/2) in the (opening-direction, y) plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .extension import ReflectedField
from .frequency import F_of_r, _center_arr, _gauss

__all__ = [
    "ZeroFieldError",
    "ReferenceMesh",
    "RescaledProfile",
    "MuFit",
    "BlowupFit",
    "rescale",
    "fit_mu",
    "reference_profile",
    "profile_distance",
    "analyze_blowup",
]


class ZeroFieldError(ValueError):
    """F(r) vanished: nothing to normalize by."""


@dataclass(eq=False)
class ReferenceMesh:
    """Fixed quadrature mesh of the unit ball, upper half doubled by evenness.

    ``points`` carry interior L^2 weights (ball measure), ``ring_points``
    the unit-sphere weights used by the boundary normalization.  n=1 default
    is 128 angular x 64 radial.
    """

    n: int
    points: np.ndarray
    weights: np.ndarray
    ring_points: np.ndarray
    ring_weights: np.ndarray

    @classmethod
    def build(cls, n: int, n_theta: int = 128, n_rho: int = 64, n_az: int = 64,
              n_u: int = 32) -> "ReferenceMesh":
        rho, wr = _gauss(n_rho, 0.0, 1.0)
        if n == 1:
            th = np.linspace(0.0, np.pi, n_theta + 1)
            wth = np.full(n_theta + 1, np.pi / n_theta)
            wth[0] *= 0.5
            wth[-1] *= 0.5
            X = rho[:, None] * np.cos(th)[None, :]
            Y = rho[:, None] * np.sin(th)[None, :]
            w = 2.0 * rho[:, None] * wr[:, None] * wth[None, :]
            pts = np.stack([X, Y], axis=-1).reshape(-1, 2)
            ring = np.stack([np.cos(th), np.sin(th)], axis=-1)
            return cls(n=1, points=pts, weights=w.reshape(-1),
                       ring_points=ring, ring_weights=2.0 * wth)
        u, wu = _gauss(n_u, 0.0, 1.0)
        al = 2.0 * np.pi * np.arange(n_az) / n_az
        s = np.sqrt(1.0 - u**2)
        R1 = s[:, None] * np.cos(al)[None, :]
        R2 = s[:, None] * np.sin(al)[None, :]
        R3 = np.broadcast_to(u[:, None], R1.shape)
        ring = np.stack([R1, R2, R3], axis=-1).reshape(-1, 3)
        ring_w = (np.broadcast_to((2.0 * wu)[:, None] * (2.0 * np.pi / n_az),
                                  R1.shape)).reshape(-1)
        pts = (rho[:, None, None] * ring[None, :, :]).reshape(-1, 3)
        w = ((rho**2 * wr)[:, None] * ring_w[None, :]).reshape(-1)
        return cls(n=2, points=pts, weights=w, ring_points=ring, ring_weights=ring_w)

    def integrate(self, vals: np.ndarray) -> float:
        return float(np.sum(vals * self.weights))

    def ring_integrate(self, vals: np.ndarray) -> float:
        return float(np.sum(vals * self.ring_weights))


_MESH_CACHE = {}


def _default_mesh(n):
    if n not in _MESH_CACHE:
        _MESH_CACHE[n] = ReferenceMesh.build(n)
    return _MESH_CACHE[n]


@dataclass(eq=False)
class RescaledProfile:
    """v_r sampled on a ReferenceMesh, with its normalization constant."""

    n: int
    r: float
    d_r: float
    values: np.ndarray
    ring_values: np.ndarray
    boundary_norm_dev: float   # |ring integral of v_r^2 - 1|


def rescale(field: ReflectedField, center, r: float, mesh: ReferenceMesh = None) -> RescaledProfile:
    """Sample v(center + r z)/d_r on the unit-ball reference mesh."""
    c = _center_arr(field, center)
    mesh = mesh or _default_mesh(field.n)
    F = F_of_r(field, c, r)
    if F <= 0.0:
        raise ZeroFieldError(f"F({r:.3g}) = {F:.3g}; cannot normalize")
    d_r = math.sqrt(F / r**field.n)
    c_full = np.concatenate([c, [0.0]])
    vals = field.v_at(c_full[None, :] + r * mesh.points) / d_r
    ring = field.v_at(c_full[None, :] + r * mesh.ring_points) / d_r
    dev = abs(mesh.ring_integrate(ring**2) - 1.0)
    return RescaledProfile(n=field.n, r=float(r), d_r=d_r, values=vals,
                           ring_values=ring, boundary_norm_dev=dev)


@dataclass(frozen=True)
class MuFit:
    mu: float
    superquadratic: bool
    low_confidence: bool
    fit_residual: float
    radii: tuple
    d_r: tuple


def fit_mu(field: ReflectedField, center, radii, fit_tol: float = 0.05,
           sq_rtol: float = 1e-3) -> MuFit:
    """Homogeneity from the log-log slope of d_r; superquadratic trend flag.

    superquadratic is true when d_r/r^2 increases as r decreases across the
    sampled ladder (within a relative tolerance, so an exactly quadratic
    field reports false rather than flapping on rounding noise).
    """
    c = _center_arr(field, center)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 6:
        raise ValueError("fit_mu needs at least 6 radii")
    F = np.array([F_of_r(field, c, r) for r in radii])
    if np.any(F <= 0):
        raise ZeroFieldError("F vanished at some radius")
    d = np.sqrt(F / radii**field.n)
    slope, icpt = np.polyfit(np.log(radii), np.log(d), 1)
    resid = float(np.max(np.abs(np.log(d) - (slope * np.log(radii) + icpt))))
    q = d / radii**2
    superq = bool(np.all(q[:-1] >= q[1:] * (1.0 + sq_rtol)))
    return MuFit(mu=float(slope), superquadratic=superq,
                 low_confidence=resid > fit_tol, fit_residual=resid,
                 radii=tuple(float(r) for r in radii),
                 d_r=tuple(float(x) for x in d))


def _profile_values(pts: np.ndarray, n: int, angle: float = 0.0) -> np.ndarray:
    """rho^{3/2} cos(3 theta/2) in the (opening direction, y) plane.

    The opening direction is +x for n=1 (angle pi flips it) and
    (cos angle, sin angle) in the lateral plane for n=2; the profile is
    constant along the perpendicular lateral direction.
    """
    y = pts[..., -1]
    if n == 1:
        xn = pts[..., 0] * math.cos(angle)  # angle in {0, pi}: +x or -x
    else:
        xn = pts[..., 0] * math.cos(angle) + pts[..., 1] * math.sin(angle)
    rho = np.hypot(xn, y)
    th = np.arctan2(np.abs(y), xn)  # even in y by construction
    return rho**1.5 * np.cos(1.5 * th)


def reference_profile(n: int, mesh: ReferenceMesh = None, angle: float = 0.0):
    """Contact profile sampled on the reference mesh (interior, ring)."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    mesh = mesh or _default_mesh(n)
    return _profile_values(mesh.points, n, angle), _profile_values(mesh.ring_points, n, angle)


def _normalize_ring(vals, ring, mesh):
    mass = mesh.ring_integrate(ring**2)
    if mass <= 0:
        raise ZeroFieldError("zero boundary mass")
    s = 1.0 / math.sqrt(mass)
    return vals * s, ring * s


def profile_distance(vr: RescaledProfile, n: int, mesh: ReferenceMesh = None,
                     n_angles: int = 256):
    """L^2(B_1) distance to the contact profile after alignment.

    Both fields are scaled to exactly unit boundary mass on the mesh ring
    (the positive multiple allowed by the normalization); the orientation
    search is a reflection for n=1 and a scanned-then-refined lateral
    rotation for n=2.  Ties break to the smallest angle.
    """
    mesh = mesh or _default_mesh(n)
    a_vals, _ = _normalize_ring(vr.values, vr.ring_values, mesh)

    def dist_at(angle):
        ref_i, ref_r = reference_profile(n, mesh, angle)
        b_vals, _ = _normalize_ring(ref_i, ref_r, mesh)
        return math.sqrt(max(mesh.integrate((a_vals - b_vals) ** 2), 0.0))

    if n == 1:
        cands = [0.0, math.pi]
        dists = [dist_at(a) for a in cands]
        k = int(np.argmin(dists))
        return dists[k], cands[k]

    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    dists = np.array([dist_at(a) for a in angles])
    k = int(np.argmin(dists))
    # golden-section refinement around the best sample
    lo = angles[k] - 2.0 * np.pi / n_angles
    hi = angles[k] + 2.0 * np.pi / n_angles
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = dist_at(x1), dist_at(x2)
    for _ in range(40):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = dist_at(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = dist_at(x2)
    best = 0.5 * (lo + hi)
    return dist_at(best), float(best % (2.0 * np.pi))


@dataclass(eq=False)
class BlowupFit:
    """Rescaling summary at one center: homogeneity, trend, profile match."""

    center: tuple
    radii: tuple
    d_r: tuple
    mu: float
    superquadratic: bool
    low_confidence: bool
    profile_distance: float    # None on the degenerate branch (no profile there)
    orientation: float
    boundary_norm_dev: float

    def to_dict(self) -> dict:
        return {
            "center": list(np.atleast_1d(self.center).astype(float)),
            "radii": list(self.radii),
            "d_r": list(self.d_r),
            "mu": self.mu,
            "superquadratic": self.superquadratic,
            "low_confidence": self.low_confidence,
            "profile_distance": self.profile_distance,
            "orientation": self.orientation,
            "boundary_norm_dev": self.boundary_norm_dev,
        }


def analyze_blowup(field: ReflectedField, center, radii, mesh: ReferenceMesh = None,
                   match_profile: bool = None) -> BlowupFit:
    """fit_mu + finest-radius rescale + profile distance in one record.

    Profile matching is skipped (distance None) when the trend is not
    superquadratic: the degenerate branch has no reference profile.
    """
    c = _center_arr(field, center)
    mesh = mesh or _default_mesh(field.n)
    mf = fit_mu(field, c, radii)
    vr = rescale(field, c, min(mf.radii), mesh)
    do_match = mf.superquadratic if match_profile is None else match_profile
    if do_match:
        dist, angle = profile_distance(vr, field.n, mesh)
    else:
        dist, angle = None, 0.0
    return BlowupFit(center=tuple(c), radii=mf.radii, d_r=mf.d_r, mu=mf.mu,
                     superquadratic=mf.superquadratic,
                     low_confidence=mf.low_confidence,
                     profile_distance=dist, orientation=float(angle),
                     boundary_norm_dev=vr.boundary_norm_dev)
