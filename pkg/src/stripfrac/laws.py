"""Cohesive energy densities and their exact scalar proximal operator.

A cohesive law is the energy spent per unit crack surface as a function of
the opening.  Admissible densities are strictly increasing, bounded and
concave, vanish at zero opening, and have a finite positive slope at zero
(the maximal sustainable stress of the interface).  The solver touches a
law only through its derivatives and through the proximal map of
s -> g(2|s|), which is solved here in closed form up to a safeguarded
scalar root find.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "CohesiveLaw",
    "InvalidLawError",
    "StepTooLargeError",
    "CheckResult",
    "ValidationReport",
    "validate",
    "scalar_prox",
    "prox_many",
    "exponential_law",
    "rational_law",
    "builtin_laws",
    "law_from_config",
]


class InvalidLawError(ValueError):
    """A cohesive-law axiom failed; the message names the axiom."""


class StepTooLargeError(ValueError):
    """Proximal step violates 4*tau*sup|g''| < 1 (scalar objective not convex)."""


@dataclass(frozen=True, eq=False)
class CohesiveLaw:
    """Fracture energy density with analytically coded derivatives.

    ``g`` maps opening s >= 0 to energy per unit crack area; ``g1``..``g3``
    are its first three derivatives.  The norms ``g2_sup`` = sup|g''| and
    ``g3_sup`` = sup|g'''| enter step-size preconditions and the propagated
    regularity constants, so they are stored exactly per family rather than
    estimated at runtime.  Instances are immutable and safe to share across
    threads.
    """

    name: str
    g: Callable
    g1: Callable
    g2: Callable
    g3: Callable
    gp0: float      # g'(0+), the maximal sustainable stress
    g2_sup: float
    g3_sup: float
    g_sup: float
    params: dict = field(default_factory=dict)

    def __repr__(self):
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"CohesiveLaw({self.name}, {ps})"


# ----------------------------------------------------------------------
# builtin families
# ----------------------------------------------------------------------

def exponential_law(kappa: float = 1.0, lam: float = 1.0) -> CohesiveLaw:
    """g(s) = kappa*(1 - exp(-lam*s)); gp0 = kappa*lam, sup|g''| = kappa*lam^2."""
    if kappa <= 0 or lam <= 0:
        raise InvalidLawError("exponential law requires kappa > 0 and lam > 0")
    k, l = float(kappa), float(lam)
    return CohesiveLaw(
        name="exponential",
        g=lambda s: k * (1.0 - np.exp(-l * np.asarray(s, dtype=float))),
        g1=lambda s: k * l * np.exp(-l * np.asarray(s, dtype=float)),
        g2=lambda s: -k * l * l * np.exp(-l * np.asarray(s, dtype=float)),
        g3=lambda s: k * l**3 * np.exp(-l * np.asarray(s, dtype=float)),
        gp0=k * l,
        g2_sup=k * l * l,
        g3_sup=k * l**3,
        g_sup=k,
        params={"kappa": k, "lambda": l},
    )


def rational_law(kappa: float = 1.0, lam: float = 1.0) -> CohesiveLaw:
    """g(s) = kappa*s/(1 + lam*s); gp0 = kappa, sup|g''| = 2*kappa*lam."""
    if kappa <= 0 or lam <= 0:
        raise InvalidLawError("rational law requires kappa > 0 and lam > 0")
    k, l = float(kappa), float(lam)
    return CohesiveLaw(
        name="rational",
        g=lambda s: k * np.asarray(s, dtype=float) / (1.0 + l * np.asarray(s, dtype=float)),
        g1=lambda s: k / (1.0 + l * np.asarray(s, dtype=float)) ** 2,
        g2=lambda s: -2.0 * k * l / (1.0 + l * np.asarray(s, dtype=float)) ** 3,
        g3=lambda s: 6.0 * k * l * l / (1.0 + l * np.asarray(s, dtype=float)) ** 4,
        gp0=k,
        g2_sup=2.0 * k * l,
        g3_sup=6.0 * k * l * l,
        g_sup=k / l,
        params={"kappa": k, "lambda": l},
    )


def builtin_laws() -> list:
    """Named laws shipped with the package (default parameters)."""
    return [exponential_law(), rational_law()]


_FAMILIES = {"exponential": exponential_law, "rational": rational_law}


def law_from_config(spec: dict) -> CohesiveLaw:
    """Build a law from a ``{"family": ..., param: value}`` mapping.

    ``lambda`` is accepted as a parameter key (it is not an identifier we
    can use as a keyword argument, so it maps to ``lam``).
    """
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in _FAMILIES:
        raise InvalidLawError(f"unknown law family {family!r}; known: {sorted(_FAMILIES)}")
    if "lambda" in spec:
        spec["lam"] = spec.pop("lambda")
    return _FAMILIES[family](**spec)


# ----------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    axiom: str
    passed: bool
    measured: float
    threshold: float


@dataclass(frozen=True)
class ValidationReport:
    law: str
    A: float
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_axioms(self) -> list:
        return [c.axiom for c in self.checks if not c.passed]

    def lines(self) -> list:
        out = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"[{tag}] {c.axiom}: measured {c.measured:.6g} (threshold {c.threshold:.6g})")
        return out


def _fd1(f, s, h):
    return (f(s + h) - f(s - h)) / (2.0 * h)


def validate(law: CohesiveLaw, A: float, s_max: float = 10.0, samples: int = 2001,
             deriv_rtol: float = 1e-6) -> ValidationReport:
    """Check the cohesive-law axioms by dense sampling on [0, s_max].

    Raises InvalidLawError on non-finite samples (naming the offending
    axiom); returns a per-axiom pass/fail report otherwise.  The axiom
    ``2*A*sup|g''| < 1`` is the smallness condition coupling the strip
    height to the material; everything downstream (uniqueness, the
    propagated Lipschitz/semiconvexity constants) needs it.
    """
    if A <= 0:
        raise ValueError("strip height A must be positive")
    s = np.linspace(0.0, s_max, samples)
    vals = {}
    for nm, f in (("g", law.g), ("g'", law.g1), ("g''", law.g2), ("g'''", law.g3)):
        v = np.asarray(f(s), dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidLawError(f"non-finite sample of {nm} while checking axiom '{nm} finite'")
        vals[nm] = v

    checks = []

    def add(axiom, passed, measured, threshold):
        checks.append(CheckResult(axiom, bool(passed), float(measured), float(threshold)))

    g0 = float(np.asarray(law.g(0.0)))
    add("g(0) = 0", abs(g0) <= 1e-12 * max(1.0, law.g_sup if math.isfinite(law.g_sup) else 1.0),
        g0, 1e-12)
    add("strictly increasing (g' > 0)", np.min(vals["g'"]) > 0.0, float(np.min(vals["g'"])), 0.0)
    add("concave (g'' <= 0)", np.max(vals["g''"][1:]) <= 1e-12, float(np.max(vals["g''"][1:])), 0.0)
    bounded = math.isfinite(law.g_sup) and np.max(vals["g"]) <= law.g_sup * (1 + 1e-12) + 1e-12
    add("bounded (sup g finite)", bounded,
        float(np.max(vals["g"])), law.g_sup)
    add("g'(0+) finite and positive", 0.0 < law.gp0 < math.inf, law.gp0, 0.0)
    add("|g''| <= g2_sup", np.max(np.abs(vals["g''"])) <= law.g2_sup * (1 + 1e-9) + 1e-15,
        float(np.max(np.abs(vals["g''"]))), law.g2_sup)
    add("|g'''| <= g3_sup", np.max(np.abs(vals["g'''"])) <= law.g3_sup * (1 + 1e-9) + 1e-15,
        float(np.max(np.abs(vals["g'''"]))), law.g3_sup)
    add("2*A*sup|g''| < 1", 2.0 * A * law.g2_sup < 1.0, 2.0 * A * law.g2_sup, 1.0)

    # Derivative stack consistency, one order at a time: direct high-order
    # differences of g drown in cancellation noise long before rel 1e-6.
    sc = np.linspace(0.01, s_max, 257)
    for nm, parent, child in (("g'", law.g, law.g1),
                              ("g''", law.g1, law.g2),
                              ("g'''", law.g2, law.g3)):
        h = 1e-4 * np.maximum(1.0, np.abs(sc))
        fd = _fd1(parent, sc, h)
        cv = np.asarray(child(sc), dtype=float)
        floor = max(3.0 * np.finfo(float).eps
                    * np.max(np.abs(np.asarray(parent(sc), dtype=float))) / np.min(h),
                    1e-300)
        rel = np.max(np.abs(fd - cv) / np.maximum(np.abs(cv), floor))
        add(f"{nm} matches finite differences", rel <= deriv_rtol, float(rel), deriv_rtol)

    return ValidationReport(law=law.name, A=float(A), checks=tuple(checks))


# ----------------------------------------------------------------------
# proximal operator of s -> g(2|s|)
# ----------------------------------------------------------------------

def _check_prox_step(law, tau):
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("prox step tau must be positive")
    if np.any(4.0 * tau * law.g2_sup >= 1.0):
        raise StepTooLargeError(
            f"4*tau*sup|g''| = {float(np.max(4.0 * tau * law.g2_sup)):.3g} >= 1; "
            "shrink the step")


def scalar_prox(law: CohesiveLaw, w: float, tau: float, root_tol: float = 1e-12) -> float:
    """Unique minimizer of phi(s) = (s-w)^2/(2*tau) + g(2|s|).

    The kink at s=0 gives the closed-form stick test |w| <= 2*tau*g'(0+)
    before any root finding; otherwise the minimizer has the sign of w and
    solves (s-w)/tau + 2 g'(2|s|) sign(w) = 0 on the bracket (0, |w|),
    located by bisection with a Newton polish.
    """
    w = float(w)
    if w == 0.0:
        return 0.0   # both terms are minimized at 0, for any step
    _check_prox_step(law, tau)
    aw = abs(w)
    if aw <= 2.0 * tau * law.gp0:
        return 0.0
    lo, hi = 0.0, aw
    f = lambda s: (s - aw) / tau + 2.0 * float(np.asarray(law.g1(2.0 * s)))
    s = 0.5 * aw
    for _ in range(200):
        fs = f(s)
        if abs(fs) <= root_tol:
            break
        if fs < 0.0:
            lo = s
        else:
            hi = s
        # Newton step, safeguarded by the bracket
        fp = 1.0 / tau + 4.0 * float(np.asarray(law.g2(2.0 * s)))
        sn = s - fs / fp
        s = sn if lo < sn < hi else 0.5 * (lo + hi)
        if hi - lo <= 2.0 * np.finfo(float).eps * max(1.0, aw):
            break
    return math.copysign(s, w)


def prox_many(law: CohesiveLaw, w: np.ndarray, tau, n_bisect: int = 64) -> np.ndarray:
    """Vectorized prox: one safeguarded root find per entry, in lockstep.

    ``tau`` may be a scalar or an array broadcastable against ``w`` (the
    solver uses per-node steps tau * quadrature weight).
    """
    _check_prox_step(law, tau)
    w = np.asarray(w, dtype=float)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), w.shape)
    out = np.zeros_like(w)
    aw = np.abs(w)
    live = aw > 2.0 * tau * law.gp0
    if not np.any(live):
        return out
    wl = aw[live]
    tl = tau[live]
    lo = np.zeros_like(wl)
    hi = wl.copy()
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        fm = (mid - wl) / tl + 2.0 * law.g1(2.0 * mid)
        neg = fm < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    s = 0.5 * (lo + hi)
    for _ in range(2):  # Newton polish (phi is strongly convex here)
        fs = (s - wl) / tl + 2.0 * law.g1(2.0 * s)
        fp = 1.0 / tl + 4.0 * law.g2(2.0 * s)
        s = np.clip(s - fs / fp, 0.0, wl)
    out[live] = np.sign(w[live]) * s
    return out
