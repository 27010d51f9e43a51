"""Declarative scenario runner: config -> solve -> extract -> frequency ->
blow-up -> verdict table, with self-describing artifacts on disk.

A scenario is a TOML file with [grid], [law], [boundary], [solver],
[analysis] tables; every unset key takes a recorded default, and the output
directory is named by the scenario plus a content hash of the resolved
config, so identical configs land in identical paths with byte-identical
summaries.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np

from . import fieldio
from .blowup import analyze_blowup
from .boundary import make_boundary
from .extension import build_v, flip_sign
from .freeboundary import bound_suite, extract
from .frequency import (Classification, GeometryError, check_identities,
                        classify_point, default_radii, phi_profile)
from .grid import StripGrid
from .laws import law_from_config, validate
from .solver import NonConvergenceError, SolverOptions, solve

__all__ = ["Scenario", "RunBundle", "Verdict", "run", "sweep", "load_scenario"]


DEFAULTS = {
    "grid": {"n": 1, "L": 1.0, "A": 0.4, "mx": 257, "my": 65},
    "law": {"family": "exponential", "kappa": 1.0, "lambda": 1.0},
    "boundary": {"family": "compact_bump", "center": 0.0, "width": 0.45,
                 "amplitude": 1.2, "decay_tol": 1e-8},
    "solver": {"tol": 1e-8, "max_iter": 200000, "relaxation": 1.0,
               "step_safety": 0.9},
    "analysis": {"open_tol": "auto", "r_min_cells": 4.0, "min_radii": 8,
                 "centers": "auto", "mono_tol": 1e-3, "class_tol": 0.15,
                 "identity_tol": 0.02, "mu_phi_tol": 0.1,
                 "phase_gap_cells": 4.0, "rel_slack": 0.02},
}


@dataclass(eq=False)
class Scenario:
    name: str = "scenario"
    grid: dict = dc_field(default_factory=dict)
    law: dict = dc_field(default_factory=dict)
    boundary: dict = dc_field(default_factory=dict)
    solver: dict = dc_field(default_factory=dict)
    analysis: dict = dc_field(default_factory=dict)
    seed: int = 0
    sweep: dict = dc_field(default_factory=dict)

    def resolved(self) -> dict:
        out = {"name": self.name, "seed": int(self.seed)}
        for section, defaults in DEFAULTS.items():
            given = dict(getattr(self, section))
            if section in ("law", "boundary"):
                # family-specific parameter maps: defaults apply only when
                # the section is untouched (families differ in their keys)
                merged = given if given else dict(defaults)
                if section == "boundary":
                    merged.setdefault("family", defaults["family"])
                    merged.setdefault("decay_tol", defaults["decay_tol"])
                else:
                    merged.setdefault("family", defaults["family"])
            else:
                unknown = set(given) - set(defaults)
                if unknown:
                    raise KeyError(f"unknown key(s) {sorted(unknown)} in [{section}]")
                merged = {**defaults, **given}
            out[section] = merged
        return out

    def content_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def override(self, dotted: dict) -> "Scenario":
        """New scenario with dotted-key overrides like {"grid.mx": 513}."""
        sc = copy.deepcopy(self)
        for key, val in dotted.items():
            section, _, name = key.partition(".")
            if not name:
                raise KeyError(f"override key {key!r} must look like 'section.key'")
            getattr(sc, section)[name] = val
        return sc


def load_scenario(path) -> Scenario:
    try:
        import tomllib as toml_reader
    except ModuleNotFoundError:
        import tomli as toml_reader
    with open(path, "rb") as fh:
        raw = toml_reader.load(fh)
    sc = Scenario(name=raw.pop("name", os.path.splitext(os.path.basename(path))[0]),
                  seed=int(raw.pop("seed", 0)))
    for section in ("grid", "law", "boundary", "solver", "analysis", "sweep"):
        if section in raw:
            setattr(sc, section, dict(raw.pop(section)))
    if raw:
        raise KeyError(f"unknown top-level key(s) in scenario file: {sorted(raw)}")
    sc.resolved()  # fail fast on unknown keys
    return sc


@dataclass(frozen=True)
class Verdict:
    name: str
    status: str          # "pass" | "fail" | "na"
    measured: float = None
    target: str = ""


@dataclass(eq=False)
class RunBundle:
    name: str
    config_hash: str
    resolved: dict
    solution: object = None
    geometry: object = None
    bounds: object = None
    profiles: list = dc_field(default_factory=list)   # (center, profile, classification)
    identity: object = None
    blowup: object = None
    blowup_profile: object = None
    verdicts: list = dc_field(default_factory=list)
    failed: bool = False
    notes: list = dc_field(default_factory=list)
    out_path: str = None

    @property
    def all_green(self) -> bool:
        return (not self.failed) and all(v.status in ("pass", "na") for v in self.verdicts)

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def summary(self) -> dict:
        sol = self.solution
        out = {
            "name": self.name,
            "config_hash": self.config_hash,
            "config": self.resolved,
            "failed": self.failed,
            "notes": list(self.notes),
            "verdicts": [{"name": v.name, "status": v.status,
                          "measured": v.measured, "target": v.target}
                         for v in self.verdicts],
        }
        if sol is not None:
            out["solution"] = {
                "energy": sol.energy,
                "iterations": sol.iterations,
                "kkt_residual": sol.kkt_residual,
                "max_abs_u": float(np.max(np.abs(sol.u))),
                "open_nodes": int(np.count_nonzero(np.abs(sol.trace) > sol.open_tol)),
            }
        if self.geometry is not None:
            out["geometry"] = self.geometry.to_dict()
        if self.bounds is not None:
            out["bounds"] = self.bounds.to_dict()
        out["frequency"] = [
            {"center": list(np.atleast_1d(c).astype(float)),
             "profile": p.to_dict(), "classification": cl.value}
            for c, p, cl in self.profiles
        ]
        if self.identity is not None:
            out["identity"] = self.identity.to_dict()
        if self.blowup is not None:
            out["blowup"] = self.blowup.to_dict()
        return out


def _positive_window(geom, grid):
    """Lateral window around the widest positive component (n=1).

    Each side extends to the domain edge unless the negative phase sits on
    that side, in which case it stops halfway across the separating gap.
    """
    if not geom.pos_intervals:
        return None
    lo, hi = max(geom.pos_intervals, key=lambda iv: iv[1] - iv[0])
    left_neg = [b for a, b in geom.neg_intervals if b < lo]
    right_neg = [a for a, b in geom.neg_intervals if a > hi]
    wlo = (lo + max(left_neg)) / 2.0 if left_neg else -grid.L
    whi = (hi + min(right_neg)) / 2.0 if right_neg else grid.L
    return ((max(wlo, -grid.L), min(whi, grid.L)),)


def run(scenario: Scenario, out_dir=None, force_outside_hypotheses=False) -> RunBundle:
    """Execute the full pipeline for one scenario."""
    cfg = scenario.resolved()
    bundle = RunBundle(name=cfg["name"], config_hash=scenario.content_hash(),
                       resolved=cfg)

    grid = StripGrid(**cfg["grid"])
    law = law_from_config(cfg["law"])
    bd_cfg = dict(cfg["boundary"])
    family = bd_cfg.pop("family")
    decay_tol = bd_cfg.pop("decay_tol")
    data = make_boundary(family, grid.n, grid.L, decay_tol=decay_tol, **bd_cfg)

    report = validate(law, grid.A)
    bundle.notes.append(f"law validation: {'pass' if report.passed else 'FAIL'}")
    an = cfg["analysis"]
    open_tol = None if an["open_tol"] == "auto" else float(an["open_tol"])
    opts = SolverOptions(tol=cfg["solver"]["tol"], max_iter=int(cfg["solver"]["max_iter"]),
                         relaxation=cfg["solver"]["relaxation"],
                         step_safety=cfg["solver"]["step_safety"], open_tol=open_tol)

    try:
        sol = solve(grid, data, law, opts=opts,
                    force_outside_hypotheses=force_outside_hypotheses)
    except NonConvergenceError as err:
        bundle.failed = True
        bundle.notes.append(f"solver did not converge: residual {err.residual:.3e}")
        bundle.solution = err.solution
        if out_dir is not None:
            _write_artifacts(bundle, out_dir)
        return bundle

    bundle.solution = sol
    geom = extract(sol)
    bundle.geometry = geom
    if report.passed:
        bundle.bounds = bound_suite(sol, law, data, rel_slack=an["rel_slack"])
    else:
        bundle.notes.append("bound suite skipped: law outside hypotheses, "
                            "propagated constants undefined")

    analysis_sol = sol
    if grid.n == 1 and not geom.pos_intervals and geom.neg_intervals:
        analysis_sol = flip_sign(sol)
        geom_flip = extract(analysis_sol)
        bundle.notes.append("no positive phase: analyzing the sign-flipped solution")
        window = _positive_window(geom_flip, grid)
    else:
        window = _positive_window(geom, grid) if grid.n == 1 else None

    from .extension import PhaseWindowError
    centers = []
    vfield = None
    try:
        if an["centers"] == "auto":
            if grid.n == 1 and window is not None:
                vfield = build_v(analysis_sol, law, window=window)
                centers = [c for c in vfield.center_candidates]
            elif grid.n == 2 and geom.graph is not None:
                vfield = build_v(analysis_sol, law)
                centers = [(x1, f) for x1, f in zip(geom.graph.x1, geom.graph.f)]
                centers = centers[len(centers) // 2: len(centers) // 2 + 1]
        else:
            vfield = build_v(analysis_sol, law, window=window)
            centers = [c for c in an["centers"]]
    except PhaseWindowError as err:
        bundle.notes.append(f"no analysis window: {err}")
        centers = []

    for c in centers:
        try:
            radii = default_radii(vfield, c, r_min_cells=an["r_min_cells"])
        except GeometryError as err:
            bundle.notes.append(f"center {c}: {err}")
            continue
        if radii.size < an["min_radii"]:
            bundle.notes.append(
                f"center {c}: only {radii.size} admissible radii (< {an['min_radii']})")
            continue
        prof = phi_profile(vfield, c, radii, mono_tol=an["mono_tol"])
        cls = classify_point(prof, class_tol=an["class_tol"])
        bundle.profiles.append((c, prof, cls))

    if bundle.profiles:
        c0, prof0, cls0 = bundle.profiles[0]
        for c, prof, cls in bundle.profiles:
            if cls is Classification.REGULAR_3HALF:
                c0, prof0, cls0 = c, prof, cls
                break
        mid_r = float(prof0.radii[len(prof0.radii) // 2])
        bundle.identity = check_identities(vfield, law, c0, mid_r)
        if prof0.radii.size >= 6:
            bundle.blowup = analyze_blowup(vfield, c0, prof0.radii)
            bundle.blowup_profile = prof0
            bundle.notes.append(f"blow-up center: {c0}")
        else:
            bundle.notes.append(
                f"blow-up skipped: {prof0.radii.size} radii < 6 at center {c0}")

    bundle.verdicts = _verdicts(bundle, grid, an)
    if out_dir is not None:
        _write_artifacts(bundle, out_dir)
    return bundle


def _verdicts(bundle, grid, an):
    out = []
    if bundle.bounds is None:
        for name in ("max_principle", "normal_bound", "strip_bound",
                     "lipschitz", "semiconvexity", "semiconcavity"):
            out.append(Verdict(name, "na", None, "outside hypotheses"))
    else:
        for row in bundle.bounds.rows:
            out.append(Verdict(row.name, "pass" if row.passed else "fail",
                               row.measured, f"<= {row.bound:.6g}"))

    geom = bundle.geometry
    if math.isinf(geom.phase_gap):
        out.append(Verdict("phase_gap", "na", None, "single phase"))
    else:
        need = an["phase_gap_cells"] * grid.hx
        out.append(Verdict("phase_gap", "pass" if geom.phase_gap >= need else "fail",
                           geom.phase_gap, f">= {need:.6g}"))

    if not bundle.profiles:
        out.append(Verdict("phi_monotonicity", "na", None, "no admissible center"))
        out.append(Verdict("classification", "na", None, "no admissible center"))
    else:
        cfit_ok = all(math.isfinite(p.C_fit) for _, p, _ in bundle.profiles)
        worst = max(p.C_fit for _, p, _ in bundle.profiles) if cfit_ok else math.inf
        out.append(Verdict("phi_monotonicity", "pass" if cfit_ok else "fail",
                           worst, "C_fit finite"))
        ok = any(cl is not Classification.NOT_APPLICABLE for _, _, cl in bundle.profiles)
        labels = ",".join(sorted({cl.value for _, _, cl in bundle.profiles}))
        out.append(Verdict("classification", "pass" if ok else "fail",
                           None, labels))

    if bundle.blowup is None:
        out.append(Verdict("mu_fit", "na", None, "no blow-up center"))
    else:
        bu = bundle.blowup
        dev = abs(2.0 * bu.mu + grid.n - bundle.blowup_profile.Phi0)
        out.append(Verdict("mu_fit", "pass" if dev <= an["mu_phi_tol"] else "fail",
                           bu.mu, f"|2mu+n-Phi0| = {dev:.3g} <= {an['mu_phi_tol']}"))

    if bundle.identity is None:
        out.append(Verdict("identity_checks", "na", None, "no admissible center"))
    else:
        worst = bundle.identity.max_rel()
        out.append(Verdict("identity_checks",
                           "pass" if worst <= an["identity_tol"] else "fail",
                           worst, f"rel <= {an['identity_tol']}"))
    return out


def _write_artifacts(bundle, out_dir):
    path = os.path.join(str(out_dir), f"{bundle.name}-{bundle.config_hash[:12]}")
    os.makedirs(path, exist_ok=True)
    bundle.out_path = path
    fieldio.dump_json(os.path.join(path, "resolved_config.json"),
                      {"config": bundle.resolved, "hash": bundle.config_hash})

    sol = bundle.solution
    if sol is not None:
        grid = sol.grid
        axes = (grid.xs, grid.ys) if grid.n == 1 else (grid.xs, grid.xs, grid.ys)
        fieldio.write_field_csv(os.path.join(path, "solution_u.csv"), axes, sol.u)
        fieldio.write_field_binary(os.path.join(path, "solution_u"), axes, sol.u)
        if grid.n == 1:
            cols = np.stack([grid.xs, sol.trace, sol.normal, sol.flux], axis=-1)
            np.savetxt(os.path.join(path, "trace.csv"), cols, delimiter=",",
                       header="x,trace,normal,flux", comments="", fmt="%.17g")

    if bundle.geometry is not None:
        fieldio.dump_json(os.path.join(path, "geometry.json"), bundle.geometry.to_dict())
        if bundle.geometry.graph is not None:
            gr = bundle.geometry.graph
            cols = np.stack([gr.x1, gr.f, gr.slope], axis=-1)
            np.savetxt(os.path.join(path, "graph.csv"), cols, delimiter=",",
                       header="x1,f,slope", comments="", fmt="%.17g")
    for k, (c, prof, cls) in enumerate(bundle.profiles):
        fieldio.write_profile_csv(os.path.join(path, f"profile_{k}.csv"), prof)
    if bundle.blowup is not None:
        fieldio.dump_json(os.path.join(path, "blowup.json"), bundle.blowup.to_dict())

    with open(os.path.join(path, "verdicts.csv"), "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["name", "status", "measured", "target"])
        for v in bundle.verdicts:
            wr.writerow([v.name, v.status,
                         "" if v.measured is None else f"{v.measured:.17g}", v.target])

    fieldio.dump_json(os.path.join(path, "summary.json"), bundle.summary())
    return path


def sweep(base: Scenario, grid_spec: dict, out_dir=None, threads: int = 1,
          force_outside_hypotheses=False):
    """Cartesian product of dotted-key overrides; one bundle per cell.

    Per-cell failures are recorded in the row and the sweep continues.
    Returns the aggregate rows (also written as sweep.csv under out_dir).
    """
    keys = sorted(grid_spec)
    cells = [dict(zip(keys, combo)) for combo in product(*(grid_spec[k] for k in keys))]
    if not cells:
        cells = [{}]

    def one(cell):
        sc = base.override(cell)
        row = {k: cell[k] for k in keys}
        try:
            bundle = run(sc, out_dir=out_dir,
                         force_outside_hypotheses=force_outside_hypotheses)
            row["status"] = "ok" if bundle.all_green else "verdict-fail"
            row["hash"] = bundle.config_hash[:12]
            for v in bundle.verdicts:
                row[f"verdict.{v.name}"] = v.status
                if v.measured is not None:
                    row[f"measured.{v.name}"] = v.measured
            if bundle.geometry is not None:
                row["support_radius"] = bundle.geometry.support_radius
                row["phase_gap"] = bundle.geometry.phase_gap
            if bundle.blowup is not None:
                row["mu"] = bundle.blowup.mu
            if bundle.identity is not None:
                row["identity_max_rel"] = bundle.identity.max_rel()
        except Exception as err:  # per-cell isolation
            row["status"] = f"error: {type(err).__name__}: {err}"
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, cells))
    else:
        rows = [one(cell) for cell in cells]

    if out_dir is not None:
        os.makedirs(str(out_dir), exist_ok=True)
        cols = sorted({k for row in rows for k in row})
        with open(os.path.join(str(out_dir), "sweep.csv"), "w",
                  encoding="utf-8", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            wr.writeheader()
            for row in rows:
                wr.writerow({k: _cell_str(row.get(k, "")) for k in cols})
    return rows


def _cell_str(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.17g}"
    return v
