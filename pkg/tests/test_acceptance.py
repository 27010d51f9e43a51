"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with `pytest -v tests/test_acceptance.py` (add -s to see the lines as
they pass).  Tolerances are pinned here, not configurable.
"""

import time

import numpy as np
import pytest

import stripfrac as sf


def _report(num, name, ok, detail):
    print(f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num} {name}: {detail}"


# -- 1. prox oracle equivalence ---------------------------------------------

def test_c01_prox_oracle_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.monotonic()
    worst = 0.0
    for k in range(200):
        if k % 2 == 0:
            law = sf.exponential_law(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
        else:
            law = sf.rational_law(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
        tau = rng.uniform(0.2, 0.9) * 0.25 / law.g2_sup   # inside 4*tau*g2_sup < 1
        w = rng.uniform(-3.0, 3.0)
        got = sf.scalar_prox(law, w, tau)
        s = np.linspace(0.0, abs(w), 1_000_001) if w != 0 else np.zeros(1)
        phi = (s - abs(w)) ** 2 / (2 * tau) + law.g(2 * s)
        expect = np.sign(w) * s[np.argmin(phi)]
        worst = max(worst, abs(got - expect))
    elapsed = time.monotonic() - t0
    _report(1, "prox-oracle-equivalence", worst <= 1e-5 and elapsed < 10.0,
            f"max |ds| = {worst:.2e}, {elapsed:.1f}s over 200 cases")


# -- 2. Schur oracle equivalence --------------------------------------------

def test_c02_schur_oracle_equivalence():
    rng = np.random.default_rng(202)
    t0 = time.monotonic()
    worst = 0.0
    for _ in range(20):
        grid = sf.StripGrid(n=1, L=rng.uniform(0.5, 2.0), A=rng.uniform(0.2, 1.0),
                            mx=9, my=9)
        data = sf.make_boundary("gaussian", 1, grid.L,
                                width=rng.uniform(0.2, 0.8),
                                amplitude=rng.uniform(0.5, 2.0), decay_tol=10.0)
        S1, b1, c1 = sf.dirichlet_to_neumann(grid, data).dense()
        S2, b2, c2 = sf.dense_schur(grid, data)
        scale = max(np.max(np.abs(S2)), np.max(np.abs(b2)), abs(c2))
        worst = max(worst,
                    np.max(np.abs(S1 - S2)) / scale,
                    np.max(np.abs(b1 - b2)) / scale,
                    abs(c1 - c2) / scale)
    elapsed = time.monotonic() - t0
    _report(2, "schur-oracle-equivalence", worst <= 1e-10 and elapsed < 30.0,
            f"max rel mismatch = {worst:.2e}, {elapsed:.1f}s over 20 grids")


# -- 3. global-minimizer agreement ------------------------------------------

def test_c03_global_minimizer_agreement(law):
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(10):
        grid = sf.StripGrid(n=1, L=rng.uniform(0.6, 1.0), A=rng.uniform(0.25, 0.45),
                            mx=7, my=int(rng.integers(4, 7)))
        data = sf.make_boundary("compact_bump", 1, grid.L,
                                width=rng.uniform(0.4, 0.6),
                                amplitude=rng.uniform(0.8, 2.0))
        sol = sf.solve(grid, data, law, opts=sf.SolverOptions(tol=1e-10))
        ref = sf.brute_force_minimize(grid, data, law)
        worst = max(worst, float(np.max(np.abs(sol.trace[1:-1] - ref))))
    _report(3, "global-minimizer-agreement", worst <= 1e-6,
            f"sup distance = {worst:.2e} over 10 tiny instances")


# -- 4. uniqueness -----------------------------------------------------------

def test_c04_uniqueness(law, bump_regular):
    grid, data, _ = bump_regular
    worst = sf.uniqueness_probe(grid, data, law, seeds=5, seed=404)
    _report(4, "uniqueness-5-seeds", worst <= 10 * 1e-8,
            f"max pairwise distance = {worst:.2e}")


# -- 5. no-crack threshold ---------------------------------------------------

def test_c05_no_crack_threshold(law):
    grid = sf.StripGrid(n=1, L=1.0, A=0.4, mx=257, my=65)
    probe = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=1.0)
    _, flux = sf.dirichlet_extension(grid, probe)
    amp = 0.9 * law.gp0 / float(np.max(np.abs(flux)))
    data = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=amp)
    w, flux2 = sf.dirichlet_extension(grid, data)
    assert np.max(np.abs(flux2)) <= 0.9 * law.gp0 * (1 + 1e-12)
    sol = sf.solve(grid, data, law)
    trace_max = float(np.max(np.abs(sol.trace)))
    u_diff = float(np.max(np.abs(sol.u - w)))
    _report(5, "no-crack-threshold", trace_max <= sol.open_tol and u_diff <= 1e-8,
            f"max |trace| = {trace_max:.2e}, max |u - w| = {u_diff:.2e}")


# -- 6. bound suite with refinement-calibrated fd_tol ------------------------

def test_c06_bound_suite(law, small_bump, small_bump_refined, bump_regular,
                         dipole_pair):
    grid_c, data_c, sol_c = small_bump
    grid_f, data_f, sol_f = small_bump_refined

    def metrics(sol, law, data, grid):
        pb = sf.propagated_bounds(law, data, grid.A)
        lp = sf.lipschitz_profile(sol)
        sc = sf.semiconvexity_profile(sol)
        strip = sf.derivative_strip_bounds(sol, law, fd_tol=0.0)
        normal_slack = float(np.max(np.abs(sol.normal)
                                    - law.g1(2.0 * np.abs(sol.trace))))
        return {
            "lipschitz": (lp.max, pb["lipschitz"]),
            "semiconvexity": (sc.D_max, pb["semiconvexity"]),
            "semiconcavity": (sc.C_max, pb["semiconcavity"]),
            "normal": (max(normal_slack, 0.0), 0.0),
            "strip": (max(strip.max_upper_violation, strip.max_lower_violation,
                          0.0), 0.0),
        }

    coarse = metrics(sol_c, law, data_c, grid_c)
    fine = metrics(sol_f, law, data_f, grid_f)
    lines = []
    ok = True
    for name in coarse:
        mc, bound = coarse[name]
        mf, _ = fine[name]
        fd_tol = 4.0 * abs(mc - mf) + 1e-8
        good = mf <= bound + fd_tol
        ok = ok and good
        lines.append(f"{name}: {mf:.4g} <= {bound:.4g} + fd_tol {fd_tol:.2g}")

    # max principle and full suite on every converged run of the session
    runs = [small_bump, small_bump_refined, bump_regular] + list(dipole_pair.values())
    for grid, data, sol in runs:
        mp_ok = np.max(np.abs(sol.u)) <= data.max_abs + 1e-10 * data.max_abs
        suite = sf.bound_suite(sol, law, data)
        ok = ok and mp_ok and suite.passed
        if not (mp_ok and suite.passed):
            lines.append(f"suite failed on mx={grid.mx}: {suite.to_dict()}")
    _report(6, "bound-suite", ok, "; ".join(lines))


# -- 7. frequency on the closed-form profile ---------------------------------

def test_c07_frequency_closed_form(synthetic_fields):
    t0 = time.monotonic()
    field = synthetic_fields["three_halves_profile"].field
    prof = sf.phi_profile(field, 0.0)
    elapsed = time.monotonic() - t0
    dev = float(np.max(np.abs(prof.Phi - 4.0)))
    dev0 = abs(prof.Phi0 - 4.0)
    _report(7, "frequency-closed-form",
            dev <= 0.02 and dev0 <= 0.02 and elapsed < 60.0,
            f"max |Phi - 4| = {dev:.3f} over {len(prof.radii)} radii, "
            f"|Phi0 - 4| = {dev0:.3f}, {elapsed:.1f}s")


# -- 8. integral identities ---------------------------------------------------

def test_c08_identities(law, synthetic_fields):
    worst_closed = 0.0
    for name in ("three_halves_profile", "harmonic_deg2", "harmonic_deg3"):
        rep = sf.check_identities(synthetic_fields[name].field, None, 0.0, 0.35)
        worst_closed = max(worst_closed, rep.max_rel())

    rel = {}
    for mx, my in ((129, 33), (257, 65)):
        grid = sf.StripGrid(n=1, L=1.0, A=0.4, mx=mx, my=my)
        data = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=1.2)
        sol = sf.solve(grid, data, law)
        v = sf.build_v(sol, law)
        rep = sf.check_identities(v, law, 0.57, 0.15)
        rel[mx] = rep.max_rel()
    ratio = rel[129] / rel[257]
    _report(8, "integral-identities", worst_closed <= 1e-3 and ratio >= 3.0,
            f"closed-form max rel = {worst_closed:.2e}, "
            f"halving ratio = {ratio:.2f}")


# -- 9. blow-up on the solved regular scenario --------------------------------

def test_c09_blowup_regular(law, bump_regular):
    grid, data, sol = bump_regular
    v = sf.build_v(sol, law)
    tip = max(v.center_candidates)
    radii = sf.default_radii(v, tip)
    assert radii.size >= 8
    prof = sf.phi_profile(v, tip, radii)
    cls = sf.classify_point(prof)
    fit = sf.analyze_blowup(v, tip, radii)
    consistency = abs(2 * fit.mu + grid.n - prof.Phi0)
    ok = (fit.superquadratic and 1.4 <= fit.mu <= 1.6
          and fit.profile_distance <= 0.1 and consistency <= 0.1
          and cls is sf.Classification.REGULAR_3HALF)
    _report(9, "blowup-regular", ok,
            f"mu = {fit.mu:.3f}, superquadratic = {fit.superquadratic}, "
            f"profile distance = {fit.profile_distance:.3f}, "
            f"|2mu+n-Phi0| = {consistency:.3f}, class = {cls.value}")


# -- 10. phase separation ------------------------------------------------------

def test_c10_phase_separation(dipole_pair):
    gaps = {}
    ok = True
    for mx, (grid, _, sol) in dipole_pair.items():
        geom = sf.extract(sol)
        gaps[mx] = geom.phase_gap
        ok = ok and geom.phase_gap >= 4 * grid.hx
    drift = abs(gaps[513] - gaps[257]) / gaps[257]
    hx_fine = dipole_pair[513][0].hx
    nonincreasing = gaps[513] <= gaps[257] + hx_fine
    ok = ok and drift <= 0.2 and nonincreasing
    _report(10, "phase-separation", ok,
            f"gaps = {gaps[257]:.4f} (mx=257), {gaps[513]:.4f} (mx=513), "
            f"drift = {100 * drift:.1f}%, nonincreasing = {nonincreasing}")


# -- 11. degenerate classification ---------------------------------------------

def test_c11_degenerate_classification(synthetic_fields):
    field = synthetic_fields["harmonic_deg2"].field
    prof = sf.phi_profile(field, 0.0)
    cls = sf.classify_point(prof)
    _report(11, "degenerate-classification",
            cls is sf.Classification.DEGENERATE_GE_NPLUS4,
            f"Phi0 = {prof.Phi0:.3f}, class = {cls.value}")


# -- 12. determinism ------------------------------------------------------------

def test_c12_determinism(tmp_path):
    import os
    cfg = """\
name = "det"
[grid]
mx = 129
my = 33
[analysis]
min_radii = 4
"""
    path = tmp_path / "det.toml"
    path.write_text(cfg)
    sc = sf.load_scenario(path)
    b1 = sf.run(sc, out_dir=tmp_path / "r1")
    b2 = sf.run(sc, out_dir=tmp_path / "r2")
    s1 = open(os.path.join(b1.out_path, "summary.json"), "rb").read()
    s2 = open(os.path.join(b2.out_path, "summary.json"), "rb").read()
    _report(12, "determinism", s1 == s2,
            f"summary bytes equal = {s1 == s2}, {len(s1)} bytes")
