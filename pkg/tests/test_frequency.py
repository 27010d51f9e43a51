"""Frequency function on closed forms and solved fields."""

import math

import numpy as np
import pytest

import stripfrac as sf
from stripfrac.extension import ReflectedField
from stripfrac.frequency import FrequencyProfile


def _const_field(value=1.0):
    return ReflectedField.from_function(lambda x, y: np.full_like(x, value),
                                        1, 1.0, 1.0, 257, 129)


def test_F_constant_field():
    f = _const_field(1.0)
    # circumference of the r=0.5 circle
    assert abs(sf.F_of_r(f, 0.0, 0.5) - math.pi) <= 1e-10


def test_F_abs_y_field():
    f = ReflectedField.from_function(lambda x, y: np.abs(y), 1, 2.0, 2.0, 513, 257)
    # int (r sin t)^2 r dt = pi r^3
    assert abs(sf.F_of_r(f, 0.0, 1.0) - math.pi) <= 2e-4 * math.pi


def test_F_homogeneity_three_halves(synthetic_fields):
    f = synthetic_fields["three_halves_profile"].field
    ratio = sf.F_of_r(f, 0.0, 0.4) / sf.F_of_r(f, 0.0, 0.2)
    assert abs(ratio - 2.0 ** 4) <= 1e-4 * 2.0 ** 4


def test_F_geometry_error(synthetic_fields):
    f = synthetic_fields["three_halves_profile"].field
    with pytest.raises(sf.GeometryError):
        sf.F_of_r(f, 0.9, 0.5)


def test_phi_constant_for_homogeneous(synthetic_fields):
    for name, expect in [("three_halves_profile", 4.0), ("harmonic_deg2", 5.0),
                         ("kink_ramp", 3.0)]:
        f = synthetic_fields[name].field
        prof = sf.phi_profile(f, 0.0)
        assert np.max(np.abs(prof.Phi - expect)) <= 1e-2, name
        assert abs(prof.Phi0 - expect) <= 1e-2, name
        assert synthetic_fields[name].phi == expect


def test_zero_opening_ramp_is_not_a_transition_point(synthetic_fields):
    # Phi0 = 3 sits in the excluded gap: the center is not a crack tip
    prof = sf.phi_profile(synthetic_fields["kink_ramp"].field, 0.0)
    with pytest.warns(UserWarning, match="unresolved"):
        assert sf.classify_point(prof) is sf.Classification.NOT_APPLICABLE


def test_phi_scaling_invariance():
    base = ReflectedField.from_function(
        lambda x, y: np.hypot(x, y) ** 1.5 * np.cos(1.5 * np.arctan2(np.abs(y), x)),
        1, 1.0, 1.0, 257, 129)
    scaled = ReflectedField.from_function(
        lambda x, y: 7.0 * np.hypot(x, y) ** 1.5 * np.cos(1.5 * np.arctan2(np.abs(y), x)),
        1, 1.0, 1.0, 257, 129)
    radii = sf.default_radii(base, 0.0)
    p1 = sf.phi_profile(base, 0.0, radii)
    p2 = sf.phi_profile(scaled, 0.0, radii)
    assert np.max(np.abs(p1.Phi - p2.Phi)) <= 1e-12


def test_all_truncated_degenerate_report():
    f = ReflectedField.from_function(lambda x, y: 1e-20 * np.hypot(x, y) ** 2,
                                     1, 1.0, 1.0, 129, 65)
    prof = sf.phi_profile(f, 0.0)
    assert prof.degenerate
    assert np.all(prof.truncated)
    assert np.all(prof.Phi == 5.0)   # n + 4
    assert prof.Phi0 == 5.0
    assert sf.classify_point(prof) is sf.Classification.DEGENERATE_GE_NPLUS4


def _profile_with_phi0(phi0):
    r = np.linspace(0.1, 0.5, 9)
    return FrequencyProfile(center=(0.0,), n=1, radii=r,
                            F=np.ones_like(r), Phi=np.full_like(r, phi0),
                            truncated=np.zeros_like(r, dtype=bool),
                            C_fit=0.0, Phi0=phi0, degenerate=False, mono_tol=1e-3)


def test_classification_thresholds():
    assert sf.classify_point(_profile_with_phi0(4.02)) is sf.Classification.REGULAR_3HALF
    assert sf.classify_point(_profile_with_phi0(5.1)) is sf.Classification.DEGENERATE_GE_NPLUS4
    with pytest.warns(UserWarning, match="excluded gap"):
        assert sf.classify_point(_profile_with_phi0(3.5)) is sf.Classification.NOT_APPLICABLE


def test_green_identity_linearized(synthetic_fields):
    # no coupling: the divergence identity reduces to Green's identity
    f = synthetic_fields["harmonic_deg2"].field
    rep = sf.check_identities(f, None, 0.0, 0.35)
    assert rep["divergence"].rel_err <= 1e-3
    assert rep["flux_derivative"].rel_err <= 1e-3


def test_rellich_on_three_halves(synthetic_fields):
    f = synthetic_fields["three_halves_profile"].field
    rep = sf.check_identities(f, None, 0.0, 0.35)
    # n=1: lhs is exactly zero; the boundary split must cancel
    assert rep["rellich"].lhs == 0.0
    assert rep["rellich"].rel_err <= 1e-3


def test_identity_refinement_ratio(law):
    results = {}
    for mx, my in ((129, 33), (257, 65)):
        grid = sf.StripGrid(n=1, L=1.0, A=0.4, mx=mx, my=my)
        data = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=1.2)
        sol = sf.solve(grid, data, law)
        v = sf.build_v(sol, law)
        rep = sf.check_identities(v, law, 0.57, 0.15)
        results[mx] = rep["divergence"].rel_err
    assert results[129] / results[257] >= 3.0


def test_monotonicity_fit_on_solved(law, small_bump_v):
    geom_tip = max(small_bump_v.center_candidates)
    prof = sf.phi_profile(small_bump_v, geom_tip)
    assert math.isfinite(prof.C_fit)
    assert prof.monotone_with(prof.C_fit)
    assert sf.classify_point(prof) is sf.Classification.REGULAR_3HALF


def test_profile_csv_roundtrip(tmp_path, synthetic_fields):
    from stripfrac import fieldio
    f = synthetic_fields["three_halves_profile"].field
    prof = sf.phi_profile(f, 0.0)
    path = tmp_path / "profile.csv"
    fieldio.write_profile_csv(path, prof)
    rows = np.genfromtxt(path, delimiter=",", names=True)
    assert rows.shape[0] == len(prof.radii)
    assert np.allclose(rows["Phi"], prof.Phi)
