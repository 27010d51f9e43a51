"""The oracles themselves: size gates, trivial cases, tagged synthetics."""

import numpy as np
import pytest

import stripfrac as sf


def test_dense_schur_zero_data():
    grid = sf.StripGrid(n=1, L=1.0, A=0.5, mx=9, my=7)
    data = sf.make_boundary("zero", 1, grid.L)
    S, b, c = sf.dense_schur(grid, data)
    assert np.all(b == 0.0)
    assert c == 0.0
    w = np.linalg.eigvalsh(S)
    assert np.min(w) > 0.0


def test_dense_schur_size_gate():
    grid = sf.StripGrid(n=1, L=1.0, A=0.5, mx=513, my=65)   # 33345 nodes
    data = sf.make_boundary("zero", 1, grid.L)
    with pytest.raises(sf.OracleSizeError, match="refused"):
        sf.dense_schur(grid, data)


def test_brute_force_trivial_and_gate(law):
    grid = sf.StripGrid(n=1, L=0.8, A=0.35, mx=7, my=5)
    zero = sf.make_boundary("zero", 1, grid.L)
    assert np.all(sf.brute_force_minimize(grid, zero, law) == 0.0)
    big = sf.StripGrid(n=1, L=0.8, A=0.35, mx=17, my=5)
    with pytest.raises(sf.OracleSizeError):
        sf.brute_force_minimize(big, zero, law)


def test_brute_force_warns_outside_hypotheses():
    law = sf.exponential_law(1.0, 2.0)   # g2_sup = 4, 2*A*4 >= 1 for A = 0.35
    grid = sf.StripGrid(n=1, L=0.8, A=0.35, mx=7, my=5)
    data = sf.make_boundary("compact_bump", 1, grid.L, width=0.5, amplitude=0.5)
    with pytest.warns(UserWarning, match="convexity"):
        sf.brute_force_minimize(grid, data, law)


def test_synthetic_field_tags(synthetic_fields):
    tags = {"three_halves_profile": (1.5, 4.0), "harmonic_deg1": (1.0, 3.0),
            "harmonic_deg2": (2.0, 5.0), "harmonic_deg3": (3.0, 7.0),
            "harmonic_deg4": (4.0, 9.0), "kink_ramp": (1.0, 3.0)}
    for name, (mu, phi) in tags.items():
        s = synthetic_fields[name]
        assert s.mu == mu and s.phi == phi
        assert np.array_equal(s.field.v[..., ::-1], s.field.v)   # even in y


def test_synthetic_harmonics_are_harmonic(synthetic_fields):
    f = synthetic_fields["harmonic_deg3"].field
    v = f.v
    hx, hy = f.hx, f.hy
    lap = ((v[2:, 1:-1] + v[:-2, 1:-1] - 2 * v[1:-1, 1:-1]) / hx**2
           + (v[1:-1, 2:] + v[1:-1, :-2] - 2 * v[1:-1, 1:-1]) / hy**2)
    # keep clear of the y=0 reflection row, where deg-3 evenization kinks
    j0 = f.j0
    assert np.max(np.abs(lap[:, : j0 - 2])) <= 1e-8
    assert np.max(np.abs(lap[:, j0 + 2:])) <= 1e-8


def test_closed_form_fields_n2():
    fields = {f.name: f for f in sf.closed_form_fields(n=2, mx=65, my=33)}
    s = fields["three_halves_profile"]
    assert s.phi == 2 + 2 * 1.5
    # constant in the tangential lateral direction
    assert np.ptp(s.field.v[:, 10, 7]) <= 1e-12
