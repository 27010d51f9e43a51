"""Shared scenario fixtures; the expensive solves are session-scoped."""

import pytest

import stripfrac as sf


@pytest.fixture(scope="session")
def law():
    return sf.exponential_law(1.0, 1.0)


@pytest.fixture(scope="session")
def small_bump(law):
    """Desk-size cracked bump on [-1,1] x [0, 0.4]."""
    grid = sf.StripGrid(n=1, L=1.0, A=0.4, mx=257, my=65)
    data = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=1.2)
    sol = sf.solve(grid, data, law)
    return grid, data, sol


@pytest.fixture(scope="session")
def small_bump_refined(law):
    """The same scenario with every cell halved (for fd_tol calibration)."""
    grid = sf.StripGrid(n=1, L=1.0, A=0.4, mx=513, my=129)
    data = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=1.2)
    sol = sf.solve(grid, data, law)
    return grid, data, sol


@pytest.fixture(scope="session")
def bump_regular(law):
    """The acceptance-scale run: fine enough for >= 8 frequency radii."""
    grid = sf.StripGrid(n=1, L=1.0, A=0.4, mx=1025, my=257)
    data = sf.make_boundary("compact_bump", 1, grid.L, width=0.45, amplitude=1.2)
    sol = sf.solve(grid, data, law)
    return grid, data, sol


@pytest.fixture(scope="session")
def dipole_pair(law):
    """Dipole scenario at two lateral resolutions (phase-separation checks)."""
    out = {}
    for mx, my in ((257, 65), (513, 129)):
        grid = sf.StripGrid(n=1, L=1.6, A=0.4, mx=mx, my=my)
        data = sf.make_boundary("dipole", 1, grid.L, separation=1.2,
                                amplitude=1.2, width=0.4)
        out[mx] = (grid, data, sf.solve(grid, data, law))
    return out


@pytest.fixture(scope="session")
def synthetic_fields():
    """Closed-form fields on a 512^2 lattice (n=1), keyed by name."""
    fields = sf.closed_form_fields(n=1, L=1.0, A=1.0, mx=512, my=257)
    return {f.name: f for f in fields}


@pytest.fixture(scope="session")
def small_bump_v(law, small_bump):
    grid, data, sol = small_bump
    return sf.build_v(sol, law)
