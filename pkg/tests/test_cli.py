"""Scenario files, the pipeline runner, artifacts and the CLI surface."""

import json
import os

import numpy as np
import pytest

import stripfrac as sf
from stripfrac import fieldio
from stripfrac.cli import main

SMALL_SCENARIO = """\
name = "cli-bump"

[grid]
n = 1
L = 1.0
A = 0.4
mx = 257
my = 65

[law]
family = "exponential"
kappa = 1.0
lambda = 1.0

[boundary]
family = "compact_bump"
center = 0.0
width = 0.45
amplitude = 1.2

[solver]
tol = 1e-8

[analysis]
min_radii = 6
"""

ZERO_SCENARIO = """\
name = "cli-zero"

[grid]
mx = 33
my = 9

[boundary]
family = "zero"
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "bump.toml"
    path.write_text(SMALL_SCENARIO)
    return path


def test_load_and_hash(config_path):
    sc = sf.load_scenario(config_path)
    assert sc.name == "cli-bump"
    assert sc.resolved()["grid"]["mx"] == 257
    h1 = sc.content_hash()
    sc2 = sf.load_scenario(config_path)
    assert h1 == sc2.content_hash()
    sc2.grid["mx"] = 129
    assert h1 != sc2.content_hash()


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[grid]\nmz = 3\n")
    with pytest.raises(KeyError, match="mz"):
        sf.load_scenario(path)


def test_run_bundle_and_artifacts(config_path, tmp_path):
    sc = sf.load_scenario(config_path)
    out = tmp_path / "out"
    bundle = sf.run(sc, out_dir=out)
    assert not bundle.failed
    assert bundle.all_green, [(v.name, v.status) for v in bundle.verdicts]
    names = {v.name for v in bundle.verdicts}
    assert {"max_principle", "normal_bound", "lipschitz", "semiconvexity",
            "phase_gap", "phi_monotonicity", "mu_fit", "identity_checks",
            "classification"} <= names
    assert bundle.verdict("phase_gap").status == "na"   # single phase
    for fname in ("summary.json", "resolved_config.json", "solution_u.csv",
                  "solution_u.f64", "solution_u.json", "trace.csv",
                  "geometry.json", "verdicts.csv", "profile_0.csv", "blowup.json"):
        assert os.path.exists(os.path.join(bundle.out_path, fname)), fname


def test_zero_scenario_all_green(tmp_path):
    path = tmp_path / "zero.toml"
    path.write_text(ZERO_SCENARIO)
    bundle = sf.run(sf.load_scenario(path), out_dir=tmp_path / "out")
    assert bundle.all_green
    assert bundle.verdict("mu_fit").status == "na"
    assert bundle.verdict("identity_checks").status == "na"


def test_determinism_byte_identical(config_path, tmp_path):
    sc = sf.load_scenario(config_path)
    b1 = sf.run(sc, out_dir=tmp_path / "a")
    b2 = sf.run(sc, out_dir=tmp_path / "b")
    s1 = open(os.path.join(b1.out_path, "summary.json"), "rb").read()
    s2 = open(os.path.join(b2.out_path, "summary.json"), "rb").read()
    assert s1 == s2


def test_field_binary_roundtrip(tmp_path):
    xs = np.linspace(-1, 1, 9)
    ys = np.linspace(0, 0.5, 5)
    vals = np.outer(np.sin(xs), np.cos(ys))
    base = tmp_path / "field"
    fieldio.write_field_binary(base, (xs, ys), vals)
    axes, back, meta = fieldio.read_field_binary(base)
    assert np.array_equal(back, vals)
    assert np.allclose(axes[0], xs)
    assert meta["order"] == "row-major"


def test_json_infinity_sanitized(tmp_path):
    path = tmp_path / "x.json"
    fieldio.dump_json(path, {"gap": float("inf"), "v": float("nan")})
    payload = json.loads(path.read_text())
    assert payload == {"gap": "inf", "v": "nan"}


def test_cli_analyze_and_report(config_path, tmp_path, capsys):
    out = str(tmp_path / "out")
    code = main(["analyze", "--config", str(config_path), "--out", out])
    assert code == 0
    printed = capsys.readouterr().out
    assert "mu_fit" in printed
    bundle_dir = [line for line in printed.splitlines() if line.startswith("artifacts:")]
    path = bundle_dir[0].split(" ", 1)[1]
    assert main(["report", path]) == 0


def test_cli_validate_law(config_path, tmp_path, capsys):
    assert main(["validate-law", "--config", str(config_path)]) == 0
    bad = tmp_path / "bad.toml"
    bad.write_text(SMALL_SCENARIO.replace('A = 0.4', 'A = 0.6'))
    assert main(["validate-law", "--config", str(bad)]) == 1
    assert "2*A*sup|g''|" in capsys.readouterr().out


def test_cli_solve(config_path, tmp_path, capsys):
    out = str(tmp_path / "solved")
    assert main(["solve", "--config", str(config_path), "--out", out]) == 0
    assert "energy=" in capsys.readouterr().out


def test_cli_sweep(tmp_path, capsys):
    path = tmp_path / "sw.toml"
    path.write_text(SMALL_SCENARIO + '\n[sweep]\n"grid.mx" = [65, 129]\n')
    out = str(tmp_path / "out")
    code = main(["sweep", "--config", str(path), "--out", out, "--threads", "2"])
    assert code == 0
    table = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert len(table) == 3   # header + 2 cells


def test_sweep_empty_grid_is_single_run(config_path, tmp_path):
    sc = sf.load_scenario(config_path)
    rows = sf.sweep(sc, {}, out_dir=tmp_path / "out")
    assert len(rows) == 1
    assert rows[0]["status"] == "ok"


DIPOLE_SCENARIO = """\
name = "cli-dipole"

[grid]
L = 1.6
A = 0.4
mx = 257
my = 65

[boundary]
family = "dipole"
separation = 1.2
amplitude = 1.2
width = 0.4

[analysis]
min_radii = 4
"""


def test_dipole_scenario_phase_gap_verdict(tmp_path):
    path = tmp_path / "dipole.toml"
    path.write_text(DIPOLE_SCENARIO)
    bundle = sf.run(sf.load_scenario(path))
    v = bundle.verdict("phase_gap")
    assert v.status == "pass"
    assert v.measured > 0


def test_nonconvergent_run_flags_failed_with_partial_artifacts(config_path, tmp_path):
    sc = sf.load_scenario(config_path)
    sc.solver["max_iter"] = 2
    bundle = sf.run(sc, out_dir=tmp_path / "out")
    assert bundle.failed
    assert not bundle.all_green
    assert bundle.solution is not None            # partial solution kept
    assert os.path.exists(os.path.join(bundle.out_path, "summary.json"))
    assert os.path.exists(os.path.join(bundle.out_path, "solution_u.csv"))
    summary = json.load(open(os.path.join(bundle.out_path, "summary.json")))
    assert summary["failed"] is True


def test_explicit_centers(config_path):
    sc = sf.load_scenario(config_path)
    auto = sf.run(sc)
    tip = auto.profiles[0][0]
    sc.analysis["centers"] = [tip]
    explicit = sf.run(sc)
    assert len(explicit.profiles) == 1
    assert explicit.profiles[0][0] == tip
    assert np.allclose(explicit.profiles[0][1].Phi, auto.profiles[0][1].Phi)


def test_cli_force_outside_hypotheses(tmp_path, capsys):
    path = tmp_path / "wide.toml"
    path.write_text(SMALL_SCENARIO.replace("A = 0.4", "A = 0.6")
                    .replace("mx = 257", "mx = 129").replace("my = 65", "my = 33"))
    code = main(["analyze", "--config", str(path), "--out", str(tmp_path / "o"),
                 "--force-outside-hypotheses"])
    out = capsys.readouterr().out
    assert "outside hypotheses" in out
    assert code in (0, 1)   # runs to completion; bound verdicts are NA
    with pytest.raises(SystemExit):
        main(["analyze", "--config", "missing", "--bogus"])


def test_sweep_records_cell_failures(config_path, tmp_path):
    sc = sf.load_scenario(config_path)
    rows = sf.sweep(sc, {"grid.mx": [129, 2]}, out_dir=tmp_path / "out")
    by_mx = {row["grid.mx"]: row for row in rows}
    assert by_mx[129]["status"] == "ok"
    assert by_mx[2]["status"].startswith("error")
