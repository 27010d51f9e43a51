"""Command-line front end: validate-law, solve, analyze, sweep, report.

Exit code 0 only when every verdict passes or is not applicable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


from . import fieldio
from .grid import StripGrid
from .laws import InvalidLawError, law_from_config, validate
from .scenarios import load_scenario, run, sweep


def _parser():
    p = argparse.ArgumentParser(prog="stripfrac",
                                description="cohesive-crack strip solver and "
                                            "free-boundary diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", required=True, help="scenario TOML file")
        if out:
            sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override scenario seed")
        sp.add_argument("--force-outside-hypotheses", action="store_true",
                        help="run even if the law fails validation on this strip")

    sp = sub.add_parser("validate-law", help="check the law axioms on the scenario strip")
    sp.add_argument("--config", required=True)

    common(sub.add_parser("solve", help="solve only, write the field artifacts"))
    common(sub.add_parser("analyze", help="full solve + diagnostics pipeline"))

    sp = sub.add_parser("sweep", help="Cartesian sweep from the [sweep] table")
    common(sp)
    sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("report", help="re-print the verdicts of a finished bundle")
    sp.add_argument("bundle", help="bundle directory containing summary.json")
    return p


def _print_verdicts(verdicts):
    width = max(len(v["name"]) for v in verdicts) if verdicts else 10
    for v in verdicts:
        measured = "" if v["measured"] is None else f"measured={v['measured']:.6g}  "
        print(f"  {v['name']:<{width}}  {v['status']:<4}  {measured}{v['target']}")
    bad = [v["name"] for v in verdicts if v["status"] == "fail"]
    return bad


def main(argv=None) -> int:
    args = _parser().parse_args(argv)

    if args.command == "report":
        path = os.path.join(args.bundle, "summary.json")
        with open(path, "r", encoding="utf-8") as fh:
            summary = json.load(fh)
        print(f"scenario {summary['name']} ({summary['config_hash'][:12]})")
        bad = _print_verdicts(summary["verdicts"])
        if summary.get("failed"):
            print("status: solver FAILED")
            return 1
        return 1 if bad else 0

    scenario = load_scenario(args.config)
    if getattr(args, "seed", None) is not None:
        scenario.seed = args.seed
    cfg = scenario.resolved()

    if args.command == "validate-law":
        law = law_from_config(cfg["law"])
        grid = StripGrid(**cfg["grid"])
        report = validate(law, grid.A)
        for line in report.lines():
            print(line)
        return 0 if report.passed else 1

    force = args.force_outside_hypotheses

    if args.command == "solve":
        from .boundary import make_boundary
        from .solver import SolverOptions, solve as _solve
        grid = StripGrid(**cfg["grid"])
        law = law_from_config(cfg["law"])
        bd = dict(cfg["boundary"])
        family = bd.pop("family")
        decay_tol = bd.pop("decay_tol")
        data = make_boundary(family, grid.n, grid.L, decay_tol=decay_tol, **bd)
        opts = SolverOptions(tol=cfg["solver"]["tol"],
                             max_iter=int(cfg["solver"]["max_iter"]),
                             relaxation=cfg["solver"]["relaxation"],
                             step_safety=cfg["solver"]["step_safety"])
        try:
            sol = _solve(grid, data, law, opts=opts, force_outside_hypotheses=force)
        except InvalidLawError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        path = os.path.join(args.out, f"{cfg['name']}-{scenario.content_hash()[:12]}")
        os.makedirs(path, exist_ok=True)
        axes = (grid.xs, grid.ys) if grid.n == 1 else (grid.xs, grid.xs, grid.ys)
        fieldio.write_field_csv(os.path.join(path, "solution_u.csv"), axes, sol.u)
        fieldio.write_field_binary(os.path.join(path, "solution_u"), axes, sol.u)
        print(f"solved {cfg['name']}: energy={sol.energy:.9g} "
              f"iterations={sol.iterations} kkt={sol.kkt_residual:.3e}")
        print(f"artifacts: {path}")
        return 0

    if args.command == "analyze":
        try:
            bundle = run(scenario, out_dir=args.out, force_outside_hypotheses=force)
        except InvalidLawError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
        print(f"scenario {bundle.name} ({bundle.config_hash[:12]})")
        for note in bundle.notes:
            print(f"  note: {note}")
        bad = _print_verdicts([{"name": v.name, "status": v.status,
                                "measured": v.measured, "target": v.target}
                               for v in bundle.verdicts])
        print(f"artifacts: {bundle.out_path}")
        if bundle.failed:
            return 1
        return 1 if bad else 0

    if args.command == "sweep":
        spec = {k: list(v) for k, v in scenario.sweep.items()}
        rows = sweep(scenario, spec, out_dir=args.out, threads=args.threads,
                     force_outside_hypotheses=force)
        n_bad = sum(1 for row in rows if row.get("status") != "ok")
        for row in rows:
            cell = {k: row[k] for k in spec}
            print(f"  {cell}: {row.get('status')}")
        print(f"sweep: {len(rows)} cells, {n_bad} not green; table: "
              f"{os.path.join(args.out, 'sweep.csv')}")
        return 1 if n_bad else 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
