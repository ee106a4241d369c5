"""Command-line interface.

Subcommands: gen, solve-lp, round, exact, experiment, ratio-curve.
Exit code 0 on success, 2 when any experiment verification check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .exact import solve_exact
from .harness import (
    ExperimentConfig,
    minimize_ratio,
    ratio_curve,
    report_csv,
    report_json,
    run_experiment,
)
from .instance import generate_random, load_instance, save_instance
from .lp import build_lrp, lp_text, solve
from .rounding import DEFAULT_R, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starhub",
        description="Star-star hub assignment: relaxation, rounding, oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance corpus")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--n-min", type=int, default=3)
    gen.add_argument("--n-max", type=int, default=6)
    gen.add_argument("--h-min", type=int, default=3)
    gen.add_argument("--h-max", type=int, default=5)
    gen.add_argument("--ell-max", type=int, default=20)
    gen.add_argument("--c-max", type=float, default=10.0)
    gen.add_argument("--w-max", type=float, default=5.0)
    gen.add_argument("--density", type=float, default=0.6)
    gen.add_argument("--out", required=True, help="directory, or a .json path when --count 1")

    lp_cmd = sub.add_parser("solve-lp", help="build and solve the relaxation")
    lp_cmd.add_argument("instance")
    lp_cmd.add_argument("--out", help="write solution JSON here")
    lp_cmd.add_argument("--dump-lp", help="write the model in LP text format")

    rnd = sub.add_parser("round", help="run the randomized rounding pipeline")
    rnd.add_argument("instance")
    rnd.add_argument("--r", type=float, default=DEFAULT_R)
    rnd.add_argument("--trials", type=int, default=100)
    rnd.add_argument("--seed", type=int, default=0)
    rnd.add_argument("--no-truncate-u", action="store_true",
                     help="draw phase thresholds from [0,1) instead of the live maximum")
    rnd.add_argument("--out")
    rnd.add_argument("--format", choices=("csv", "json"), default="json")

    ex = sub.add_parser("exact", help="brute-force optimum (small instances)")
    ex.add_argument("instance")
    ex.add_argument("--limit", type=int, default=10**8)
    ex.add_argument("--out")

    exp = sub.add_parser("experiment", help="corpus experiment with verification checks")
    exp.add_argument("--instances", type=int, default=50)
    exp.add_argument("--n-min", type=int, default=3)
    exp.add_argument("--n-max", type=int, default=6)
    exp.add_argument("--h-min", type=int, default=3)
    exp.add_argument("--h-max", type=int, default=5)
    exp.add_argument("--ell-max", type=int, default=20)
    exp.add_argument("--c-max", type=float, default=10.0)
    exp.add_argument("--w-max", type=float, default=5.0)
    exp.add_argument("--density", type=float, default=0.6)
    exp.add_argument("--trials", type=int, default=2000)
    exp.add_argument("--r", type=float, default=DEFAULT_R)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--no-truncate-u", action="store_true")
    exp.add_argument("--marginal-trials", type=int, default=10**4)
    exp.add_argument("--no-checks", action="store_true",
                     help="skip the verification suites, keep the cost report")
    exp.add_argument("--out", help="output path; extension added per --format")
    exp.add_argument("--format", choices=("csv", "json"), default="csv")

    curve = sub.add_parser("ratio-curve", help="tabulate the guarantee factor f(r)")
    curve.add_argument("--r-min", type=float, default=1.05)
    curve.add_argument("--r-max", type=float, default=6.0)
    curve.add_argument("--points", type=int, default=100)
    curve.add_argument("--out")
    curve.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    out = Path(args.out)
    single = args.count == 1 and out.suffix == ".json"
    if not single:
        out.mkdir(parents=True, exist_ok=True)
    shape_rng = np.random.default_rng([args.seed, 0])
    for idx in range(args.count):
        n = int(shape_rng.integers(args.n_min, args.n_max + 1))
        h = int(shape_rng.integers(args.h_min, args.h_max + 1))
        inst = generate_random(
            [args.seed, idx, 1],
            n=n,
            h=h,
            ell_max=args.ell_max,
            c_max=args.c_max,
            w_max=args.w_max,
            density=args.density,
        )
        path = out if single else out / f"instance_{idx:03d}.json"
        save_instance(inst, path)
        print(f"wrote {path} (n={inst.n}, h={inst.h})")
    return 0


def cmd_solve_lp(args) -> int:
    inst = load_instance(args.instance)
    lp = build_lrp(inst)
    if args.dump_lp:
        Path(args.dump_lp).write_text(lp_text(lp), encoding="utf-8")
        print(f"wrote {args.dump_lp}")
    sol = solve(lp)
    print(f"status={sol.solver_status} objective={sol.objective_value:.12g}")
    if args.out:
        payload = {
            "status": sol.solver_status,
            "objective": sol.objective_value,
            "x": sol.x.tolist(),
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_round(args) -> int:
    inst = load_instance(args.instance)
    result = run_pipeline(
        inst,
        r=args.r,
        trials=args.trials,
        seed=args.seed,
        truncate_u=not args.no_truncate_u,
    )
    mean = float(result.costs.mean())
    print(
        f"lp={result.fractional.objective_value:.12g} best={result.cost:.12g} "
        f"mean={mean:.12g} trials={args.trials}"
    )
    print("assignment=" + " ".join(str(i) for i in result.assignment.hubs))
    if args.out:
        if args.format == "json":
            payload = {
                "r": args.r,
                "trials": args.trials,
                "seed": args.seed,
                "lp_value": result.fractional.objective_value,
                "best_cost": result.cost,
                "mean_cost": mean,
                "assignment": list(result.assignment.hubs),
                "costs": result.costs.tolist(),
            }
            text = json.dumps(payload, indent=2) + "\n"
        else:
            lines = ["trial,cost"] + [
                f"{t},{format(c, '.17g')}" for t, c in enumerate(result.costs)
            ]
            text = "\n".join(lines) + "\n"
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_exact(args) -> int:
    inst = load_instance(args.instance)
    assignment, value = solve_exact(inst, limit=args.limit)
    print(f"optimum={value:.12g}")
    print("assignment=" + " ".join(str(i) for i in assignment.hubs))
    if args.out:
        payload = {"optimum": value, "assignment": list(assignment.hubs)}
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_experiment(args) -> int:
    config = ExperimentConfig(
        instances=args.instances,
        n_range=(args.n_min, args.n_max),
        h_range=(args.h_min, args.h_max),
        ell_max=args.ell_max,
        c_max=args.c_max,
        w_max=args.w_max,
        density=args.density,
        trials=args.trials,
        r=args.r,
        seed=args.seed,
        truncate_u=not args.no_truncate_u,
        marginal_trials=args.marginal_trials,
        run_checks=not args.no_checks,
    )
    report = run_experiment(config)
    text = report_csv(report) if args.format == "csv" else report_json(report)
    out = args.out
    if out and not out.endswith(f".{args.format}"):
        out = f"{out}.{args.format}"
    _write_or_print(text, out)
    for check in report.checks:
        print(f"check {check.name}: {'PASS' if check.passed else 'FAIL'} ({check.detail})")
    failures = [r for r in report.rows if r.note]
    for row in failures:
        print(f"row {row.instance_id}: ERROR ({row.note})")
    return 0 if report.passed else 2


def cmd_ratio_curve(args) -> int:
    if args.points < 2 or args.r_min <= 1.0 or args.r_max <= args.r_min:
        print("ratio-curve requires r-min > 1, r-max > r-min, points >= 2", file=sys.stderr)
        return 2
    grid = [
        args.r_min + (args.r_max - args.r_min) * k / (args.points - 1)
        for k in range(args.points)
    ]
    table = ratio_curve(grid)
    r_star, f_star = minimize_ratio()
    if args.format == "json":
        text = json.dumps(
            {"curve": [{"r": r, "f": f} for r, f in table],
             "r_star": r_star, "f_star": f_star},
            indent=2,
        ) + "\n"
    else:
        lines = ["r,f"] + [f"{format(r, '.17g')},{format(f, '.17g')}" for r, f in table]
        text = "\n".join(lines) + "\n"
    _write_or_print(text, args.out)
    print(f"minimum f({r_star:.6f}) = {f_star:.6f}")
    return 0


_COMMANDS = {
    "gen": cmd_gen,
    "solve-lp": cmd_solve_lp,
    "round": cmd_round,
    "exact": cmd_exact,
    "experiment": cmd_experiment,
    "ratio-curve": cmd_ratio_curve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
