"""Command line interface.

Exit codes: 0 success, 1 error, 2 fail-safe (some slot has no trusted model).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .attack import InstanceSpec, generate_instance, swap_percentile_attack
from .core import (
    DEFAULT_BUDGET,
    DEFAULT_EPS,
    DEFAULT_H0,
    DEFAULT_LAMBDA,
    DEFAULT_P_MAX,
    DEFAULT_RATE,
    BudgetConfig,
    compute_trust_matrix,
    exclude_outliers,
)
from .errors import TrustselError
from .io import (
    config_to_dict,
    ensure_dir,
    load_binary,
    load_config,
    load_outputs,
    plan_to_dict,
    read_matrix_csv,
    save_json,
    save_outputs,
    write_matrix_csv,
)
from .pipeline import EXIT_ERROR, EXIT_FAILSAFE, EXIT_OK, SOLVERS, run_pipeline, solve_all
from .relaxation import build_lp, write_lp

log = logging.getLogger("trustsel")

_DEFAULTS = {
    "B": DEFAULT_BUDGET,
    "R": DEFAULT_RATE,
    "p_max": DEFAULT_P_MAX,
    "lam": DEFAULT_LAMBDA,
    "H0": DEFAULT_H0,
    "eps": DEFAULT_EPS,
    "solver": "fixing",
    "seed": 0,
    "rate_windows": False,
}
_FLAG_TO_KEY = {"budget": "B", "rate": "R", "p_max": "p_max", "lam": "lam", "h0": "H0", "eps": "eps"}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", type=Path, help="JSON config file")
    g.add_argument("--budget", "-B", type=int, help=f"max reconfigurations B (default {DEFAULT_BUDGET})")
    g.add_argument("--rate", "-R", type=int, help=f"minimum dwell R in slots (default {DEFAULT_RATE})")
    g.add_argument("--p-max", dest="p_max", type=float, help=f"trust cap (default {DEFAULT_P_MAX})")
    g.add_argument("--lambda", dest="lam", type=float, help=f"exclusion multiplier (default {DEFAULT_LAMBDA})")
    g.add_argument("--h0", type=float, help=f"initial rounding threshold (default {DEFAULT_H0})")
    g.add_argument("--eps", type=float, help=f"threshold decrement (default {DEFAULT_EPS})")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--rate-windows", dest="rate_windows", action="store_true", default=None,
                   help="add the sliding-window rate rows to the reported LP bound")


def resolve_settings(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    settings = dict(_DEFAULTS)
    if getattr(args, "config", None):
        settings.update(load_config(args.config))
    for flag, key in list(_FLAG_TO_KEY.items()) + [("seed", "seed"), ("rate_windows", "rate_windows"), ("solver", "solver")]:
        val = getattr(args, flag, None)
        if val is not None:
            settings[key] = val
    return settings


def budget_config(settings: dict) -> BudgetConfig:
    return BudgetConfig(
        B=settings["B"], R=settings["R"], p_max=settings["p_max"], lam=settings["lam"], H0=settings["H0"], eps=settings["eps"]
    )


def _out_path(args) -> Path | None:
    return Path(args.output) if getattr(args, "output", None) else None


def _emit_csv(args, values, ids) -> None:
    write_matrix_csv(_out_path(args) or sys.stdout, values, ids)


def cmd_trust(args) -> int:
    settings = resolve_settings(args)
    outputs = load_outputs(args.input)
    trust = compute_trust_matrix(outputs, settings["p_max"])
    _emit_csv(args, trust.values, outputs.model_ids)
    return EXIT_OK


def cmd_binarize(args) -> int:
    settings = resolve_settings(args)
    outputs = load_outputs(args.input)
    A = exclude_outliers(outputs, settings["lam"])
    _emit_csv(args, A.values.astype(np.int64), outputs.model_ids)
    slots = sorted(A.failsafe_slots())
    if slots:
        log.warning("fail-safe: no trusted model at slots %s", slots)
    return EXIT_FAILSAFE if slots else EXIT_OK


def cmd_select(args) -> int:
    settings = resolve_settings(args)
    config = budget_config(settings)
    if args.from_outputs:
        outputs = load_outputs(args.input)
        ids, A = outputs.model_ids, exclude_outliers(outputs, config.lam)
    else:
        ids, A = load_binary(args.input)
    solver = settings["solver"]
    if args.lp_out:
        with open(args.lp_out, "w", encoding="utf-8") as fh:
            write_lp(build_lp(A, config, settings["rate_windows"]), fh)
    plans, frac, timing = solve_all(A, config, (solver,), settings["rate_windows"])
    failsafe = sorted(A.failsafe_slots())
    if solver == "lp-bound":
        doc = {
            "schema_version": 1,
            "kind": "lp-bound",
            "objective": frac.objective,
            "integral": frac.is_integral(),
            # snap round-off residue so the JSON stays readable
            "fractional": np.where(np.abs(frac.values - np.round(frac.values)) < 1e-12, np.round(frac.values), frac.values).tolist(),
            "failsafe_slots": failsafe,
            "config": config_to_dict(config) | {"rate_windows": settings["rate_windows"]},
        }
        summary = f"lp-bound objective {frac.objective:.6f}"
    else:
        plan = plans[solver]
        doc = plan_to_dict(plan, ids, solver, config=config_to_dict(config), timing_ms=timing.get(solver))
        summary = f"{solver}: trust {plan.trust_score}/{A.shape[1]}, {plan.switch_count} switches"
    path = _out_path(args)
    if path:
        save_json(path, doc)
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    print(summary, file=sys.stderr)
    if failsafe:
        log.warning("fail-safe: no trusted model at slots %s", failsafe)
        return EXIT_FAILSAFE
    return EXIT_OK


def cmd_attack(args) -> int:
    outputs = load_outputs(args.input)
    if args.model not in outputs.model_ids:
        raise TrustselError(f"unknown model id {args.model!r}")
    i = outputs.model_ids.index(args.model)
    values = outputs.values.copy()
    end = args.end if args.end is not None else outputs.slot_count
    values[i] = swap_percentile_attack(values[i], args.x, (args.start, end), mode=args.mode)
    _emit_csv(args, values, outputs.model_ids)
    return EXIT_OK


def cmd_gen(args) -> int:
    settings = resolve_settings(args)
    spec = InstanceSpec(
        M=args.models,
        T=args.slots,
        C=args.malicious,
        base_signal=args.signal,
        benign_noise=args.noise,
        attack_percentile=args.x,
        poison_fraction=args.poison_fraction,
        seed=settings["seed"],
    )
    inst = generate_instance(spec)
    d = ensure_dir(args.output)
    save_outputs(d / "outputs.csv", inst.outputs)
    write_matrix_csv(d / "truth.csv", inst.ground_truth[None, :], ["ground_truth"])
    save_json(
        d / "meta.json",
        {
            "schema_version": 1,
            "kind": "instance",
            "spec": {k: v for k, v in vars(spec).items()},
            "malicious_ids": [inst.outputs.model_ids[i] for i in sorted(inst.malicious_ids)],
            "poison_regions": {inst.outputs.model_ids[i]: list(r) for i, r in inst.regions.items()},
        },
    )
    print(f"wrote {d}/outputs.csv, truth.csv, meta.json", file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    settings = resolve_settings(args)
    config = budget_config(settings)
    outputs = load_outputs(args.input)
    truth = None
    if args.truth:
        truth = read_matrix_csv(args.truth)[1][0]
        if truth.size != outputs.slot_count:
            raise TrustselError("ground truth length does not match the outputs")
    solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    report = run_pipeline(
        outputs, config, solvers, truth=truth, out_dir=args.output, source=str(args.input),
        rate_windows=settings["rate_windows"],
    )
    for name, score in report.scores.items():
        if score is not None:
            print(f"{name:>9}: {score:.6g}", file=sys.stderr)
    if report.failsafe_slots:
        log.warning("fail-safe execution alert: no trusted model at slots %s", report.failsafe_slots)
    return report.exit_code


def cmd_bench(args) -> int:
    settings = resolve_settings(args)
    if args.suite == "synthetic":
        budgets = tuple(range(args.budget_min, args.budget_max + 1))
        result = bench_mod.synthetic_suite(
            n=args.instances,
            M=args.models,
            T=args.slots,
            budgets=budgets,
            R=settings["R"],
            lam=settings["lam"],
            C=args.malicious,
            seed0=settings["seed"],
            oracle=not args.no_oracle,
        )
        print(bench_mod.format_table(result))
        band = result["summary"]["single_digit_band"]
        print(f"median gap within a single-digit percent band: {'yes' if band else 'no'}")
    else:
        result = {"kind": "bench", "suite": "ratio"} | bench_mod.ratio_suite(args.instances, settings["seed"])
        print(f"min splice/oracle ratio {result['min_ratio']:.4f} over {result['instances']} instances")
        for v in result["violations"]:
            log.warning("ratio %.4f below bound %.4f (seed %d)", v["ratio"], v["bound"], v["seed"])
    if args.output:
        save_json(args.output, result)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; exit code 2 is reserved for fail-safe."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trustsel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trust", help="agreement-based trust matrix from model outputs")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_trust)

    p = sub.add_parser("binarize", help="0/1 trust matrix by lambda-sigma exclusion")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("select", help="solve one selection problem")
    p.add_argument("input", type=Path, help="binary matrix CSV (or outputs with --from-outputs)")
    p.add_argument("-o", "--output")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--from-outputs", action="store_true", help="binarize raw outputs first")
    p.add_argument("--lp-out", type=Path, help="also write the LP relaxation in CPLEX LP format")
    _add_config_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("attack", help="apply the percentile swap attack to one model")
    p.add_argument("input", type=Path)
    p.add_argument("--model", required=True)
    p.add_argument("--x", type=float, default=20.0, help="attack percentile in (0, 50)")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--end", type=int)
    p.add_argument("--mode", choices=("exact", "reflect"), default="exact")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("gen", help="generate a synthetic ensemble with poisoned models")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--models", "-M", type=int, default=7)
    p.add_argument("--slots", "-T", type=int, default=96)
    p.add_argument("--malicious", "-C", type=int, default=1)
    p.add_argument("--signal", choices=("sinusoid", "trend", "piecewise"), default="sinusoid")
    p.add_argument("--noise", type=float, default=3.0)
    p.add_argument("--x", type=float, default=5.0)
    p.add_argument("--poison-fraction", type=float, default=0.2)
    _add_config_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="seeded benchmark suites")
    p.add_argument("--suite", choices=("synthetic", "ratio"), default="synthetic")
    p.add_argument("--instances", "-n", type=int, default=200)
    p.add_argument("--models", "-M", type=int, default=7)
    p.add_argument("--slots", "-T", type=int, default=96)
    p.add_argument("--malicious", "-C", type=int, default=1)
    p.add_argument("--budget-min", type=int, default=1)
    p.add_argument("--budget-max", type=int, default=10)
    p.add_argument("--no-oracle", action="store_true")
    p.add_argument("-o", "--output", help="write the full JSON result here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="run the full pipeline and write plans plus a report")
    p.add_argument("input", type=Path, help="model outputs CSV")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--truth", type=Path, help="ground truth CSV (from gen) for RMSE columns")
    p.add_argument("--solvers", default=",".join(SOLVERS))
    _add_config_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (TrustselError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
