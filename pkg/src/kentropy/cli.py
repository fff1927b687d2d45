"""Command-line driver: ``kentropy <command> SCENARIO [options]``.

Each command prints one JSON record on stdout. Exit codes: 0 success,
1 domain error (Unreachable / NoMass / Infeasible / unreachable element),
2 usage, parse or validation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import classify as cls
from .actions import check_generating, norm_budget_report
from .entropy import mc_entropy, skew_entropy, stationarity_defect
from .errors import DomainError, ScenarioError
from .realize import (III_1, III_LAMBDA, EntropyCurve, build_budget, build_small_entropy_scenario,
                      realize_target)
from .scenario import Scenario, load_scenario, scenario_to_dict

TYPE_FLAGS = {"iii1": III_1, "iiilambda": III_LAMBDA}


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _emit(record: dict, out) -> None:
    out.write(json.dumps({k: _num(v) for k, v in record.items()}) + "\n")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def cmd_entropy(s: Scenario, args) -> dict:
    b = skew_entropy(s)
    return {"command": "entropy", "scenario": s.name, "entropy": b.total}


def cmd_mc_entropy(s: Scenario, args) -> dict:
    est = mc_entropy(s, args.samples, args.seed, workers=args.workers, full=args.full)
    return {"command": "mc-entropy", "scenario": s.name, "mean": est.mean, "stderr": est.stderr,
            "samples": est.samples, "seed": est.seed, "exact": skew_entropy(s).total}


def cmd_addition(s: Scenario, args) -> dict:
    b = skew_entropy(s)
    rec = {"command": "addition", "scenario": s.name, "base_term": b.base_term,
           "fiber_integral": b.fiber_integral, "total": b.total}
    rec["per_coordinate"] = {str(n): v for n, v in b.per_coordinate.items()}
    return rec


def cmd_stationarity(s: Scenario, args) -> dict:
    est = stationarity_defect(s, args.samples, args.seed, workers=args.workers)
    return {"command": "stationarity", "scenario": s.name, "defect": est.mean,
            "stderr": est.stderr, "samples": est.samples, "seed": est.seed}


def cmd_realize(s: Scenario, args) -> dict:
    r = realize_target(s, args.n0, args.target, tol=args.tol)
    if args.emit_curve:
        curve = EntropyCurve(s, args.n0)
        thetas = np.linspace(1.0, 0.0, args.curve_points + 1)[:-1][::-1]
        _write_csv(args.emit_curve, ["theta", "entropy"],
                   [(float(t), curve(float(t))) for t in thetas])
    return {"command": "realize", "scenario": s.name, "n0": args.n0, "target": args.target,
            "theta_star": r.theta_star, "achieved_entropy": r.achieved_entropy,
            "base_entropy": r.base_entropy, "kappa_bar": r.kappa_bar,
            "iterations": r.iterations, "bracket_width": r.bracket_width}


def cmd_construct(s: Scenario, args) -> dict:
    flag = TYPE_FLAGS[args.type]
    built = build_small_entropy_scenario(s.kappa, args.eps, flag, budget=args.budget)
    seq = build_budget(built.kappa, args.budget)
    h = skew_entropy(built).total
    report = norm_budget_report(built.cocycle, built.base, built.kappa, seq.prefix)
    if args.out:
        Path(args.out).write_text(json.dumps(scenario_to_dict(built), indent=2) + "\n")
    return {"command": "construct", "scenario": built.name, "type": flag, "eps": args.eps,
            "label": str(cls.classify_family(built.nu)), "entropy": h,
            "entropy_bound": args.budget * args.eps,
            "weighted_budget_sum": seq.kappa_weighted_sum, "budget": args.budget,
            "l_prefix": list(seq.prefix), "norm_bounds_ok": all(r.ok for r in report)}


def cmd_classify(s: Scenario, args) -> dict:
    k = cls.classify_family(s.nu)
    sq = cls.kakutani_square_sum(s.nu)
    return {"command": "classify", "scenario": s.name, "label": str(k), "evidence": k.evidence,
            "square_sum_converges": sq.converges, "square_sum": sq.value, "rate": sq.rate}


def cmd_ratio_set(s: Scenario, args) -> dict:
    est = cls.ratio_set_estimate(s.nu, args.depth, args.samples, args.seed, workers=args.workers)
    if args.csv:
        _write_csv(args.csv, ["log_ratio", "multiplicity"],
                   [(float(v), int(m)) for v, m in zip(est.values, est.multiplicities)])
    return {"command": "ratio-set", "scenario": s.name, "distinct": int(est.values.size),
            "lattice": est.lattice, "residual": est.residual, "max_gap_unit": est.max_gap(),
            "depth": args.depth, "samples": args.samples, "seed": args.seed}


def cmd_budget(s: Scenario, args) -> dict:
    seq = build_budget(s.kappa, args.budget)
    if args.csv:
        _write_csv(args.csv, ["n", "kappa_n", "l_n", "partial_weighted_sum"],
                   [(n, str(w), ln, str(acc)) for n, w, ln, acc in seq.rows()])
    gen = check_generating(s.group, s.kappa, args.depth)
    return {"command": "budget", "scenario": s.name, "budget": args.budget,
            "l_prefix": list(seq.prefix), "weighted_sum": seq.kappa_weighted_sum,
            "generating": gen.verdict}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kentropy",
                                description="Furstenberg entropy of odometer skew products")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext, stochastic=False):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("scenario", help="scenario JSON file")
        if stochastic:
            sp.add_argument("--samples", type=int, default=200_000)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--workers", type=int, default=1)
        sp.set_defaults(func=fn)
        return sp

    add("entropy", cmd_entropy, "exact skew-product entropy")
    sp = add("mc-entropy", cmd_mc_entropy, "Monte Carlo entropy estimate", stochastic=True)
    sp.add_argument("--full", action="store_true", help="sample the base point too")
    add("addition", cmd_addition, "addition-formula breakdown")
    add("stationarity", cmd_stationarity, "Monte Carlo stationarity defect", stochastic=True)
    sp = add("realize", cmd_realize, "solve for θ giving a target entropy")
    sp.add_argument("--target", type=float, required=True)
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--emit-curve", metavar="CSV")
    sp.add_argument("--curve-points", type=int, default=200)
    sp = add("construct", cmd_construct, "small-entropy scenario from the scenario's κ")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--type", choices=sorted(TYPE_FLAGS), required=True)
    sp.add_argument("--budget", type=Fraction, default=Fraction(2))
    sp.add_argument("--out", metavar="JSON", help="write the constructed scenario here")
    add("classify", cmd_classify, "Krieger type of the fiber measure")
    sp = add("ratio-set", cmd_ratio_set, "sampled log Radon-Nikodym ratios", stochastic=True)
    sp.set_defaults(samples=10_000)
    sp.add_argument("--depth", type=int, default=400)
    sp.add_argument("--csv", metavar="CSV")
    sp = add("budget", cmd_budget, "slow-growth budget sequence")
    sp.add_argument("--budget", type=Fraction, default=Fraction(2))
    sp.add_argument("--depth", type=int, default=8, help="word length for the generation check")
    sp.add_argument("--csv", metavar="CSV")
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        scenario = load_scenario(args.scenario)
        record = args.func(scenario, args)
    except ScenarioError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except DomainError as exc:
        name = type(exc).__name__
        _emit({"command": args.command, "error": name, "message": str(exc)}, out)
        err.write(f"{name}: {exc}\n")
        return 1
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return 2
    _emit(record, out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
