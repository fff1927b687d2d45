"""Entropy of the small-entropy construction as ε shrinks.

For each ε the construction is built from the scenario's κ and the exact
entropy is compared with the budget bound B·ε.
"""
import argparse
from fractions import Fraction

from kentropy import load_scenario, skew_entropy
from kentropy.classify import classify_family
from kentropy.realize import III_1, III_LAMBDA, build_budget, build_small_entropy_scenario


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario", help="supplies κ")
    ap.add_argument("--eps", type=float, nargs="+", default=[1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001])
    ap.add_argument("--budget", type=Fraction, default=Fraction(2))
    args = ap.parse_args(argv)

    kappa = load_scenario(args.scenario).kappa
    for flag in (III_1, III_LAMBDA):
        print(f"# type flag {flag}")
        print(f"{'eps':>8} {'entropy':>14} {'bound':>10} {'ratio':>8}  label")
        for eps in args.eps:
            s = build_small_entropy_scenario(kappa, eps, flag, budget=args.budget)
            b = build_budget(s.kappa, args.budget)
            h = skew_entropy(s).total
            bound = float(b.kappa_weighted_sum) * eps
            print(f"{eps:>8g} {h:>14.6e} {bound:>10.4g} {h / bound:>8.4f}  {classify_family(s.nu)}")


if __name__ == "__main__":
    main()
