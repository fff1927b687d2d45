"""Distinct sampled log-ratios and their largest gap on [-1, 1] as depth grows."""
import argparse

from kentropy import load_scenario
from kentropy.classify import classify_family, ratio_set_estimate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario")
    ap.add_argument("--depths", type=int, nargs="+", default=[25, 50, 100, 200, 400])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    nu = load_scenario(args.scenario).nu
    print("label:", classify_family(nu))
    print(f"{'depth':>6} {'distinct':>9} {'max_gap':>10}  lattice")
    for d in args.depths:
        est = ratio_set_estimate(nu, d, args.samples, args.seed)
        print(f"{d:>6d} {est.values.size:>9d} {est.max_gap():>10.4g}  {est.lattice}")


if __name__ == "__main__":
    main()
