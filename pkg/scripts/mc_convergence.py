"""Monte Carlo entropy error against the exact value for growing sample sizes."""
import argparse

from kentropy import load_scenario, mc_entropy, skew_entropy


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenarios", nargs="+")
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000, 1_000_000])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args(argv)

    print(f"{'scenario':>12} {'N':>9} {'mean':>12} {'stderr':>10} {'z':>7}")
    for path in args.scenarios:
        s = load_scenario(path)
        exact = skew_entropy(s).total
        for n in args.sizes:
            est = mc_entropy(s, n, args.seed, workers=args.workers, full=args.full)
            z = (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0
            print(f"{s.name:>12} {n:>9d} {est.mean:>12.6f} {est.stderr:>10.2e} {z:>7.2f}")


if __name__ == "__main__":
    main()
