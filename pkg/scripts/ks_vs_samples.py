"""Kolmogorov distance between the sampled xi and f, for growing sample sizes."""

import argparse
import math

from engelf import Dyadic, Sylvester
from engelf.measure import empirical_cdf_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-exp", type=int, default=5)
    args = ap.parse_args()
    print("family,n,ks,ks_sqrt_n")
    for spec in (Dyadic(), Sylvester()):
        for e in range(2, args.max_exp + 1):
            n = 10**e
            ks = empirical_cdf_distance(spec, n, 1000, seed=args.seed)
            print(f"{spec.name},{n},{ks:.5f},{ks * math.sqrt(n):.3f}")


if __name__ == "__main__":
    main()
