"""Integral enclosure width against rank, breadth and slack, for each built-in family."""

import argparse
import time

from gmpy2 import mpq

from engelf.family import builtin_families
from engelf.measure import integral_enclosure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-rank", type=int, default=10)
    ap.add_argument("--breadth", type=int, default=16)
    args = ap.parse_args()
    print("family,rank,breadth,slack,lower,upper,width,cylinders,seconds")
    for spec in builtin_families():
        for rank in range(2, args.max_rank + 1, 2):
            for slack in (mpq(1, 10**3), mpq(1, 10**6)):
                t0 = time.perf_counter()
                enc = integral_enclosure(spec, rank, args.breadth, slack, with_bound=False)
                dt = time.perf_counter() - t0
                print(
                    f"{spec.name},{rank},{enc.breadth_used},{float(slack):g},{float(enc.lower):.10f},"
                    f"{float(enc.upper):.10f},{float(enc.width):.3e},{enc.cylinders},{dt:.2f}"
                )


if __name__ == "__main__":
    main()
