"""Count certified cylinders meeting a level set as the probe rank grows."""

import argparse

from gmpy2 import mpq

from engelf import DigitStream, TwoScale
from engelf.function import eval_exact, level_set_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", default="3/2")
    ap.add_argument("--cap", type=int, default=6)
    ap.add_argument("--max-rank", type=int, default=8)
    args = ap.parse_args()
    spec = TwoScale(mpq(args.a))
    y0 = eval_exact(spec, DigitStream((), (0, 1)))
    print(f"# {spec.name}, y0 = {y0}")
    print("rank,cylinders")
    for rank in range(1, args.max_rank + 1):
        print(f"{rank},{len(level_set_probe(spec, y0, rank, args.cap))}")


if __name__ == "__main__":
    main()
