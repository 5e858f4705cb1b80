"""Write graph enclosure CSVs (and SVGs if matplotlib is present) for every built-in family."""

import argparse
import csv
import re
from pathlib import Path

from engelf.family import builtin_families
from engelf.function import graph_boxes


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/graphs"))
    ap.add_argument("--rank", type=int, default=6)
    ap.add_argument("--points", type=int, default=512)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        plt = None
    for spec in builtin_families():
        boxes = graph_boxes(spec, args.rank, args.points)
        stem = re.sub(r"[^\w.-]+", "_", spec.name).strip("_")
        path = args.out / f"{stem}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_lo", "x_hi", "f_lo", "f_hi"])
            for b in boxes:
                w.writerow([float(v) for v in b])
        print(f"{spec.name}: {len(boxes)} boxes -> {path}")
        if plt is not None:
            fig, ax = plt.subplots(figsize=(6, 4))
            for x0, x1, f0, f1 in boxes:
                ax.fill_between([float(x0), float(x1)], float(f0), float(f1), color="C0", lw=0)
            ax.set(title=spec.name, xlabel="x", ylabel="f(x)")
            fig.savefig(args.out / f"{stem}.svg")
            plt.close(fig)


if __name__ == "__main__":
    main()
