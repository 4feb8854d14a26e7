"""Per-cell summary of a sweep CSV: solved count, median expansions, accumulated suboptimality.

    python3 scripts/summarize.py results/tile8.csv
"""

import argparse
import math
from statistics import median

from focalpolicy.bench import accumulated_suboptimality, group_by, read_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    args = ap.parse_args()
    records = read_csv(args.csv)
    cells = group_by(records, "target_acc", "algorithm", "heuristic", "w")
    print(f"{'acc':>5} {'algorithm':<13} {'w':>4} {'solved':>7} {'med.exp':>9} {'max ratio':>9} {'acc.subopt':>10}")
    for (acc, algo, heur, w), rows in sorted(cells.items(), key=lambda kv: (kv[0][0] or 0, kv[0][1:])):
        name = f"focal:{heur}" if heur else algo
        solved = [r for r in rows if r.solved]
        ratios = [r.subopt for r in solved if r.subopt is not None]
        acc_s = "-" if acc is None else f"{acc:g}"
        w_s = "inf" if math.isinf(w) else f"{w:g}"
        print(f"{acc_s:>5} {name:<13} {w_s:>4} {len(solved):>4}/{len(rows):<3}"
              f" {median(r.expansions for r in rows):>9.1f} {max(ratios, default=float('nan')):>9.3f}"
              f" {accumulated_suboptimality(rows).value:>10.3f}")


if __name__ == "__main__":
    main()
