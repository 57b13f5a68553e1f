#!/usr/bin/env python3
"""Print mean normalized RMSE/CC AUCs, rankings and p-values for a results directory.

    python3 scripts/summarize_results.py results/desk_scale
"""

import argparse
import warnings

from alrbench import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("out", nargs="?", default="results/desk_scale")
    ap.add_argument("--reps", type=int, help="only use repetitions below this number")
    args = ap.parse_args()

    records = harness.load_results(args.out)
    if args.reps is not None:
        records = [r for r in records if r.rep < args.reps]
    agg = harness.aggregate(records)
    reps = len({r.rep for r in records})
    print(f"{len(agg.datasets)} datasets ({', '.join(agg.datasets)}), {reps} repetitions")
    for r in agg.reg_r:
        g = agg.grand[r]
        order = sorted(g, key=lambda s: g[s]["auc_rmse_mean"])
        print(f"\nr = {r:g}")
        print(f"{'rank':>4}  {'strategy':<8} {'RMSE':>7} {'CC':>7} {'impr%':>7}   per-dataset RMSE")
        for i, s in enumerate(order, 1):
            per = "  ".join(f"{agg.normalized(ds, r, s, 'auc_rmse_mean'):.3f}" for ds in agg.datasets)
            print(f"{i:>4}  {s:<8} {g[s]['auc_rmse_mean']:7.3f} {g[s]['auc_cc_mean']:7.3f} "
                  f"{agg.improvements[r][s]['auc_rmse_mean']:7.2f}   {per}")
        for unit in ("dataset", "run"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                try:
                    tests = harness.pairwise_tests(agg, r, unit=unit)
                except ValueError as exc:
                    print(f"  ({unit} tests skipped: {exc})")
                    continue
            cells = [f"{t['proposed']}<{t['baseline']} {t['metric']} p={t['p']:.3g}" for t in tests]
            print(f"  Welch ({unit}): " + "; ".join(cells))


if __name__ == "__main__":
    main()
