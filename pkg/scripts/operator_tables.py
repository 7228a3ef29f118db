"""Splitting ratios and the CUE/GUE hole comparison across n."""

import argparse
import math

from largegaps.opchecks import cue_gue_hole_gap, splitting_ratio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--split-n", default="256,1024,4096")
    ap.add_argument("--compare-n", default="64,128,256")
    args = ap.parse_args()

    print("splitting, windows x=(0, 0.5) at y=(0.3, 3.5)")
    print(f"{'n':>6} {'1 - ratio':>12} {'trace':>10}")
    for n in (int(v) for v in args.split_n.split(",")):
        ratio, trace = splitting_ratio(n, [0.0, 0.5], [0.3, 3.5])
        print(f"{n:6d} {1 - ratio:12.4e} {trace:10.2e}")

    print("\nCUE vs GUE holes at x=0, delta = sqrt(ln n)/n")
    print(f"{'n':>6} {'|diff| n ln n':>14} {'|tr+n delta| n/ln^1.5':>22} {'hs_diff n/ln^1.5':>17}")
    for n in (int(v) for v in args.compare_n.split(",")):
        ln_n = math.log(n)
        rep = cue_gue_hole_gap(n, 0.0, math.sqrt(ln_n) / n)
        print(
            f"{n:6d} {abs(rep.difference) * n * ln_n:14.5f}"
            f" {abs(rep.trace_a + math.sqrt(ln_n)) * n / ln_n**1.5:22.5f}"
            f" {rep.hs_diff * n / ln_n**1.5:17.5f}"
        )


if __name__ == "__main__":
    main()
