"""Finite-n values of the rescaled hole quantities next to their limits."""

import argparse
import math

from largegaps.harness import default_c0
from largegaps.rescaling import BulkInterval, RescaleParams, check_lemma1, check_lemma8, check_lemma10, m_of_interval


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="256,1024,4096")
    ap.add_argument("--x", default="-1,0,1")
    args = ap.parse_args()
    c0 = default_c0()
    interval = BulkInterval(-1.0, -0.5)
    xs = [float(x) for x in args.x.split(",")]
    print(f"c0_hat = {c0:.7f}")
    print(f"{'n':>6} {'x':>5} {'lemma1/limit':>13} {'lemma8 z=1/limit':>17} {'lemma10/limit':>14} {'shift ratio*e':>14}")
    for n in (int(v) for v in args.n.split(",")):
        p = RescaleParams(n, c0)
        for x in xs:
            l1 = check_lemma1(p, x)
            l8 = check_lemma8(p, x, 1.0)
            l10 = check_lemma10(p, x, interval)
            print(
                f"{n:6d} {x:5g} {l1 / math.exp(c0 - x):13.4f} {l8 / math.exp(c0 - x - 2):17.4f}"
                f" {l10 / (m_of_interval(interval) * math.exp(c0 - x)):14.4f}"
                f" {check_lemma1(p, x + 1) / l1 * math.e:14.4f}"
            )


if __name__ == "__main__":
    main()
