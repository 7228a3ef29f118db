"""Fit the expansion constant c0 and print the residual table behind it."""

import argparse

from largegaps.holeprob import estimate_c0, expansion_residual


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", default="0.4,0.6,0.8")
    ap.add_argument("--n-grid", default="50,100,200,400,800")
    args = ap.parse_args()
    alphas = [float(a) for a in args.alphas.split(",")]
    grid = [int(n) for n in args.n_grid.split(",")]

    print("alpha      " + " ".join(f"{n:>12d}" for n in grid))
    for a in alphas:
        print(f"{a:<10g} " + " ".join(f"{expansion_residual(n, a):12.8f}" for n in grid))
    fit = estimate_c0(alphas, grid)
    for a, c, s in zip(fit.alphas, fit.per_alpha, fit.slopes):
        print(f"alpha={a:g}: intercept {c:.8f}, slope {s:.5f}")
    print(f"c0_hat = {fit.c0_hat:.8f}  spread = {fit.spread:.2e}")


if __name__ == "__main__":
    main()
