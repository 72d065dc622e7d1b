"""Binomial and Poisson read-count channels side by side.

Writes the capacity sweep over d in {3, 6, 12, 24} and p on a 0.01 grid to
``binomial_vs_poisson.csv`` and prints the largest gap per d together with
the Bhattacharyya-based slack that bounds it.
"""

import sys

from multiview.special_channels import figure1_sweep, sweep_csv

D_VALUES = [3, 6, 12, 24]
P_GRID = [round(0.01 * i, 12) for i in range(101)]


def main(path="binomial_vs_poisson.csv"):
    rows = figure1_sweep(D_VALUES, P_GRID)
    with open(path, "w") as fh:
        fh.write(sweep_csv(rows))
    for d in D_VALUES:
        block = [r for r in rows if r.d == d]
        worst = max(block, key=lambda r: r.gap)
        print(
            f"d={d:2d}: largest gap {worst.gap:.4f} nats at p={worst.p:.2f} "
            f"(slack there {worst.thm3_bound:.4f}); sandwich holds on all rows: {all(r.sandwich_holds() for r in block)}"
        )
    print(f"wrote {len(rows)} rows to {path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
