"""Tilted exponents against direct minimization, and what d views see.

For the BSC(0.1) row pair the exponent of "mean log-likelihood ratio <= v"
is computed both from the tilted family and by minimizing divergence over
a grid of distributions.  The exact probability of the v = 0 event over d
views is then compared with the exponent.
"""

import math

import numpy as np

from multiview.largedev import LlrProfile, exponent, gamma_probability, primal_sanov_oracle, z_for_v
from multiview.multiview_dmc import bsc


def main():
    ch = bsc(0.1)
    prof = LlrProfile.from_channel(ch, 0, 1)
    print(f"llr range [{prof.min_llr:.4f}, {prof.max_llr:.4f}], mean {prof.mean_llr():.4f}")
    for v in np.linspace(prof.min_llr, prof.mean_llr(), 7):
        print(f"  v={v:+.4f}  dual {exponent(prof, v):.6f}  primal {primal_sanov_oracle(prof, v):.6f}")
    print("exact -(1/d) log Pr[mean llr <= 0] over d views:")
    for d in (10, 20, 40, 80):
        g = gamma_probability(ch, [0.5, 0.5], 0, 1, d, z_for_v(0.0, d, 0.5, 0.5))
        print(f"  d={d:3d}  {-math.log(g) / d:.5f}")
    print(f"limit {exponent(prof, 0.0):.5f}")


if __name__ == "__main__":
    main()
