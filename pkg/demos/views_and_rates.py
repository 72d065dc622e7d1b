"""How fast repeated looks through a noisy channel pin down the input.

For BSC(0.1), BEC(0.3) and Z(0.3) this prints H(X|Y^d) for a few d, then
fits the exponential decay rate of the gap and compares it with the
smallest pairwise Chernoff information between rows.
"""

import math

import numpy as np

from multiview import bec, bsc, fit_convergence_rate, min_pair_chernoff, multi_view_report, z_channel

CHANNELS = {"BSC(0.1)": bsc(0.1), "BEC(0.3)": bec(0.3), "Z(0.3)": z_channel(0.3)}
UNIFORM = np.array([0.5, 0.5])


def main():
    for name, ch in CHANNELS.items():
        print(f"{name}: min-pair Chernoff information {min_pair_chernoff(ch, UNIFORM):.6f} nats")
        for d in (1, 5, 10, 20, 40):
            rep = multi_view_report(ch, UNIFORM, d)
            print(f"  d={d:3d}  H(X|Y^d)={rep.cond_entropy:.3e}  I={rep.mutual_info:.6f}  V={rep.dispersion:.3e}")
        window = (20, 40) if name.startswith("BSC") else (None, None)
        fit = fit_convergence_rate(ch, UNIFORM, *window)
        print(f"  fitted rate on d in {fit.d_window}: {fit.fitted_rate:.6f} (relative gap {fit.relative_gap:.1e})")
        print(f"  log d coefficient of the fit: {fit.log_d_coefficient:.3f}")
    print(f"closed form for BSC(0.1): {-math.log(2 * math.sqrt(0.09)):.6f}")


if __name__ == "__main__":
    main()
