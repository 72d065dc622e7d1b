"""Acceptance criteria, one test per criterion.

Each check prints a single ``criterion N: PASS|FAIL`` line; the lines are
also collected and repeated in the pytest terminal summary.  Running this
file directly executes every check and prints the same lines.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from multiview.deletion import (
    DeletionInstance,
    bound_alternating,
    count_table,
    f_lambda,
    length_sums,
    rho_n_exact,
)
from multiview.largedev import LlrProfile, exponent, tail_bounds, primal_sanov_oracle
from multiview.multiview_dmc import (
    bec,
    brute_force_report,
    bsc,
    fit_convergence_rate,
    min_pair_chernoff,
    multi_view_report,
    posterior_tail,
    product_channel,
    random_dmc,
    z_channel,
)
from multiview.prob_core import bhattacharyya, binomial_fractional_moment, chernoff_information
from multiview.special_channels import (
    binomial_capacity,
    figure1_sweep,
    poisson_capacity,
    poisson_mixture_capacity,
    sweep_csv,
)

RESULTS: dict[int, str] = {}
LOG2 = math.log(2.0)
BSC_RHO = -math.log(2.0 * math.sqrt(0.1 * 0.9))
RANDOM3_SEED = 0


def random3():
    return random_dmc(np.random.default_rng(RANDOM3_SEED), 3, 3)


def uniform(k):
    return np.full(k, 1.0 / k)


def record(number, title, ok, detail, elapsed, limit=None):
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    ok = ok and (limit is None or elapsed < limit)
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}: {detail}; {timing}"
    RESULTS[number] = line
    print(line)
    return ok


# ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    grid = np.linspace(0.01, 0.99, 20)
    errs = []
    for p in grid:
        errs.append(abs(chernoff_information(*bsc(p).matrix) + math.log(2 * math.sqrt(p * (1 - p)))))
        errs.append(abs(chernoff_information(*bec(p).matrix) + math.log(p)))
        errs.append(abs(chernoff_information(*z_channel(p).matrix) + math.log(p)))
    worst = max(errs)
    return record(1, "closed-form rates", worst <= 1e-9, f"max error {worst:.2e} over 60 rows", time.perf_counter() - t0, 1.0)


def criterion_2():
    t0 = time.perf_counter()
    worst = -math.inf
    for ch in (bsc(0.1), bsc(0.25), bec(0.5)):
        z = bhattacharyya(*ch.matrix)
        for d in range(0, 31):
            h_bits = multi_view_report(ch, uniform(2), d).cond_entropy / LOG2
            worst = max(worst, z ** (2 * d) - h_bits, h_bits - z**d)
    return record(
        2, "BIMS sandwich (bits)", worst <= 1e-12, f"largest violation {worst:.2e}", time.perf_counter() - t0, 5.0
    )


def criterion_3():
    t0 = time.perf_counter()
    r3 = random3()
    cases = [
        ("BSC(0.1)", bsc(0.1), uniform(2), (20, 40), 0.02),
        ("BEC(0.3)", bec(0.3), uniform(2), (None, None), None),
        ("Z(0.3)", z_channel(0.3), uniform(2), (None, None), 0.05),
        ("random 3x3", r3, uniform(3), (1500, 1519), 0.05),
    ]
    ok, parts = True, []
    for target in ("entropy_gap", "dispersion_gap"):
        for name, ch, px, window, tol in cases:
            e = fit_convergence_rate(ch, px, *window, target=target)
            if tol is None and target == "entropy_gap":
                good = abs(e.fitted_rate + math.log(0.3)) <= 1e-6
            else:
                good = e.relative_gap <= (tol or 0.05)
            if name == "BSC(0.1)" and target == "entropy_gap":
                good = good and abs(e.fitted_rate - 0.5108) / 0.5108 <= 0.02
            ok &= good
            parts.append(f"{target[:4]} {name} {e.fitted_rate:.6f} vs {e.predicted_rate:.6f}")
    return record(3, "rate convergence", ok, "; ".join(parts), time.perf_counter() - t0, 120.0)


def criterion_4():
    t0 = time.perf_counter()
    ds = [3, 6, 12, 24]
    ps = [round(0.01 * i, 12) for i in range(101)]
    rows = figure1_sweep(ds, ps)
    sandwich = all(r.sandwich_holds(1e-9) for r in rows)
    parsed = list(csv.DictReader(io.StringIO(sweep_csv(rows))))
    same = len(parsed) == len(rows) and all(
        abs(float(a["gap"]) - b.gap) <= 1e-12 * max(1.0, abs(b.gap)) for a, b in zip(parsed, rows)
    )
    peak = [max(r.gap for r in rows if r.d == d) for d in ds]
    shrinking = all(a > b for a, b in zip(peak, peak[1:]))
    detail = "max gap by d " + ", ".join(f"{d}:{g:.4f}" for d, g in zip(ds, peak))
    return record(4, "Bin/Poi sandwich and sweep", sandwich and same and shrinking, detail, time.perf_counter() - t0, 30.0)


def criterion_5():
    t0 = time.perf_counter()
    tail_tol = 1e-12
    worst = max(
        abs(poisson_capacity(d, p, tail_tol) - poisson_mixture_capacity(d, p, tail_tol))
        for d in (3, 6, 12, 24)
        for p in (0.1, 0.2, 0.4)
    )
    bound = 2 * tail_tol * LOG2
    return record(5, "mixture identity", worst <= bound, f"max gap {worst:.2e} (bound {bound:.2e})", time.perf_counter() - t0, 30.0)


def criterion_6():
    t0 = time.perf_counter()
    worst = -math.inf
    for p in (0.05, 0.1, 0.25, 0.4):
        c = np.array([binomial_capacity(n, p) for n in range(1, 51)])
        worst = max(worst, float(np.max(np.diff(c, 2))))
    info = np.array([multi_view_report(random3(), uniform(3), d).mutual_info for d in range(1, 16)])
    worst_i = float(np.max(np.diff(info, 2)))
    ok = worst <= 1e-12 and worst_i <= 1e-12
    return record(6, "concavity", ok, f"max second difference {worst:.2e} (Bin), {worst_i:.2e} (random 3x3)", time.perf_counter() - t0)


def criterion_7():
    t0 = time.perf_counter()
    identity = all(
        length_sums(count_table(x), n) == [math.comb(n, m) for m in range(n + 1)]
        for n in range(1, 41)
        for x in ("0" * n, "0" * (n // 3) + "1" * (n - n // 3), ("01" * n)[:n], ("0011" * n)[:n])
        # periodic strings have exponentially many distinct subsequences
        if n <= 20 or x.count("01") <= 1
    )
    vandermonde = True
    for n in range(1, 41):
        h = n // 2
        for m in range(n + 1):
            vandermonde &= sum(math.comb(m, w) * math.comb(h, w) for w in range(m + 1)) == math.comb(h + m, m)
            if n % 2 == 0:
                vandermonde &= sum(math.comb(h, w) * math.comb(h, n - m - w) for w in range(n - m + 1)) == math.comb(n, m)
    worst = 0.0
    delta = 0.35
    for n in range(1, 21):
        inst = DeletionInstance("0" * n, "0" * (n - 1) + "1", delta)
        for lam in np.linspace(0.0, 1.0, 13)[1:-1]:
            worst = max(worst, abs(f_lambda(inst, lam) - n**-lam * binomial_fractional_moment(n, delta, lam)))
    ok = identity and vandermonde and worst <= 1e-12
    detail = f"subset identity {identity}, Vandermonde {vandermonde}, closed-form error {worst:.2e}"
    return record(7, "deletion identities", ok, detail, time.perf_counter() - t0)


def criterion_8():
    t0 = time.perf_counter()
    chain = True
    for delta in (0.2, 0.5, 0.8):
        for n in range(1, 9):
            chain &= rho_n_exact(n, delta).chain_holds(1e-9)
    rho1 = all(rho_n_exact(1, delta).rho_exact == -math.log(delta) for delta in (0.2, 0.5, 0.8))
    trend = [bound_alternating(n, 0.8) for n in (4, 8, 12, 16)]
    falling = all(a > b for a, b in zip(trend, trend[1:]))
    detail = f"chain {chain}, rho_1 exact {rho1}, alternating at 0.8: " + ", ".join(f"{v:.5f}" for v in trend)
    return record(8, "deletion bound chain", chain and rho1 and falling, detail, time.perf_counter() - t0, 300.0)


def criterion_9():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    gap = chern = kl0 = 0.0
    for i in range(50):
        k = 2 + i % 2
        prof = LlrProfile.from_rows(rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k)))
        lo, kl = prof.min_llr, prof.mean_llr()
        for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
            v = lo + frac * (kl - lo)
            gap = max(gap, abs(exponent(prof, v) - primal_sanov_oracle(prof, v)))
        chern = max(chern, abs(exponent(prof, 0.0) - chernoff_information(prof.base, prof.alt)))
        kl0 = max(kl0, abs(exponent(prof, kl)))
    ok = gap <= 1e-3 and chern <= 1e-9 and kl0 <= 1e-9
    detail = f"dual/primal {gap:.2e}, E(0) vs Chernoff {chern:.2e}, E(KL) {kl0:.2e}"
    return record(9, "Sanov duality", ok, detail, time.perf_counter() - t0)


def criterion_10():
    t0 = time.perf_counter()
    checked = violations = 0
    for ch in (bsc(0.1), random3()):
        px = uniform(ch.input_size)
        for d in range(1, 9):
            for t in np.linspace(0.01, 6.0, 20):
                for x in range(ch.input_size):
                    tail = posterior_tail(ch, px, x, d, t)
                    lo, hi = tail_bounds(ch, px, x, d, t)
                    checked += 1
                    violations += not (lo <= tail + 1e-12 and tail <= hi + 1e-12)
    return record(10, "posterior-tail sandwich", violations == 0, f"{violations} violations in {checked} cases", time.perf_counter() - t0)


def criterion_11():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    channels = [bsc(0.1), bsc(0.25), bec(0.5), bec(0.3), z_channel(0.3), random3()]
    channels += [random_dmc(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4))) for _ in range(10)]
    route = theta = 0.0
    count = 0
    for ch in channels:
        for d in range(1, 11):
            rep = multi_view_report(ch, uniform(ch.input_size), d, check=False)
            route = max(route, abs(rep.dispersion - rep.dispersion_decomposed))
            theta = max(theta, abs(rep.cross_term))
            skewed = rng.dirichlet(np.ones(ch.input_size))
            rep = multi_view_report(ch, skewed, d, check=False)
            route = max(route, abs(rep.dispersion - rep.dispersion_decomposed))
            count += 2
    ok = route <= 1e-9 and theta <= 1e-12
    detail = f"{count} reports, route gap {route:.2e}, uniform cross term {theta:.2e}"
    return record(11, "dispersion decomposition", ok, detail, time.perf_counter() - t0)


def criterion_12():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (2, 3):
        got = min_pair_chernoff(product_channel(bsc(0.1), n))
        ok &= abs(got - n * BSC_RHO) <= 1e-9
        parts.append(f"n={n}: {got:.6f} vs claimed {n * BSC_RHO:.6f}")
    return record(12, "product-channel rate", ok, "; ".join(parts), time.perf_counter() - t0)


def criterion_13():
    t0 = time.perf_counter()
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(10):
        ch = random_dmc(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        px = rng.dirichlet(np.ones(ch.input_size))
        for d in range(1, 7):
            h, i, v = brute_force_report(ch, px, d)
            rep = multi_view_report(ch, px, d)
            worst = max(worst, abs(h - rep.cond_entropy), abs(i - rep.mutual_info), abs(v - rep.dispersion))
    return record(13, "type classes vs raw enumeration", worst <= 1e-12, f"max difference {worst:.2e}", time.perf_counter() - t0)


CRITERIA = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
    criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13,
]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i:02d}" for i in range(1, 14)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    outcomes = [check() for check in CRITERIA]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria pass")
