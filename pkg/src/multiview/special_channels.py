"""Binomial and Poisson approximation channels, and BIMS decompositions.

Capacities are in nats.  Both closed forms are written as
``sum_r P(r | x=1) log(2 a_r / (a_r + b_r))`` where ``a_r`` and ``b_r`` are the
likelihoods of the observed counts under the two inputs.  The leading
"1" of the Poisson series is read as one bit, i.e. ``log 2`` nats.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import xlogy

from .multiview_dmc import Dmc, NotBimsError, detect_bims
from .prob_core import (
    FiniteDistribution,
    binomial_log_pmf,
    bsc_bhattacharyya,
    poisson_log_pmf,
    poisson_tail,
    poisson_truncation,
)

LOG2 = math.log(2.0)
DEFAULT_TAIL_TOL = 1e-12


class DegenerateBoundsError(ValueError):
    """A BIMS crossover equals 0 or 1/2, where the Poisson bounds degenerate."""


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")


def _log2_posterior_ratio(la: np.ndarray, lb: np.ndarray) -> np.ndarray:
    """``log(2 a / (a + b))`` from log-likelihoods, safe for ``a = b = 0``."""
    with np.errstate(invalid="ignore"):
        out = LOG2 + la - np.logaddexp(la, lb)
    return np.where(np.isfinite(la), out, 0.0)


def bhattacharyya_gap_bound(d: float, p: float) -> float:
    """``exp(-d (1 - Z(p))) - Z(p)^(2d)``: the upper slack of the sandwich."""
    z = bsc_bhattacharyya(p)
    return math.exp(-d * (1.0 - z)) - z ** (2.0 * d)


@dataclass(frozen=True)
class BinomialChannel:
    """``d`` independent looks through a BSC(p), summarized by the count of ones."""

    d: int
    p: float

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("d must be nonnegative")
        _check_p(self.p)

    def capacity(self) -> float:
        return binomial_capacity(self.d, self.p)


def binomial_capacity(d: int, p: float) -> float:
    """Capacity of the d-view BSC(p) (uniform input is optimal), in nats."""
    _check_p(p)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return 0.0
    i = np.arange(d + 1)
    la = xlogy(i, p) + xlogy(d - i, 1.0 - p)
    lb = xlogy(d - i, p) + xlogy(i, 1.0 - p)
    w = np.exp(binomial_log_pmf(d, i, p))
    terms = w * _log2_posterior_ratio(la, lb)
    return min(LOG2, max(0.0, math.fsum(terms.tolist())))


@dataclass(frozen=True)
class PoissonChannel:
    """Binary input, output ``(R1, R2)`` of independent Poisson counts.

    Given input 1 the means are ``(d p, d (1-p))``; input 0 swaps them.
    """

    d: float
    p: float
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("d must be nonnegative")
        _check_p(self.p)
        if not 0 < self.tail_tol <= 1e-6:
            raise ValueError("tail_tol must lie in (0, 1e-6]")

    def capacity(self) -> float:
        return poisson_capacity(self.d, self.p, self.tail_tol)


BinomialChannelSpec = BinomialChannel
PoissonChannelSpec = PoissonChannel


@dataclass(frozen=True)
class PoissonCapacity:
    value: float
    truncation_bound: float
    cutoff: int
    leading_constant: str = field(default="log 2 nats")


def _poisson_cutoff(means: Sequence[float], tail_tol: float) -> tuple[int, float]:
    m = max(means)
    k = int(math.ceil(m + 12.0 * math.sqrt(m) + 40.0))
    while True:
        tail = sum(poisson_tail(mu, k) for mu in means)
        if tail < tail_tol:
            return k, tail
        k += max(1, k // 4)


def poisson_capacity_report(d: float, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> PoissonCapacity:
    """Capacity of the Poisson approximation channel with a certified truncation bound.

    The double series is cut to a box ``[0, K]^2`` symmetric in the two
    counts; the omitted terms add at most ``log 2 * Pr[outside box]``, and
    the returned value never exceeds the true capacity.
    """
    _check_p(p)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return PoissonCapacity(0.0, 0.0, 0)
    m1, m2 = d * p, d * (1.0 - p)
    k, tail = _poisson_cutoff((m1, m2), tail_tol)
    r = np.arange(k + 1)
    lw = poisson_log_pmf(r, m1)[:, None] + poisson_log_pmf(r, m2)[None, :]
    r1, r2 = r[:, None], r[None, :]
    la = xlogy(r1, p) + xlogy(r2, 1.0 - p)
    lb = xlogy(r2, p) + xlogy(r1, 1.0 - p)
    la, lb = np.broadcast_arrays(la, lb)
    ok = np.isfinite(lw)
    terms = np.exp(lw[ok]) * _log2_posterior_ratio(la[ok], lb[ok])
    value = min(LOG2, max(0.0, math.fsum(terms.tolist())))
    return PoissonCapacity(value, LOG2 * tail, k)


def poisson_capacity(d: float, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    return poisson_capacity_report(d, p, tail_tol).value


def poisson_mixture_capacity(d: float, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """``E_{N ~ Poi(d)}[C(Bin_N(p))]`` with the N-sum cut where the tail drops below ``tail_tol``."""
    if d == 0:
        return 0.0
    n_max = poisson_truncation(d, tail_tol)
    n = np.arange(n_max + 1)
    w = np.exp(poisson_log_pmf(n, d))
    caps = [binomial_capacity(int(k), p) for k in n]
    return math.fsum((w * np.array(caps)).tolist())


def poisson_mixture_identity_check(d: float, p: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Absolute gap between the Poisson capacity and its binomial-mixture form."""
    return abs(poisson_capacity(d, p, tail_tol) - poisson_mixture_capacity(d, p, tail_tol))


# ---------------------------------------------------------------------------
# Bin vs Poi sweep


@dataclass(frozen=True)
class SweepRow:
    d: int
    p: float
    c_bin: float
    c_poi: float
    gap: float
    thm3_bound: float

    def sandwich_holds(self, slack: float = 1e-9) -> bool:
        return self.c_poi <= self.c_bin + slack and self.c_bin <= self.c_poi + self.thm3_bound + slack


SWEEP_HEADER = "d,p,c_bin_nats,c_poi_nats,gap,thm3_bound"


def figure1_sweep(d_values: Iterable[int], p_grid: Iterable[float], tail_tol: float = DEFAULT_TAIL_TOL) -> list[SweepRow]:
    """Binomial vs Poisson capacities on a ``(d, p)`` grid, rows in input order."""
    d_values, p_grid = list(d_values), list(p_grid)
    if not d_values or not p_grid:
        raise ValueError("d_values and p_grid must be nonempty")
    rows = []
    for d in d_values:
        for p in p_grid:
            cb = binomial_capacity(int(d), p)
            cp = poisson_capacity(d, p, tail_tol)
            rows.append(SweepRow(int(d), float(p), cb, cp, cb - cp, bhattacharyya_gap_bound(d, p)))
    return rows


def format_float(x: float) -> str:
    return f"{x:.12g}"


def sweep_csv(rows: Sequence[SweepRow], scale: float = 1.0) -> str:
    """CSV text; ``scale`` divides the nats columns (``log 2`` gives bits)."""
    buf = io.StringIO()
    buf.write(SWEEP_HEADER + "\n")
    for r in rows:
        vals = [str(r.d), format_float(r.p)] + [format_float(v / scale) for v in (r.c_bin, r.c_poi, r.gap, r.thm3_bound)]
        buf.write(",".join(vals) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# BIMS decomposition


@dataclass(frozen=True)
class BimsDecomposition:
    """A BIMS channel as a mixture of BSCs, sorted by crossover.

    ``orbits[i] = (u, v)`` names the outputs carrying subchannel ``i``: ``u``
    is its "0" output, ``v`` its "1" output; a fixed point has ``u == v``.
    """

    weights: FiniteDistribution
    crossovers: np.ndarray
    orbits: tuple[tuple[int, int], ...]
    output_size: int

    @property
    def k(self) -> int:
        return len(self.crossovers)

    def reconstruct(self) -> np.ndarray:
        w = np.zeros((2, self.output_size))
        for eps, p, (u, v) in zip(self.weights.probs, self.crossovers, self.orbits):
            if u == v:
                w[:, u] += eps
                continue
            w[0, u] += eps * (1.0 - p)
            w[0, v] += eps * p
            w[1, u] += eps * p
            w[1, v] += eps * (1.0 - p)
        return w


def bims_decompose(channel: Dmc) -> BimsDecomposition:
    """Split a BIMS channel into BSC subchannels, one per output orbit."""
    if channel.input_size != 2:
        raise NotBimsError("BIMS channels have binary input")
    pi = channel.bims_involution or detect_bims(channel)
    if pi is None:
        raise NotBimsError("channel is not BIMS")
    w = channel.matrix
    seen = set()
    parts = []
    for y in range(channel.output_size):
        if y in seen:
            continue
        z = pi[y]
        seen.update((y, z))
        a, b = w[0, y], w[0, z]
        if y == z:
            if a > 0:
                parts.append((a, 0.5, (y, y)))
            continue
        eps = a + b
        if eps == 0:
            continue
        u, v = (y, z) if a >= b else (z, y)
        parts.append((eps, min(a, b) / eps, (u, v)))
    parts.sort(key=lambda t: t[1])
    weights = np.array([t[0] for t in parts])
    return BimsDecomposition(
        FiniteDistribution(weights / weights.sum(), tol=1e-9),
        np.array([t[1] for t in parts]),
        tuple(t[2] for t in parts),
        channel.output_size,
    )


def bims_capacity_bounds(decomp: BimsDecomposition, d: int, tail_tol: float = DEFAULT_TAIL_TOL) -> tuple[float, float]:
    """Poisson-based bounds on the d-view capacity of a BIMS channel.

    Lower bound uses the noisiest subchannel, upper bound the cleanest.
    """
    ps = np.sort(decomp.crossovers)
    if np.any(ps <= 0.0) or np.any(ps >= 0.5):
        raise DegenerateBoundsError(f"crossovers {ps.tolist()} must lie strictly inside (0, 1/2)")
    p1, pk = float(ps[0]), float(ps[-1])
    lower = poisson_capacity(d, pk, tail_tol)
    upper = poisson_capacity(d, p1, tail_tol) + bhattacharyya_gap_bound(d, p1)
    return lower, upper
