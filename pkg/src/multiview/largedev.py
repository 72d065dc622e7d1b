"""Large-deviation exponents for pairwise log-likelihood ratios.

For a pair of conditional laws ``base = P(.|x)`` and ``alt = P(.|x~)`` the
per-letter log-likelihood ratio is ``llr_b = log(base_b / alt_b)``.  The
exponent of the event "empirical mean llr <= v" under ``base`` has the dual
form ``max_{lam >= 0} -log Z(lam) - lam v`` with
``Z(lam) = sum_b base_b exp(-lam llr_b)``, and the primal form
``min {D(Q || base) : E_Q[llr] <= v}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, xlogy

from .multiview_dmc import (
    DEFAULT_TYPE_BUDGET,
    Dmc,
    _check_input,
    _compositions,
    _log_likelihoods,
    type_class_array,
)
from .prob_core import FiniteDistribution, as_distribution, golden_section_max, kl_divergence

LAMBDA_TOL = 1e-12
DEFAULT_GRID = 2000
MAX_GRID_POINTS = 5_000_000
TIE_TOL = 1e-9


class OracleSizeError(ValueError):
    """The primal grid would be too large for the alphabet."""


@dataclass(frozen=True, eq=False)
class LlrProfile:
    """Log-likelihood ratios of ``base`` against ``alt``.

    Letters outside the support of ``base`` carry ``-inf`` (or ``nan`` when
    both vanish) and never matter; letters with ``alt = 0 < base`` carry
    ``+inf``.
    """

    base: FiniteDistribution
    alt: FiniteDistribution
    llr: np.ndarray

    @classmethod
    def from_rows(cls, base, alt) -> "LlrProfile":
        base, alt = as_distribution(base), as_distribution(alt)
        if base.alphabet_size != alt.alphabet_size:
            raise ValueError("base and alt differ in alphabet size")
        with np.errstate(divide="ignore", invalid="ignore"):
            llr = np.log(base.probs) - np.log(alt.probs)
        llr.setflags(write=False)
        return cls(base, alt, llr)

    @classmethod
    def from_channel(cls, channel: Dmc, x: int, x_tilde: int) -> "LlrProfile":
        return cls.from_rows(channel.matrix[x], channel.matrix[x_tilde])

    @property
    def common(self) -> np.ndarray:
        """Letters where both laws are positive (finite llr)."""
        return (self.base.probs > 0) & (self.alt.probs > 0)

    @property
    def min_llr(self) -> float:
        """Smallest llr over the support of ``base``."""
        on = self.base.probs > 0
        return float(np.min(self.llr[on]))

    @property
    def max_llr(self) -> float:
        on = self.base.probs > 0
        return float(np.max(self.llr[on]))

    def mean_llr(self) -> float:
        """``E_base[llr] = D(base || alt)``."""
        return kl_divergence(self.base, self.alt)


class TiltedFamily:
    """Exponential tilts ``Q_lam ∝ base * exp(-lam llr)`` for ``lam >= 0``.

    For ``lam > 0`` letters with ``alt = 0`` get zero weight, so ``Z`` can
    jump at the origin when ``base`` is not dominated by ``alt``.
    """

    def __init__(self, profile: LlrProfile):
        self.profile = profile
        c = profile.common
        self._idx = np.flatnonzero(c)
        self._lb = np.log(profile.base.probs[c])
        self._llr = profile.llr[c]

    def log_partition(self, lam: float) -> float:
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        if lam == 0:
            return 0.0
        if self._idx.size == 0:
            return -math.inf
        return float(logsumexp(self._lb - lam * self._llr))

    def partition(self, lam: float) -> float:
        return math.exp(self.log_partition(lam))

    def tilted(self, lam: float) -> FiniteDistribution:
        if lam == 0:
            return self.profile.base
        if self._idx.size == 0:
            raise ValueError("no common support to tilt")
        logits = self._lb - lam * self._llr
        q = np.zeros(self.profile.base.alphabet_size)
        q[self._idx] = np.exp(logits - logsumexp(logits))
        return FiniteDistribution(q / q.sum())

    def tilted_mean(self, lam: float) -> float:
        """``E_{Q_lam}[llr]``."""
        if lam == 0:
            m = self.profile.mean_llr()
            return m
        q = self.tilted(lam).probs[self._idx]
        return float(np.dot(q, self._llr))


def _dual_objective(fam: TiltedFamily, v: float):
    return lambda lam: -fam.log_partition(lam) - lam * v


def exponent(profile: LlrProfile, v: float, tol: float = LAMBDA_TOL) -> float:
    """``E(v) = max_{lam >= 0} -log Z(lam) - lam v``; ``+inf`` below the smallest llr."""
    lo = profile.min_llr
    if v < lo:
        return math.inf
    fam = TiltedFamily(profile)
    kl = profile.mean_llr()
    if v >= kl:
        return 0.0
    g = _dual_objective(fam, v)
    if v == lo:
        # objective increases to -log base(argmin letters) as lam -> inf
        at_min = profile.base.probs[(profile.base.probs > 0) & (profile.llr == lo)]
        return float(-math.log(at_min.sum()))
    hi = 1.0
    while g(2.0 * hi) > g(hi):
        hi *= 2.0
        if hi > 1e12:
            break
    _, val = golden_section_max(g, 0.0, 2.0 * hi, tol)
    return max(0.0, val)


def exponent_unit_interval(profile: LlrProfile, v: float, tol: float = LAMBDA_TOL) -> float:
    """Same objective with ``lam`` restricted to ``[0, 1]``; finite whenever supports overlap."""
    fam = TiltedFamily(profile)
    g = _dual_objective(fam, v)
    _, val = golden_section_max(g, 0.0, 1.0, tol)
    endpoint = g(1.0)
    return max(0.0, val, endpoint)


def _kl_rows(q: np.ndarray, log_base: np.ndarray) -> np.ndarray:
    return np.sum(xlogy(q, q), axis=-1) - q @ log_base


def primal_sanov_oracle(profile: LlrProfile, v: float, grid_resolution: int = DEFAULT_GRID) -> float:
    """``min D(Q || base)`` over ``Q`` with ``E_Q[llr] <= v``, by grid search.

    Only letters with finite llr can carry mass of an admissible ``Q``.
    The best grid point seeds one SLSQP refinement.  Four-letter alphabets
    get a coarser grid when the requested one exceeds ``MAX_GRID_POINTS``.
    """
    if profile.base.alphabet_size > 4:
        raise OracleSizeError("primal grid supports alphabets of size at most 4")
    c = profile.common
    k = int(c.sum())
    if k == 0:
        return math.inf
    lb = np.log(profile.base.probs[c])
    llr = profile.llr[c]
    if k == 1:
        return float(-lb[0]) if llr[0] <= v else math.inf
    res = int(grid_resolution)
    while math.comb(res + k - 1, k - 1) > MAX_GRID_POINTS:
        res = int(res * 0.8)
    q = _compositions(res, k).astype(float) / res
    feasible = q @ llr <= v + 1e-15
    if not np.any(feasible):
        return math.inf
    vals = _kl_rows(q[feasible], lb)
    i = int(np.argmin(vals))
    best, q0 = float(vals[i]), q[feasible][i]

    def obj(w):
        w = np.clip(w, 0.0, None)
        return float(np.sum(xlogy(w, w)) - w @ lb)

    cons = [
        {"type": "eq", "fun": lambda w: np.sum(w) - 1.0},
        {"type": "ineq", "fun": lambda w: v - w @ llr},
    ]
    out = minimize(obj, q0, method="SLSQP", bounds=[(0.0, 1.0)] * k, constraints=cons, options={"ftol": 1e-14, "maxiter": 200})
    # SLSQP often flags precision loss at this ftol while sitting on the optimum;
    # any finite point is accepted after the feasibility repair below
    if np.all(np.isfinite(out.x)) and np.clip(out.x, 0.0, None).sum() > 0:
        w = np.clip(out.x, 0.0, None)
        w /= w.sum()
        excess = w @ llr - v
        if excess > 0:
            # pull toward the smallest-llr letter until the constraint holds
            j = int(np.argmin(llr))
            t = excess / (w @ llr - llr[j]) if w @ llr > llr[j] else 1.0
            w = (1.0 - t) * w
            w[j] += t
        if w @ llr <= v + 1e-12:
            best = min(best, obj(w))
    return max(0.0, best)


# ---------------------------------------------------------------------------
# exact d-letter probabilities


def z_for_v(v: float, d: int, p_x: float, p_xt: float, c: float = 1.0) -> float:
    """The ``z`` at which the Gamma event is ``mean llr <= v``."""
    return math.log1p(c * p_xt / p_x * math.exp(-d * v))


def gamma_probability(
    channel: Dmc,
    input_dist,
    x: int,
    x_tilde: int,
    d: int,
    z: float,
    c: float = 1.0,
    budget: int = DEFAULT_TYPE_BUDGET,
) -> float:
    """``Pr[P(x)P(Y^d|x) / (P(x~)P(Y^d|x~)) <= c e^-z / (1 - e^-z) | X = x]``.

    Exact sum over output types; ties on the threshold count as inside.
    """
    if z <= 0 or c <= 0:
        raise ValueError("z and c must be positive")
    if x == x_tilde:
        raise ValueError("x and x_tilde must differ")
    px = as_distribution(input_dist).probs
    _check_input(channel, px)
    if px[x] == 0:
        raise ValueError("x must have positive probability")
    counts, log_w = type_class_array(d, channel.output_size, budget)
    ll = _log_likelihoods(channel, counts, log_w)
    with np.errstate(divide="ignore"):
        lp = np.log(px)
    thr = math.log(c) - (z + math.log(-math.expm1(-z)))
    with np.errstate(invalid="ignore"):
        ratio = (lp[x] + ll[x]) - (lp[x_tilde] + ll[x_tilde])
    event = np.isfinite(ll[x]) & (ratio <= thr + TIE_TOL * max(1.0, abs(thr)))
    if not np.any(event):
        return 0.0
    return float(min(1.0, math.exp(logsumexp(ll[x][event]))))


def tail_bounds(channel: Dmc, input_dist, x: int, d: int, t: float, budget: int = DEFAULT_TYPE_BUDGET) -> tuple[float, float]:
    """Lower and upper Gamma-form bounds on ``Pr[-log P(x|Y^d) >= t | X = x]``."""
    px = as_distribution(input_dist).probs
    k = channel.input_size
    others = [xt for xt in range(k) if xt != x and px[xt] > 0]
    if not others:
        return 0.0, 0.0
    lo = max(gamma_probability(channel, px, x, xt, d, t, 1.0, budget) for xt in others)
    hi = (k - 1) * max(gamma_probability(channel, px, x, xt, d, t, k - 1.0, budget) for xt in others)
    return lo, min(1.0, hi)
