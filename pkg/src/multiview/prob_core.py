"""Finite distributions, divergences and log-domain mass functions.

All quantities are in nats.  Probabilities that may underflow are carried
as logarithms and combined with log-sum-exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammainc, gammaln, logsumexp, xlogy

SUM_TOL = 1e-12
LAMBDA_TOL = 1e-12


class AlphabetMismatchError(ValueError):
    """Two distributions are defined on alphabets of different size."""


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability vector over ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __init__(self, probs: Sequence[float] | np.ndarray, tol: float = SUM_TOL):
        arr = np.array(probs, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("empty distribution")
        if np.any(~np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(arr.sum() - 1.0) > tol:
            raise ValueError(f"probabilities sum to {arr.sum():.15g}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, k: int) -> "FiniteDistribution":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def bernoulli(cls, a: float) -> "FiniteDistribution":
        """Distribution on {0, 1} with mass ``a`` at 1."""
        return cls([1.0 - a, a])

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @property
    def log_probs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.all(self.probs == other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"FiniteDistribution({np.array2string(self.probs, precision=6)})"


def as_distribution(p) -> FiniteDistribution:
    return p if isinstance(p, FiniteDistribution) else FiniteDistribution(p)


@dataclass(frozen=True)
class LogReal:
    """Nonnegative real stored as its natural logarithm.

    ``is_zero`` marks an exact zero, for which ``log_value`` is ``-inf``.
    ``log_residual`` holds the rounding error of ``log_value`` so that
    huge or tiny values survive the round trip to full precision.
    """

    log_value: float
    is_zero: bool = False
    log_residual: float = 0.0

    @classmethod
    def from_value(cls, x: float) -> "LogReal":
        if x < 0:
            raise ValueError("LogReal holds nonnegative values only")
        if x == 0:
            return cls(-math.inf, True)
        hi = math.log(x)
        return cls(hi, False, math.log(x / math.exp(hi)))

    @classmethod
    def from_log(cls, log_value: float) -> "LogReal":
        if log_value == -math.inf:
            return cls(-math.inf, True)
        return cls(float(log_value))

    @property
    def value(self) -> float:
        if self.is_zero:
            return 0.0
        return math.exp(self.log_value) * (1.0 + self.log_residual)

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.is_zero or other.is_zero:
            return LogReal(-math.inf, True)
        return LogReal(self.log_value + other.log_value, False, self.log_residual + other.log_residual)

    def __add__(self, other: "LogReal") -> "LogReal":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a = self.log_value + self.log_residual
        b = other.log_value + other.log_residual
        return LogReal(float(np.logaddexp(a, b)))


def _check_pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p, q = as_distribution(p), as_distribution(q)
    if p.alphabet_size != q.alphabet_size:
        raise AlphabetMismatchError(f"alphabet sizes differ: {p.alphabet_size} vs {q.alphabet_size}")
    return p.probs, q.probs


def entropy(p) -> float:
    """Shannon entropy ``-sum p log p`` with ``0 log 0 = 0``."""
    probs = as_distribution(p).probs
    return float(-np.sum(xlogy(probs, probs)))


def varentropy(p) -> float:
    """Variance of the self-information ``-log p(X)``."""
    probs = as_distribution(p).probs
    mask = probs > 0
    s = -np.log(probs[mask])
    h = float(np.sum(probs[mask] * s))
    return float(np.sum(probs[mask] * (s - h) ** 2))


def kl_divergence(p, q) -> float:
    """D(p||q); ``inf`` when p puts mass where q does not."""
    pp, qq = _check_pair(p, q)
    mask = pp > 0
    if np.any(qq[mask] == 0):
        return math.inf
    return max(0.0, float(np.sum(pp[mask] * (np.log(pp[mask]) - np.log(qq[mask])))))


def bhattacharyya(p, q) -> float:
    """Bhattacharyya coefficient ``sum sqrt(p q)``."""
    pp, qq = _check_pair(p, q)
    return float(min(1.0, np.sum(np.sqrt(pp * qq))))


def chernoff_objective(p, q, lam: float) -> float:
    """``log sum p^(1-lam) q^lam`` over the common support, for ``lam`` in (0, 1).

    Returns ``-inf`` when the supports are disjoint.
    """
    pp, qq = _check_pair(p, q)
    common = (pp > 0) & (qq > 0)
    if not np.any(common):
        return -math.inf
    lp, lq = np.log(pp[common]), np.log(qq[common])
    return float(logsumexp((1.0 - lam) * lp + lam * lq))


_GOLDEN_MAX_ITER = 400


def golden_section_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(argmax, max)``.

    The endpoints are never evaluated, so ``f`` may be undefined there.
    ``tol`` is relative to the bracket magnitude once that exceeds one.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_GOLDEN_MAX_ITER):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def chernoff_lambda(p, q, tol: float = LAMBDA_TOL) -> tuple[float, float]:
    """Return ``(lam_star, C(p, q))``.

    The endpoint values ``lam in {0, 1}`` contribute 0 to the outer
    maximum; the interior objective uses the common support only.
    """
    pp, qq = _check_pair(p, q)
    if np.array_equal(pp, qq):
        return 0.5, 0.0
    common = (pp > 0) & (qq > 0)
    if not np.any(common):
        return 0.5, math.inf
    lp, lq = np.log(pp[common]), np.log(qq[common])
    diff = lq - lp

    def neg_g(lam: float) -> float:
        return -float(logsumexp(lp + lam * diff))

    lam, val = golden_section_max(neg_g, 0.0, 1.0, tol)
    if val <= 0.0:
        return 0.0, 0.0
    return lam, val


def chernoff_information(p, q) -> float:
    """Chernoff information ``-min_{lam in [0,1]} log sum p^(1-lam) q^lam``."""
    return chernoff_lambda(p, q)[1]


def binary_entropy(a: float) -> float:
    return float(-xlogy(a, a) - xlogy(1.0 - a, 1.0 - a))


def bsc_bhattacharyya(p: float) -> float:
    """Bhattacharyya parameter ``2 sqrt(p (1-p))`` of a BSC(p)."""
    return 2.0 * math.sqrt(p * (1.0 - p))


def log_binom(n, k):
    """Log binomial coefficient via log-gamma (vectorized)."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def binomial_log_pmf(n: int, k, a: float):
    """Vectorized ``log Pr[Bin(n, a) = k]``; ``-inf`` for impossible k."""
    k = np.asarray(k)
    out = log_binom(n, k) + xlogy(k, a) + xlogy(n - k, 1.0 - a)
    with np.errstate(invalid="ignore"):
        out = np.where((k < 0) | (k > n), -np.inf, out)
    # xlogy gives 0 * log 0 = 0 but k * log 0 = -inf; nan cannot occur.
    return out


def binomial_pmf(n: int, k: int, a: float) -> LogReal:
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    return LogReal.from_log(float(binomial_log_pmf(n, k, a)))


def poisson_log_pmf(k, mean: float):
    k = np.asarray(k, dtype=float)
    if mean == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return -mean + k * math.log(mean) - gammaln(k + 1.0)


def poisson_pmf(k: int, mean: float) -> LogReal:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if mean <= 0:
        raise ValueError("mean must be positive")
    return LogReal.from_log(float(poisson_log_pmf(k, mean)))


def poisson_tail(mean: float, k: int) -> float:
    """``Pr[Poi(mean) > k]``."""
    if mean == 0:
        return 0.0
    return float(gammainc(k + 1, mean))


def poisson_truncation(mean: float, tol: float = 1e-12) -> int:
    """Smallest K with ``Pr[Poi(mean) > K] < tol``.

    A Chernoff bound gives a safe starting K which is then lowered by
    exact tail evaluation.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if mean == 0:
        return 0
    # Pr[N >= k] <= exp(-mean) (e mean / k)^k for k > mean
    k = max(int(math.ceil(mean)) + 1, 1)
    while -mean + k * (1.0 + math.log(mean) - math.log(k)) >= math.log(tol):
        k += max(1, k // 8)
    while k > 0 and poisson_tail(mean, k - 1) < tol:
        k -= 1
    return k


def binomial_fractional_moment(n: int, a: float, lam: float) -> float:
    """``E[L^lam]`` for ``L ~ Bin(n, a)`` by exact summation (``0^0 = 1``)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if lam == 0:
        return 1.0
    k = np.arange(1, n + 1)
    if k.size == 0:
        return 0.0
    terms = binomial_log_pmf(n, k, a) + lam * np.log(k)
    return float(np.exp(logsumexp(terms)))
