"""Subsequence counts and convergence-rate bounds for the deletion channel.

Each input bit is deleted independently with probability ``delta``, so
``P(y | x) = delta^(n-m) (1-delta)^m N(x -> y)`` for an output of length
``m``, where ``N(x -> y)`` counts the index subsets of ``x`` spelling ``y``.
Counts are exact Python integers and only enter floating point as
logarithms.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np
from scipy.special import logsumexp

from .prob_core import binomial_fractional_moment, golden_section_max

LAMBDA_TOL = 1e-10
DEFAULT_MAX_N = 8
MAX_TABLE_ENTRIES = 2_000_000


class DeletionBudgetError(RuntimeError):
    """A pair search or count table exceeds its configured size."""


def _check_binary(s: str) -> None:
    if any(c not in "01" for c in s):
        raise ValueError(f"{s!r} is not a binary string")


def subsequence_count(u: str, v: str) -> int:
    """Number of index subsets of ``u`` that spell ``v``."""
    if len(v) > len(u):
        raise ValueError("v is longer than u")
    # dp[j] = occurrences of v[:j] in the prefix of u read so far
    dp = [1] + [0] * len(v)
    for c in u:
        for j in range(len(v), 0, -1):
            if v[j - 1] == c:
                dp[j] += dp[j - 1]
    return dp[len(v)]


def count_table(x: str, max_entries: int = MAX_TABLE_ENTRIES) -> dict[str, int]:
    """``{y: N(x -> y)}`` over every distinct subsequence ``y`` of ``x`` (including "")."""
    _check_binary(x)
    table: dict[str, int] = {"": 1}
    for c in x:
        grown = dict(table)
        for y, cnt in table.items():
            key = y + c
            grown[key] = grown.get(key, 0) + cnt
        table = grown
        if len(table) > max_entries:
            raise DeletionBudgetError(f"count table of {x!r} exceeds {max_entries} entries")
    return table


def length_sums(table: dict[str, int], n: int) -> list[int]:
    """``sum_{|y| = m} N(x -> y)`` for ``m = 0..n``."""
    out = [0] * (n + 1)
    for y, cnt in table.items():
        out[len(y)] += cnt
    return out


@dataclass
class DeletionInstance:
    """An input pair ``(x, x_tilde)`` with their subsequence count tables."""

    x: str
    x_tilde: str
    delta: float
    tables: tuple[dict[str, int], dict[str, int]] = field(repr=False, default=None)

    def __post_init__(self):
        _check_binary(self.x)
        _check_binary(self.x_tilde)
        if len(self.x) != len(self.x_tilde) or not self.x:
            raise ValueError("strings must be nonempty and of equal length")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.tables is None:
            self.tables = (count_table(self.x), count_table(self.x_tilde))
        self._prepare()

    @property
    def n(self) -> int:
        return len(self.x)

    def _prepare(self) -> None:
        tx, tt = self.tables
        common = [y for y in tx if y in tt]
        n, dl = self.n, self.delta
        m = np.array([len(y) for y in common], dtype=float)
        self._log_w = (n - m) * math.log(dl) + m * math.log1p(-dl)
        self._log_a = np.array([math.log(tx[y]) for y in common])
        self._log_b = np.array([math.log(tt[y]) for y in common])
        self._diff = self._log_b - self._log_a
        self._base = self._log_w + self._log_a

    def log_f(self, lam: float) -> float:
        if lam <= 0.0 or lam >= 1.0:
            return 0.0
        return float(logsumexp(self._base + lam * self._diff))


def f_lambda(inst: DeletionInstance, lam: float) -> float:
    """``sum_m delta^(n-m) (1-delta)^m sum_y N(x->y)^(1-lam) N(x~->y)^lam``.

    Equals 1 at ``lam`` in {0, 1}; inside, only common subsequences count.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    return math.exp(inst.log_f(lam))


def rho_pair(inst: DeletionInstance, tol: float = LAMBDA_TOL) -> float:
    """``sup_{lam in (0,1)} -log f_lam`` (nonnegative since ``f = 1`` at the ends)."""
    if inst.x == inst.x_tilde:
        raise ValueError("rho_pair needs distinct strings")
    _, val = golden_section_max(lambda lam: -inst.log_f(lam), 0.0, 1.0, tol)
    return max(0.0, val)


def brute_force_f_lambda(x: str, x_tilde: str, delta: float, lam: float) -> float:
    """``sum_y P(y|x)^(1-lam) P(y|x~)^lam`` with ``P(y|.)`` built from all 2^n deletion masks."""
    if lam in (0.0, 1.0):
        return 1.0

    def law(s: str) -> dict[str, float]:
        out: dict[str, float] = {}
        for mask in itertools.product((0, 1), repeat=len(s)):
            kept = sum(mask)
            y = "".join(c for c, k in zip(s, mask) if k)
            out[y] = out.get(y, 0.0) + delta ** (len(s) - kept) * (1 - delta) ** kept
        return out

    px, pt = law(x), law(x_tilde)
    return sum(px[y] ** (1 - lam) * pt[y] ** lam for y in px if y in pt)


# ---------------------------------------------------------------------------
# pair search


def complement(s: str) -> str:
    return s.translate(str.maketrans("01", "10"))


def alternating(n: int, first: str = "0") -> str:
    other = "1" if first == "0" else "0"
    return "".join(first if i % 2 == 0 else other for i in range(n))


def canonical_pair(x: str, y: str) -> tuple[str, str]:
    """Representative of ``{x, y}`` under joint complementation and reversal."""
    cands = []
    for f in (lambda s: s, complement, lambda s: s[::-1], lambda s: complement(s)[::-1]):
        a, b = f(x), f(y)
        cands.append((a, b) if a <= b else (b, a))
    return min(cands)


def pair_orbit_representatives(n: int) -> Iterator[tuple[str, str]]:
    strings = ["".join(bits) for bits in itertools.product("01", repeat=n)]
    for i, x in enumerate(strings):
        for y in strings[i + 1 :]:
            if canonical_pair(x, y) == (x, y):
                yield x, y


def bound_naive(n: int, delta: float) -> float:
    """Only the empty output is guaranteed common: ``-n log delta``."""
    return -n * math.log(delta)


def bound_fractional(n: int, delta: float, tol: float = LAMBDA_TOL) -> float:
    """``sup_lam lam log n - log E[L^lam]``, ``L ~ Bin(n, delta)``.

    This is ``rho_pair`` for the pair ``(0^n, 0^(n-1) 1)`` in closed form.
    """
    if n < 1:
        raise ValueError("n must be positive")
    log_n = math.log(n)

    def obj(lam: float) -> float:
        return lam * log_n - math.log(binomial_fractional_moment(n, delta, lam))

    _, val = golden_section_max(obj, 0.0, 1.0, tol)
    return max(0.0, val)


def bound_alternating(n: int, delta: float, max_n: int = 24) -> float:
    """Exact ``rho_pair`` of the alternating pair ``0101...``, ``1010...``.

    The two count tables are not equal (``N(01 -> 01) = 1`` but
    ``N(10 -> 01) = 0``), so the lambda search is kept.
    """
    if n % 2:
        raise ValueError("bound_alternating needs even n")
    if n > max_n:
        raise DeletionBudgetError(f"n={n} exceeds the alternating-table limit {max_n}")
    return rho_pair(DeletionInstance(alternating(n, "0"), alternating(n, "1"), delta))


@dataclass
class RhoBoundReport:
    n: int
    delta: float
    rho_exact: float | None
    bound_naive: float
    bound_alternating: float
    bound_fractional: float
    argmin_pair: tuple[str, str] | None
    pairs_searched: int = 0

    def to_json(self) -> str:
        d = asdict(self)
        d["argmin_pair"] = list(self.argmin_pair) if self.argmin_pair else None
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RhoBoundReport":
        d = json.loads(text)
        if d.get("argmin_pair") is not None:
            d["argmin_pair"] = tuple(d["argmin_pair"])
        return cls(**d)

    def chain_holds(self, slack: float = 1e-9) -> bool:
        if self.rho_exact is None:
            return True
        return all(self.rho_exact <= b + slack for b in (self.bound_naive, self.bound_alternating, self.bound_fractional))


def alternating_pair_bound(n: int, delta: float) -> float:
    """Feasible-pair bound from ``0101...`` vs its complement, any ``n``."""
    if n % 2 == 0:
        return bound_alternating(n, delta)
    return rho_pair(DeletionInstance(alternating(n, "0"), alternating(n, "1"), delta))


def rho_n_exact(
    n: int, delta: float, max_n: int = DEFAULT_MAX_N, trace: list | None = None
) -> RhoBoundReport:
    """Minimize ``rho_pair`` over all pairs of distinct length-n strings.

    One pair per orbit under joint complementation/reversal is evaluated.
    ``trace``, if given, receives ``(x, x_tilde, rho)`` for every pair searched.
    """
    if n > max_n:
        raise DeletionBudgetError(
            f"n={n} exceeds max_n={max_n}; about {4**n // 2} pairs would be searched"
        )
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    tables = {"".join(b): count_table("".join(b)) for b in itertools.product("01", repeat=n)}
    best, arg, searched = math.inf, None, 0
    for x, y in pair_orbit_representatives(n):
        inst = DeletionInstance(x, y, delta, (tables[x], tables[y]))
        searched += 1
        # any single lambda lower-bounds the sup, so hopeless pairs skip the search
        if trace is None and -inst.log_f(0.5) >= best:
            continue
        val = rho_pair(inst)
        if trace is not None:
            trace.append((x, y, val))
        if val < best:
            best, arg = val, (x, y)
    return RhoBoundReport(
        n=n,
        delta=delta,
        rho_exact=best,
        bound_naive=bound_naive(n, delta),
        bound_alternating=alternating_pair_bound(n, delta),
        bound_fractional=bound_fractional(n, delta),
        argmin_pair=arg,
        pairs_searched=searched,
    )

