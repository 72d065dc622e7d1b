"""Exact information quantities of d-view discrete memoryless channels.

Given ``X ~ P_X`` and ``d`` independent observations of ``X`` through a DMC
``W``, the output tuple enters every quantity only through its type (the
vector of symbol counts), so sums run over compositions of ``d`` instead of
``|Y|^d`` tuples.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Literal, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .prob_core import (
    FiniteDistribution,
    LogReal,
    as_distribution,
    chernoff_information,
    entropy,
    varentropy,
)

DEFAULT_TYPE_BUDGET = 10**7
ROW_TOL = 1e-12
FILE_ROW_TOL = 1e-9
UNDERFLOW_LOG = math.log(1e-290)


class BudgetExceededError(RuntimeError):
    """An exact enumeration would exceed its configured size budget."""


class NotBimsError(ValueError):
    """The channel has no output involution swapping its two rows."""


class GapUnderflowError(ArithmeticError):
    """A convergence gap fell below the usable floating range."""

    def __init__(self, message: str, largest_usable_d: int | None = None):
        super().__init__(message)
        self.largest_usable_d = largest_usable_d


class InvariantViolationError(ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""


class ChannelFormatError(ValueError):
    """A channel matrix file could not be parsed."""


# ---------------------------------------------------------------------------
# channels


class Dmc:
    """Discrete memoryless channel with transition matrix ``W[x, y]``.

    Binary-input channels are checked for the BIMS property on construction;
    the output involution, if any, is kept in ``bims_involution``.
    """

    def __init__(self, matrix, bims_involution: Sequence[int] | None = None, *, detect: bool = True):
        w = np.array(matrix, dtype=float)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("channel matrix must be 2-D and nonempty")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("channel entries must be finite and nonnegative")
        bad = np.abs(w.sum(axis=1) - 1.0) > ROW_TOL
        if np.any(bad):
            raise ValueError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        w.setflags(write=False)
        self.matrix = w
        if bims_involution is not None:
            pi = tuple(int(i) for i in bims_involution)
            if not _is_bims_involution(w, pi):
                raise NotBimsError("given permutation is not a BIMS involution of this channel")
            self.bims_involution: tuple[int, ...] | None = pi
        elif detect and w.shape[0] == 2:
            self.bims_involution = detect_bims(self)
        else:
            self.bims_involution = None

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> list[FiniteDistribution]:
        return [FiniteDistribution(r) for r in self.matrix]

    @property
    def is_bims(self) -> bool:
        return self.bims_involution is not None

    def __repr__(self) -> str:
        return f"Dmc({self.input_size}x{self.output_size}, bims={self.is_bims})"


def bsc(p: float) -> Dmc:
    """Binary symmetric channel with crossover ``p``."""
    return Dmc([[1.0 - p, p], [p, 1.0 - p]])


def bec(eps: float) -> Dmc:
    """Binary erasure channel; outputs ordered ``(0, 1, erasure)``."""
    return Dmc([[1.0 - eps, 0.0, eps], [0.0, 1.0 - eps, eps]])


def z_channel(delta: float) -> Dmc:
    """Z-channel: input 0 is noiseless, input 1 flips to 0 w.p. ``delta``."""
    return Dmc([[1.0, 0.0], [delta, 1.0 - delta]])


def random_dmc(rng: np.random.Generator, input_size: int, output_size: int, alpha: float = 1.0) -> Dmc:
    return Dmc(rng.dirichlet(np.full(output_size, alpha), size=input_size), detect=False)


def parse_channel(text: str) -> Dmc:
    """Parse the plain-text matrix format (``"|X| |Y|"`` then the rows)."""
    tokens = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not tokens:
        raise ChannelFormatError("empty channel file")
    try:
        nx, ny = (int(t) for t in tokens[0])
    except ValueError as exc:
        raise ChannelFormatError(f"bad header {tokens[0]!r}; expected two integers") from exc
    if nx < 1 or ny < 1:
        raise ChannelFormatError("alphabet sizes must be positive")
    rows = tokens[1:]
    if len(rows) != nx:
        raise ChannelFormatError(f"expected {nx} rows, found {len(rows)}")
    try:
        w = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ChannelFormatError("non-numeric entry") from exc
    if w.shape != (nx, ny):
        raise ChannelFormatError(f"expected {ny} entries per row")
    if np.any(w < 0) or np.any(~np.isfinite(w)):
        raise ChannelFormatError("entries must be finite and nonnegative")
    sums = w.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > FILE_ROW_TOL):
        raise ChannelFormatError(f"row sums {sums.tolist()} deviate from 1 by more than {FILE_ROW_TOL}")
    # exact rows are kept bit-for-bit; only visibly off rows are rescaled
    off = np.abs(sums - 1.0) > ROW_TOL
    w[off] /= sums[off, None]
    return Dmc(w)


def read_channel(path: str | Path) -> Dmc:
    return parse_channel(Path(path).read_text())


def format_channel(channel: Dmc) -> str:
    lines = [f"{channel.input_size} {channel.output_size}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in channel.matrix]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# BIMS structure


def _is_bims_involution(w: np.ndarray, pi: Sequence[int], tol: float = ROW_TOL) -> bool:
    if w.shape[0] != 2 or sorted(pi) != list(range(w.shape[1])):
        return False
    pi = np.asarray(pi)
    return bool(np.all(pi[pi] == np.arange(pi.size)) and np.all(np.abs(w[0] - w[1, pi]) <= tol))


def detect_bims(channel: Dmc, tol: float = ROW_TOL) -> tuple[int, ...] | None:
    """Find an involution ``pi`` of the outputs with ``W(y|0) = W(pi(y)|1)``.

    Outputs with equal rows are fixed points; the rest are matched in pairs
    ``(y, y')`` with ``W(y|0) = W(y'|1)`` and ``W(y'|0) = W(y|1)``.
    """
    w = channel.matrix
    if w.shape[0] != 2:
        raise NotBimsError("BIMS detection needs a binary-input channel")
    ny = w.shape[1]
    pi = [-1] * ny
    order = sorted(range(ny), key=lambda y: w[1, y])
    keys = [w[1, y] for y in order]
    for y in range(ny):
        if pi[y] != -1:
            continue
        a, b = w[0, y], w[1, y]
        if abs(a - b) <= tol:
            pi[y] = y
            continue
        lo = bisect.bisect_left(keys, a - tol)
        hi = bisect.bisect_right(keys, a + tol)
        for idx in range(lo, hi):
            z = order[idx]
            if z != y and pi[z] == -1 and abs(w[0, z] - b) <= tol:
                pi[y], pi[z] = z, y
                break
        else:
            return None
    return tuple(pi)


def z_general(channel: Dmc, input_dist) -> float:
    """``sum_{x != x'} sum_y sqrt(P(x) W(y|x) P(x') W(y|x'))``."""
    px = as_distribution(input_dist).probs
    _check_input(channel, px)
    s = np.sqrt(px[:, None] * channel.matrix)
    gram = s @ s.T
    return float(gram.sum() - np.trace(gram))


def z_general_views(channel: Dmc, input_dist, d: int) -> float:
    """``Z_g`` of the d-view channel: ``sum_{x != x'} sqrt(P(x) P(x')) Z(x, x')^d``.

    Here ``Z(x, x')`` is the Bhattacharyya coefficient of rows x and x'.
    This upper-bounds ``H(X|Y^d)`` for every channel and input.  It agrees
    with ``z_general(channel, input_dist) ** d`` for uniform binary inputs
    but not in general.
    """
    px = as_distribution(input_dist).probs
    _check_input(channel, px)
    s = np.sqrt(channel.matrix)
    z = s @ s.T
    weight = np.sqrt(np.outer(px, px))
    off = ~np.eye(channel.input_size, dtype=bool)
    return float(np.sum(weight[off] * z[off] ** d))


def product_channel(channel: Dmc, n: int, max_inputs: int = 16, max_outputs: int = 256) -> Dmc:
    """The n-letter channel ``prod_i W(y_i|x_i)`` on ``X^n -> Y^n``.

    Inputs and outputs are indexed lexicographically (first letter most
    significant).
    """
    if n < 1:
        raise ValueError("n must be positive")
    nx, ny = channel.input_size**n, channel.output_size**n
    if nx > max_inputs or ny > max_outputs:
        raise BudgetExceededError(f"product channel {nx}x{ny} exceeds budget {max_inputs}x{max_outputs}")
    w = channel.matrix
    out = w
    for _ in range(n - 1):
        out = np.kron(out, w)
    return Dmc(out)


def views_channel(channel: Dmc, d: int, max_outputs: int = 10**5) -> Dmc:
    """The d-view channel ``X -> Y^d`` written out over raw output tuples."""
    ny = channel.output_size**d
    if ny > max_outputs:
        raise BudgetExceededError(f"{ny} output tuples exceed budget {max_outputs}")
    rows = []
    for row in channel.matrix:
        r = np.ones(1)
        for _ in range(d):
            r = np.kron(r, row)
        rows.append(r)
    return Dmc(np.array(rows))


def extend_involution(pi: Sequence[int], output_size: int, d: int) -> tuple[int, ...]:
    """Apply ``pi`` coordinatewise on ``Y^d`` (lexicographic indexing)."""
    out = []
    for tup in itertools.product(range(output_size), repeat=d):
        idx = 0
        for y in tup:
            idx = idx * output_size + pi[y]
        out.append(idx)
    return tuple(out)


# ---------------------------------------------------------------------------
# type classes


@dataclass(frozen=True)
class TypeClass:
    """Composition of ``d`` output symbols with multinomial weight."""

    counts: tuple[int, ...]
    log_multinomial: LogReal

    @property
    def d(self) -> int:
        return sum(self.counts)


def type_class_count(d: int, output_size: int) -> int:
    return math.comb(d + output_size - 1, output_size - 1)


def _compositions(d: int, k: int) -> np.ndarray:
    rows = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([d], dtype=np.int64)
    for _ in range(k - 1):
        reps = rem + 1
        idx = np.repeat(np.arange(rem.size), reps)
        starts = np.repeat(np.cumsum(reps) - reps, reps)
        value = rem[idx] - (np.arange(idx.size) - starts)
        rows = np.hstack([rows[idx], value[:, None]])
        rem = rem[idx] - value
    return np.hstack([rows, rem[:, None]])


def type_class_array(d: int, output_size: int, budget: int = DEFAULT_TYPE_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """All compositions of ``d`` into ``output_size`` parts and their log weights.

    Rows are ordered with the first count descending.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    if output_size < 1:
        raise ValueError("output_size must be positive")
    n = type_class_count(d, output_size)
    if n > budget:
        raise BudgetExceededError(f"{n} type classes for d={d}, |Y|={output_size} exceed budget {budget}")
    counts = _compositions(d, output_size)
    log_w = gammaln(d + 1.0) - gammaln(counts + 1.0).sum(axis=1)
    return counts, log_w


def enumerate_type_classes(d: int, output_size: int, budget: int = DEFAULT_TYPE_BUDGET) -> Iterator[TypeClass]:
    counts, log_w = type_class_array(d, output_size, budget)
    for c, lw in zip(counts, log_w):
        yield TypeClass(tuple(int(v) for v in c), LogReal.from_log(float(lw)))


# ---------------------------------------------------------------------------
# exact multi-view computation


def _check_input(channel: Dmc, px: np.ndarray) -> None:
    if px.size != channel.input_size:
        raise ValueError(f"input distribution has {px.size} entries, channel has {channel.input_size} inputs")


def _log_likelihoods(channel: Dmc, counts: np.ndarray, log_w: np.ndarray) -> np.ndarray:
    """``log P(t|x)`` as an array of shape ``(|X|, n_types)``."""
    w = channel.matrix
    zero = w == 0
    with np.errstate(divide="ignore"):
        logw = np.where(zero, 0.0, np.log(np.where(zero, 1.0, w)))
    ll = logw @ counts.T.astype(float) + log_w[None, :]
    impossible = (zero.astype(np.int64) @ counts.T) > 0
    ll[impossible] = -np.inf
    return ll


def _log_softplus_log(a: np.ndarray) -> np.ndarray:
    """``log(log(1 + e^a))`` accurate for very negative ``a``."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    small = a < -30.0
    out[small] = a[small] - 0.5 * np.exp(a[small])
    big = ~small
    with np.errstate(divide="ignore"):
        out[big] = np.log(np.logaddexp(0.0, a[big]))
    return out


@dataclass
class _Posterior:
    px: np.ndarray
    log_cond: np.ndarray  # log P(t|x), shape (|X|, T)
    log_joint: np.ndarray  # log P(x, t)
    a: np.ndarray  # log sum_{x' != x} P(x',t) - log P(x,t)
    log_s: np.ndarray  # log of -log P(x|t)
    valid: np.ndarray  # P(x, t) > 0


def _posterior(channel: Dmc, px: np.ndarray, d: int, budget: int) -> _Posterior:
    counts, log_w = type_class_array(d, channel.output_size, budget)
    log_cond = _log_likelihoods(channel, counts, log_w)
    with np.errstate(divide="ignore"):
        log_px = np.log(px)
    log_joint = log_px[:, None] + log_cond
    nx = channel.input_size
    a = np.empty_like(log_joint)
    for x in range(nx):
        others = np.delete(log_joint, x, axis=0)
        lse = logsumexp(others, axis=0) if others.shape[0] else np.full(log_joint.shape[1], -np.inf)
        with np.errstate(invalid="ignore"):
            a[x] = lse - log_joint[x]
    valid = np.isfinite(log_joint)
    log_s = np.full_like(a, -np.inf)
    log_s[valid] = _log_softplus_log(a[valid])
    return _Posterior(px, log_cond, log_joint, a, log_s, valid)


def _lse_masked(values: np.ndarray, mask: np.ndarray) -> float:
    v = values[mask]
    return float(logsumexp(v)) if v.size else -math.inf


@dataclass(frozen=True)
class MultiViewReport:
    """Exact d-view quantities (nats / nats^2).

    ``dispersion`` is the definition-based variance of the information
    density; ``dispersion_decomposed`` re-assembles it from the input
    varentropy, the posterior-surprisal variance and ``cross_term``.
    The ``log_*`` fields carry the small gaps without underflow.
    """

    d: int
    input_entropy: float
    input_varentropy: float
    cond_entropy: float
    mutual_info: float
    dispersion: float
    dispersion_decomposed: float
    cross_term: float
    log_cond_entropy: float
    log_dispersion_gap: float

    @property
    def dispersion_gap(self) -> float:
        """``|V^(d) - V(X)|``."""
        return math.exp(self.log_dispersion_gap)


def multi_view_report(
    channel: Dmc, input_dist, d: int, budget: int = DEFAULT_TYPE_BUDGET, check: bool = True
) -> MultiViewReport:
    """Exact ``H(X|Y^d)``, ``I(X;Y^d)``, ``V^(d)`` and the cross term.

    With ``check`` the two dispersion routes are required to agree to 1e-9.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    px = as_distribution(input_dist).probs
    _check_input(channel, px)
    h_x = entropy(px)
    v_x = varentropy(px)
    post = _posterior(channel, px, d, budget)
    valid = post.valid

    log_h = _lse_masked(post.log_joint + post.log_s, valid)
    log_e2 = _lse_masked(post.log_joint + 2.0 * post.log_s, valid)
    nx = channel.input_size
    log_ex = np.full(nx, -np.inf)
    for x in range(nx):
        if px[x] > 0:
            log_ex[x] = _lse_masked(post.log_cond[x] + post.log_s[x], valid[x])

    h = math.exp(log_h) if log_h > -math.inf else 0.0
    e2 = math.exp(log_e2) if log_e2 > -math.inf else 0.0
    mi = h_x - h

    support = px > 0
    c = np.zeros(nx)
    c[support] = -np.log(px[support]) - h_x
    ex = np.exp(log_ex)
    theta = float(2.0 * np.sum(px[support] * c[support] * (h - ex[support])))

    # definition route
    joint = np.exp(post.log_joint[valid])
    s = np.exp(post.log_s[valid])
    log_px_b = np.broadcast_to(np.log(np.where(support, px, 1.0))[:, None], post.log_joint.shape)[valid]
    iota = -s - log_px_b
    v_def = float(np.sum(joint * (iota - mi) ** 2))
    v_dec = v_x + (e2 - h * h) + theta

    # |V^(d) - V(X)| = (E[s^2] - H^2) + theta, assembled at a common scale
    scale_terms = [log_e2, 2.0 * log_h, log_h] + [float(v) for v in log_ex[support]]
    m = max(scale_terms)
    if m == -math.inf:
        log_vgap = -math.inf
    else:
        hs = math.exp(log_h - m)
        var_s = math.exp(log_e2 - m) - math.exp(2.0 * log_h - m)
        theta_s = float(2.0 * np.sum(px[support] * c[support] * (hs - np.exp(log_ex[support] - m))))
        g = var_s + theta_s
        log_vgap = math.log(abs(g)) + m if g != 0 else -math.inf

    if check and abs(v_def - v_dec) > 1e-9:
        raise InvariantViolationError(f"dispersion routes disagree: {v_def!r} vs {v_dec!r}")
    return MultiViewReport(
        d=d,
        input_entropy=h_x,
        input_varentropy=v_x,
        cond_entropy=h,
        mutual_info=mi,
        dispersion=v_def,
        dispersion_decomposed=v_dec,
        cross_term=theta,
        log_cond_entropy=log_h,
        log_dispersion_gap=log_vgap,
    )


def brute_force_report(channel: Dmc, input_dist, d: int) -> tuple[float, float, float]:
    """``(H(X|Y^d), I, V^(d))`` by summing over every raw output tuple.

    Independent of the type-class path; exponential in ``d``.
    """
    px = as_distribution(input_dist).probs
    w = channel.matrix
    nx, ny = w.shape
    h = 0.0
    joint_all = []
    for ys in itertools.product(range(ny), repeat=d):
        lik = np.array([np.prod([w[x, y] for y in ys]) for x in range(nx)])
        joint = px * lik
        py = joint.sum()
        if py == 0:
            continue
        for x in range(nx):
            if joint[x] > 0:
                post = joint[x] / py
                joint_all.append((joint[x], math.log(post) - math.log(px[x])))
                h -= joint[x] * math.log(post)
    mi = entropy(px) - h
    v = sum(pj * (iota - mi) ** 2 for pj, iota in joint_all)
    return h, mi, v


def min_pair_chernoff(channel: Dmc, input_dist=None) -> float:
    """``min_{x != x'} C(W(.|x), W(.|x'))`` over inputs with positive probability."""
    if input_dist is None:
        support = np.arange(channel.input_size)
    else:
        px = as_distribution(input_dist).probs
        _check_input(channel, px)
        support = np.flatnonzero(px > 0)
    rows = channel.matrix
    best = math.inf
    for i, j in itertools.combinations(support, 2):
        best = min(best, chernoff_information(rows[i], rows[j]))
    return best


# ---------------------------------------------------------------------------
# convergence rates


@dataclass(frozen=True)
class ExponentReport:
    d_window: tuple[int, int]
    fitted_rate: float
    predicted_rate: float
    relative_gap: float
    target: str
    log_d_coefficient: float


Target = Literal["entropy_gap", "dispersion_gap"]


def log_gap(channel: Dmc, input_dist, d: int, target: Target, budget: int = DEFAULT_TYPE_BUDGET) -> float:
    rep = multi_view_report(channel, input_dist, d, budget=budget, check=False)
    if target == "entropy_gap":
        return rep.log_cond_entropy
    if target == "dispersion_gap":
        return rep.log_dispersion_gap
    raise ValueError(f"unknown target {target!r}")


def _max_d_in_budget(output_size: int, budget: int) -> int:
    lo, hi = 0, 1
    while type_class_count(hi, output_size) <= budget:
        lo, hi = hi, hi * 2
        if hi > 10**7:
            return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if type_class_count(mid, output_size) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def default_window(
    channel: Dmc, input_dist, target: Target, width: int = 20, budget: int = DEFAULT_TYPE_BUDGET
) -> tuple[int, int]:
    """Largest ``width`` consecutive d with gap above 1e-290, capped by the budget."""
    d_cap = _max_d_in_budget(channel.output_size, budget)
    rho = min_pair_chernoff(channel, input_dist)
    hi = d_cap if not (rho > 0 and math.isfinite(rho)) else min(d_cap, int(-UNDERFLOW_LOG / rho) + width)
    lo = width + 1

    def usable(d: int) -> bool:
        return log_gap(channel, input_dist, d, target, budget) > UNDERFLOW_LOG

    if hi <= lo or usable(hi):
        d = max(hi, lo)
    else:
        # the gaps decay in d; bisect for the last usable one
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if usable(mid):
                lo = mid
            else:
                hi = mid
        d = lo
    return max(2, d - width + 1), d


def fit_convergence_rate(
    channel: Dmc,
    input_dist,
    d_min: int | None = None,
    d_max: int | None = None,
    target: Target = "entropy_gap",
    budget: int = DEFAULT_TYPE_BUDGET,
) -> ExponentReport:
    """Regress ``log gap_d`` on ``(1, d, log d)``; the rate is minus the d coefficient."""
    if d_min is None or d_max is None:
        d_min, d_max = default_window(channel, input_dist, target, budget=budget)
    if d_min < 2 or d_max < d_min + 2:
        raise ValueError("need d_min >= 2 and at least three points in the window")
    ds = np.arange(d_min, d_max + 1)
    gaps = np.array([log_gap(channel, input_dist, int(d), target, budget) for d in ds])
    usable = gaps > UNDERFLOW_LOG
    if not np.all(usable):
        last = int(ds[usable][-1]) if np.any(usable) else None
        raise GapUnderflowError(f"{target} underflows inside window [{d_min}, {d_max}]", last)
    design = np.column_stack([np.ones_like(ds, dtype=float), ds.astype(float), np.log(ds)])
    coef, *_ = np.linalg.lstsq(design, gaps, rcond=None)
    fitted = -float(coef[1])
    predicted = min_pair_chernoff(channel, input_dist)
    rel = abs(fitted - predicted) / predicted if predicted > 0 else math.inf
    return ExponentReport((int(d_min), int(d_max)), fitted, predicted, rel, target, float(coef[2]))


# ---------------------------------------------------------------------------
# posterior tails


def _log_expm1(t: float) -> float:
    return t + math.log(-math.expm1(-t)) if t > 0 else -math.inf


def posterior_tail(channel: Dmc, input_dist, x: int, d: int, t: float, budget: int = DEFAULT_TYPE_BUDGET) -> float:
    """``Pr[-log P(x|Y^d) >= t | X = x]``, exactly over type classes."""
    if t <= 0:
        raise ValueError("t must be positive")
    px = as_distribution(input_dist).probs
    _check_input(channel, px)
    post = _posterior(channel, px, d, budget)
    # -log P(x|t) >= t  <=>  a >= log(e^t - 1)
    event = np.isfinite(post.log_cond[x]) & (post.a[x] >= _log_expm1(t))
    return float(math.exp(_lse_masked(post.log_cond[x], event))) if np.any(event) else 0.0
