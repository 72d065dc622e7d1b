"""Normal-approximation rates for d-view channels at finite blocklength.

The rate ``I + Phi^{-1}(eps) sqrt(V / n) + log(n) / (2n)`` is evaluated with
the exact d-view mutual information and dispersion.  The channel is assumed
non-singular; this is not checked.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable

from scipy.special import ndtr, ndtri

from .multiview_dmc import DEFAULT_TYPE_BUDGET, Dmc, multi_view_report

LABEL = "normal approximation"


class DegenerateDispersionError(ValueError):
    """``V^(d) = 0``, where the Gaussian term carries no information."""


def gaussian_cdf(t: float) -> float:
    return float(ndtr(t))


def inverse_gaussian_cdf(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    return float(ndtri(q))


@dataclass(frozen=True)
class FblQuery:
    n: int
    epsilon: float
    d: int

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class FblRow:
    n: int
    epsilon: float
    d: int
    rate: float
    mutual_info: float
    dispersion: float
    input_entropy: float
    label: str = LABEL

    @property
    def gap_to_entropy(self) -> float:
        return self.input_entropy - self.rate


def normal_approx_terms(mutual_info: float, dispersion: float, n: int, epsilon: float) -> float:
    if dispersion <= 0.0:
        raise DegenerateDispersionError("dispersion is zero; the normal approximation is degenerate")
    return mutual_info + inverse_gaussian_cdf(epsilon) * math.sqrt(dispersion / n) + math.log(n) / (2.0 * n)


def fbl_row(channel: Dmc, input_dist, query: FblQuery, budget: int = DEFAULT_TYPE_BUDGET) -> FblRow:
    rep = multi_view_report(channel, input_dist, query.d, budget)
    rate = normal_approx_terms(rep.mutual_info, rep.dispersion, query.n, query.epsilon)
    return FblRow(query.n, query.epsilon, query.d, rate, rep.mutual_info, rep.dispersion, rep.input_entropy)


def normal_approx_rate(channel: Dmc, input_dist, query: FblQuery, budget: int = DEFAULT_TYPE_BUDGET) -> float:
    """Normal-approximation rate in nats per channel use.

    Raises
    ------
    DegenerateDispersionError
        If the exact d-view dispersion is zero.
    """
    return fbl_row(channel, input_dist, query, budget).rate


FBL_HEADER = "n,epsilon,d,rate_nats,gap_to_entropy"


def fbl_table(channel: Dmc, input_dist, queries: Iterable[FblQuery], scale: float = 1.0) -> str:
    """CSV table; ``scale`` divides the nats columns."""
    buf = io.StringIO()
    buf.write(FBL_HEADER + "\n")
    for q in queries:
        r = fbl_row(channel, input_dist, q)
        buf.write(f"{r.n},{r.epsilon:.12g},{r.d},{r.rate / scale:.12g},{r.gap_to_entropy / scale:.12g}\n")
    return buf.getvalue()
