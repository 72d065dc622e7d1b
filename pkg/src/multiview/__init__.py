"""Exact information rates, dispersions and exponents for multi-view channels."""

from .deletion import (
    DeletionInstance,
    RhoBoundReport,
    bound_alternating,
    bound_fractional,
    bound_naive,
    f_lambda,
    rho_n_exact,
    rho_pair,
    subsequence_count,
)
from .fbl_rates import FblQuery, gaussian_cdf, inverse_gaussian_cdf, normal_approx_rate
from .largedev import LlrProfile, TiltedFamily, exponent, gamma_probability, primal_sanov_oracle
from .multiview_dmc import (
    BudgetExceededError,
    Dmc,
    MultiViewReport,
    bec,
    bsc,
    detect_bims,
    fit_convergence_rate,
    min_pair_chernoff,
    multi_view_report,
    posterior_tail,
    product_channel,
    random_dmc,
    read_channel,
    z_channel,
    z_general,
)
from .prob_core import (
    FiniteDistribution,
    LogReal,
    bhattacharyya,
    chernoff_information,
    entropy,
    kl_divergence,
    varentropy,
)
from .special_channels import (
    bims_capacity_bounds,
    bims_decompose,
    binomial_capacity,
    figure1_sweep,
    poisson_capacity,
    poisson_mixture_capacity,
)

__version__ = "0.1.0"
