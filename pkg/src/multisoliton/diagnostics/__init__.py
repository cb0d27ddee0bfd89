"""Rates, weighted functionals and decay fits."""

from .decay import DecayFitResult, pointwise_decay_fit, weighted_sup
from .functionals import (ExponentialFit, FunctionalSeries, MomentReport,
                          MonotonicityReport, ResidualSampler, Samples,
                          field_samples, fit_exponential, fs_functional,
                          i_functional, i_functional_rate, interaction_integral,
                          interaction_series, j_functional, j_series,
                          monotonicity_check, residual, solution_samples,
                          soliton_sum, weighted_decay_series)
from .rates import (NlsRateParams, RateParams, kappa_alpha_beta,
                    make_nls_rate_params, make_rate_params, theta)

__all__ = [
    "DecayFitResult", "pointwise_decay_fit", "weighted_sup", "ExponentialFit",
    "FunctionalSeries", "MomentReport", "MonotonicityReport", "ResidualSampler",
    "Samples", "field_samples", "fit_exponential", "fs_functional", "i_functional",
    "i_functional_rate", "interaction_integral", "interaction_series", "j_functional",
    "j_series", "monotonicity_check", "residual", "solution_samples", "soliton_sum",
    "weighted_decay_series", "NlsRateParams", "RateParams", "kappa_alpha_beta",
    "make_nls_rate_params", "make_rate_params", "theta",
]
