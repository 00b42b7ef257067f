"""Measurement-count bounds and simulation for sparse support recovery."""

from .bounds import (BoundResult, cor1_min_n, cor2_min_n, merikoski_b_bound, regime_scaling_check,
                     thm1_min_n, thm1_rhs, thm3_min_n, thm3_rhs, wang_min_n)
from .exceptions import DomainError, EnumerationCapError, NotPositiveDefiniteError
from .numerics import RandomStream
from .recovery_sim import (ExhaustiveSupportDecoder, ExperimentConfig, estimate_perr, sweep_n,
                           wilson_interval)
from .signal_model import (ReducedProblem, SignalModel, SpectrumSummary, autocorrelation,
                           power_spectrum_dtft, power_spectrum_paper, toeplitz_autocorrelation)
from .wishart_info import (InfoRateBound, exact_mutual_information, information_rate_bound,
                           jensen_minkowski_bound, mc_wishart_logdet, wishart_logdet)

__version__ = "0.1.0"

__all__ = [
    "BoundResult", "DomainError", "EnumerationCapError", "ExhaustiveSupportDecoder",
    "ExperimentConfig", "InfoRateBound", "NotPositiveDefiniteError", "RandomStream",
    "ReducedProblem", "SignalModel", "SpectrumSummary", "autocorrelation", "cor1_min_n",
    "cor2_min_n", "estimate_perr", "exact_mutual_information", "information_rate_bound",
    "jensen_minkowski_bound", "mc_wishart_logdet", "merikoski_b_bound", "power_spectrum_dtft",
    "power_spectrum_paper", "regime_scaling_check", "sweep_n", "thm1_min_n", "thm1_rhs",
    "thm3_min_n", "thm3_rhs", "toeplitz_autocorrelation", "wang_min_n", "wilson_interval",
    "wishart_logdet",
]
