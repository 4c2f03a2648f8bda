"""Proximal samplers for heavy-tailed targets.

Stable and Gaussian proximal samplers with exact rejection oracles,
generalized Cauchy targets, sample-based divergence diagnostics and
closed-form convergence bounds.
"""

from .diagnostics import (DivergenceEstimate, hist_chi2_estimate, ks_estimate,
                          radial_tv_estimate, surrogate_moment_track)
from .oracles import (InexactOracle, OracleBudgetError, OracleOutcome,
                      RestrictedGaussianOracle, RestrictedStableOracle,
                      inexact_oracle_wrapper, raso_sample, raso_sample_lower_bounded,
                      rgo_sample)
from .rng import RngStream
from .samplers import (ChainRun, SamplerConfig, run_chains, step_gaussian_proximal,
                       step_size_policy, step_stable_proximal, step_ula)
from .stablernd import (INFINITE, StableSpec, sample_cauchy_vector, sample_isotropic_stable,
                        sample_one_sided_stable, stable_abs_moment)
from .targets import FlatPotential, GeneralizedCauchy, Quadratic, TargetSpec, sample_exact

__version__ = "0.1.0"

__all__ = [
    "DivergenceEstimate", "hist_chi2_estimate", "ks_estimate", "radial_tv_estimate",
    "surrogate_moment_track", "InexactOracle", "OracleBudgetError", "OracleOutcome",
    "RestrictedGaussianOracle", "RestrictedStableOracle", "inexact_oracle_wrapper",
    "raso_sample", "raso_sample_lower_bounded", "rgo_sample", "RngStream", "ChainRun",
    "SamplerConfig", "run_chains", "step_gaussian_proximal", "step_size_policy",
    "step_stable_proximal", "step_ula", "INFINITE", "StableSpec", "sample_cauchy_vector",
    "sample_isotropic_stable", "sample_one_sided_stable", "stable_abs_moment",
    "FlatPotential", "GeneralizedCauchy", "Quadratic", "TargetSpec", "sample_exact",
]
