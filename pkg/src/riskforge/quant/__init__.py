"""Uncertainty propagation: seeded sampling, copula dependence, Monte Carlo
profiles, exceedance curves, VaR/CVaR, and compound loss aggregation."""

from .curves import RiskCurve, RiskCurveFamily, curve_family, exceedance_curve, step_value
from .metrics import LossMetrics, var_cvar
from .propagate import (
    LikelihoodChain,
    RiskProfile,
    Summary,
    aggregate_loss,
    markov_distribution,
    markov_pipeline,
    propagate,
    summarize,
)
from .rng import CHUNK, RandomStream, chunked_normals, chunked_uniforms
from .sampling import CopulaSample, CorrelationSpec, SampleResult, copula_sample, sample

__all__ = [
    "CHUNK",
    "CopulaSample",
    "CorrelationSpec",
    "LikelihoodChain",
    "LossMetrics",
    "RandomStream",
    "RiskCurve",
    "RiskCurveFamily",
    "RiskProfile",
    "SampleResult",
    "Summary",
    "aggregate_loss",
    "chunked_normals",
    "chunked_uniforms",
    "copula_sample",
    "curve_family",
    "exceedance_curve",
    "markov_distribution",
    "markov_pipeline",
    "propagate",
    "sample",
    "step_value",
    "summarize",
    "var_cvar",
]
