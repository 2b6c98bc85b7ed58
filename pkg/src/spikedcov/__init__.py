"""
Bayesian estimation of high-dimensional spiked covariance matrices.

The posterior under a generalized shrinkage inverse-Wishart prior is
explored by a Gibbs sampler on the eigen-coordinates ``(Lambda, Gamma)``,
with spike-count selection, frequentist comparators, a simulation harness
and independent oracles for checking the sampler.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DegeneratePosteriorError,
    DomainError,
    InputError,
    InvariantError,
    ParseError,
    SpikedCovError,
    UnreliableOracleError,
)
from .model import DataMatrix, SampleSpectrum, SpikedScenario, gen_spiked_data, load_matrix_csv, sample_covariance
from .prior import PriorConfig, giw_data_driven, gsiw_data_driven, iw_fixed, prior_for, siw_fixed
from .sampler import McmcSettings, PosteriorDraws, run_chain
from .estimators import estimate_eigenvectors, reduce_reconstruct, spoet, summarize_eigenvalues
from .selection import SelectionResult, select_k

__all__ = [
    "ConfigError",
    "DataMatrix",
    "DegeneratePosteriorError",
    "DomainError",
    "InputError",
    "InvariantError",
    "McmcSettings",
    "ParseError",
    "PosteriorDraws",
    "PriorConfig",
    "SampleSpectrum",
    "SelectionResult",
    "SpikedCovError",
    "SpikedScenario",
    "UnreliableOracleError",
    "estimate_eigenvectors",
    "gen_spiked_data",
    "giw_data_driven",
    "gsiw_data_driven",
    "iw_fixed",
    "load_matrix_csv",
    "prior_for",
    "reduce_reconstruct",
    "run_chain",
    "sample_covariance",
    "select_k",
    "siw_fixed",
    "spoet",
    "summarize_eigenvalues",
]
