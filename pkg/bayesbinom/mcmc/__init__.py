# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

# flake8: noqa
# pylint: disable=unused-import,relative-beyond-top-level

"""
Bayesian calibration of the binomial tree: a Metropolis-within-Gibbs sampler for the
truncated-normal mixture of gross returns.
"""

from .core import (
    PARAMETERS,
    PriorConfig,
    ReturnSeries,
    ThetaSample,
    acceptance_log_ratio,
    default_prior,
    down_block_log_posterior,
    in_support,
    initial_state,
    log_likelihood,
    metropolis_step,
    return_series,
    sample_p,
    split_moves,
    up_block_log_posterior,
)
from .diagnostics import (
    ChainDiagnostics,
    autocorrelation,
    chain_diagnostics,
    integrated_time,
    posterior_summary,
)
from .sampler import Chain, ChainConfig, chain_from_samples, run_chain
from .tuning import TuningResult, adaptive_pre_burn_in, update_proposals
