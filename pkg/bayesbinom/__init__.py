# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

# flake8: noqa F401

"""
BayesBinom: Bayesian calibration of binomial option-pricing trees
"""

import os

import jax


def _config_jax():
    # Check for user set memory environment for XLA/JAX
    if not (
        "XLA_PYTHON_CLIENT_PREALLOCATE" in os.environ
        or "XLA_PYTHON_CLIENT_MEM_FRACTION" in os.environ
        or "XLA_PYTHON_CLIENT_ALLOCATOR" in os.environ
    ):
        # Several rolling dates may run concurrently in one process
        os.environ["XLA_PYTHON_CLIENT_PREALLOCATE"] = "false"

    # Tree prices and truncated-normal tails are evaluated in `jax.f64`
    jax.config.update("jax_enable_x64", True)


_config_jax()


from . import distributions, harness, mcmc, methods, trees, utility  # noqa: E402, F401
from .grids import Grid  # noqa: E402, F401
from .mcmc import (  # noqa: E402, F401
    Chain,
    ChainConfig,
    PriorConfig,
    ReturnSeries,
    return_series,
    run_chain,
)
from .methods import (  # noqa: E402, F401
    PriceDistribution,
    SerialExecutor,
    TaskConfig,
    analyze,
    propagate,
)
from .trees import MarketFrame, XiPair, price_european  # noqa: E402, F401
from .utils import DegenerateWindowError, NumericalError, dispatch  # noqa: E402, F401


# Reduce namespace noise
del jax
del os
del _config_jax
