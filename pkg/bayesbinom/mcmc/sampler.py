# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Full calibration runs: initialization, adaptive tuning and the main chain.
"""

from typing import NamedTuple, Optional

import numpy
from jax import numpy as np
from jax import random

from bayesbinom.mcmc.core import (
    PARAMETERS,
    PriorConfig,
    ReturnSeries,
    ThetaSample,
    build_sampler,
    check_prior,
    check_window,
    default_prior,
    initial_state,
)
from bayesbinom.mcmc.tuning import TuningResult, adaptive_pre_burn_in
from bayesbinom.utils import numpyfy, rng_key


class ChainConfig(NamedTuple):
    """
    Run lengths and tuner settings of `run_chain`.

    iterations: int
        Main-chain iterations, burn-in included.

    burn_in: int
        Leading main-chain iterations to discard.

    thin: int
        Keep every `thin`-th iteration after the burn-in.

    seed: int
        Seed of the chain's random stream.

    block_size: int
        Iterations per adaptive tuning block.

    max_blocks: int
        Maximum number of tuning blocks.

    tuner_literal: bool
        Apply the tuning rule with its directions swapped (high acceptance halves the
        proposal variance).
    """

    iterations: int = 10000
    burn_in: int = 1000
    thin: int = 5
    seed: int = 0
    block_size: int = 100
    max_blocks: int = 50
    tuner_literal: bool = False


class Chain(NamedTuple):
    """
    Output of `run_chain`.

    samples: ThetaSample
        Kept draws, one array entry per draw.

    proposal_variances: dict
        Tuned proposal variance of each Metropolis-updated parameter.

    acceptance_counts: dict
        Accepted proposals per parameter over all main-chain iterations.

    accepted: numpy.ndarray
        Boolean acceptance flags, one row per main-chain iteration and one column
        per entry of `PARAMETERS`.

    iterations: int
        Number of main-chain iterations.

    seed: int

    r_f: float

    u_upper: float

    tuning: Optional[TuningResult]
    """

    samples: ThetaSample
    proposal_variances: dict
    acceptance_counts: dict
    accepted: numpy.ndarray
    iterations: int
    seed: int
    r_f: float = 0.0
    u_upper: float = 2.0
    tuning: Optional[TuningResult] = None

    def __len__(self):
        return len(self.samples.p)

    def sample(self, index):
        return ThetaSample(*(float(x[index]) for x in self.samples))


def chain_from_samples(samples: ThetaSample, r_f=0.0, u_upper=2.0, seed=0, **kwargs):
    """
    Wraps externally produced draws (for instance a loaded chain file) into a `Chain`.
    """
    samples = ThetaSample(*(numpy.atleast_1d(numpy.asarray(x, numpy.float64)) for x in samples))
    if len(samples.p) == 0:
        raise ValueError("A chain needs at least one sample")
    n = len(samples.p)
    defaults = dict(
        proposal_variances=kwargs.pop("proposal_variances", {}),
        acceptance_counts=kwargs.pop("acceptance_counts", {}),
        accepted=kwargs.pop("accepted", numpy.zeros((0, len(PARAMETERS)), dtype=bool)),
        iterations=kwargs.pop("iterations", n),
    )
    return Chain(samples, seed=seed, r_f=r_f, u_upper=u_upper, **defaults, **kwargs)


def run_chain(
    data: ReturnSeries, prior: Optional[PriorConfig] = None, config: ChainConfig = ChainConfig()
):
    """
    Runs the full sampler on `data`.

    The chain starts from `initial_state`, tunes its proposal variances with
    `adaptive_pre_burn_in`, and then runs `config.iterations` iterations from the last
    tuning state. The first `config.burn_in` iterations are discarded and every
    `config.thin`-th of the remaining ones is kept.

    Raises `DegenerateWindowError` when `data` has no up or no down moves, and
    `ValueError` for inconsistent run lengths.
    """
    iterations, burn_in, thin = int(config.iterations), int(config.burn_in), int(config.thin)
    if burn_in < 0 or thin < 1:
        raise ValueError(f"Invalid burn_in={burn_in} or thin={thin}")
    if iterations <= burn_in:
        raise ValueError(f"iterations={iterations} must exceed burn_in={burn_in}")

    check_window(data)
    prior = default_prior(data) if prior is None else prior
    check_prior(prior, data.r_f)
    if numpy.any(numpy.asarray(data.values) >= prior.u_upper):
        raise ValueError(f"Observed gross returns must be below u_upper={prior.u_upper}")

    theta, variances = initial_state(data, prior)
    key_tuning, key_main = random.split(rng_key(config.seed))
    sampler = build_sampler(data, prior)
    tuning = adaptive_pre_burn_in(
        data,
        prior,
        theta,
        key_tuning,
        variances=variances,
        block_size=config.block_size,
        max_blocks=config.max_blocks,
        literal=config.tuner_literal,
        sampler=sampler,
    )

    tuned = np.array([tuning.proposal_variances[name] for name in PARAMETERS])
    _, draws, flags = sampler(tuning.state, key_main, tuned, iterations)
    draws, flags = numpyfy((draws, flags))
    samples = ThetaSample(*(x[burn_in::thin] for x in draws))

    counts = flags.sum(axis=0)
    return Chain(
        samples,
        dict(tuning.proposal_variances),
        {name: int(c) for name, c in zip(PARAMETERS, counts)},
        flags,
        iterations,
        int(config.seed),
        float(data.r_f),
        float(prior.u_upper),
        tuning,
    )
