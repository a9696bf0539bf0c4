# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Adaptive pre-burn-in tuning of the Metropolis proposal variances.

The sampler runs in blocks of `block_size` iterations. After each block, a parameter
accepted more than `block_size / 2` times gets its proposal variance doubled, one
accepted fewer than `block_size / 10` times gets it halved, and one in between is
frozen with its current variance. Tuning stops once every parameter is frozen.
"""

import warnings
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
    in_support,
    initial_state,
)


class TuningResult(NamedTuple):
    """
    proposal_variances: dict
        Tuned variance of each Metropolis-updated parameter.

    state: ThetaSample
        Sampler state at the end of the last tuning block.

    blocks: int
        Number of tuning blocks run.

    converged: bool
        Whether every proposal variance was frozen before reaching the block cap.

    history: numpy.ndarray
        Acceptance counts of each block, one column per entry of `PARAMETERS`.
    """

    proposal_variances: dict
    state: ThetaSample
    blocks: int
    converged: bool
    history: numpy.ndarray


def update_proposals(counts, variances, frozen, block_size, literal=False):
    """
    One tuning decision. All arguments but `block_size` and `literal` are ordered
    as `PARAMETERS`. Returns the updated variances and frozen flags.

    With `literal=True` the directions are swapped, so that high acceptance halves
    the proposal variance and low acceptance doubles it.
    """
    counts = numpy.asarray(counts)
    variances = numpy.array(variances, dtype=numpy.float64)
    frozen = numpy.array(frozen, dtype=bool)

    high = counts > block_size / 2
    low = counts < block_size / 10
    grow, shrink = (0.5, 2.0) if literal else (2.0, 0.5)

    active = ~frozen
    variances = numpy.where(active & high, grow * variances, variances)
    variances = numpy.where(active & low, shrink * variances, variances)
    return variances, frozen | (active & ~high & ~low)


def adaptive_pre_burn_in(
    data: ReturnSeries,
    prior: PriorConfig,
    initial: ThetaSample,
    key,
    variances: Optional[dict] = None,
    block_size: int = 100,
    max_blocks: int = 50,
    literal: bool = False,
    sampler=None,
):  # pylint: disable=too-many-arguments
    """
    Tunes the proposal variances starting from `initial`.

    Parameters
    ----------

    data: ReturnSeries

    prior: PriorConfig

    initial: ThetaSample
        Starting state. Must lie in the support of the posterior.

    key:
        `jax.random` key. Block `k` uses `fold_in(key, k)`.

    variances: Optional[dict] = None
        Starting proposal variances. Defaults to the ones of `initial_state`.

    block_size: int = 100

    max_blocks: int = 50
        When reached, the current variances are returned with `converged=False`
        and a warning is issued.

    literal: bool = False
        See `update_proposals`.

    sampler:
        A function built by `build_sampler(data, prior)`, to reuse its compilation.
    """
    if not bool(in_support(initial, data.r_f, prior.u_upper)):
        raise ValueError(f"The initial state {initial} lies outside of the posterior support")
    if block_size < 1 or max_blocks < 1:
        raise ValueError("block_size and max_blocks must be positive")

    if variances is None:
        _, variances = initial_state(data, prior)
    sampler = build_sampler(data, prior) if sampler is None else sampler

    v = numpy.array([variances[name] for name in PARAMETERS], dtype=numpy.float64)
    frozen = numpy.zeros(len(PARAMETERS), dtype=bool)
    state = ThetaSample(*(np.asarray(x, dtype=np.float64) for x in initial))
    history = []

    for block in range(max_blocks):
        state, _, flags = sampler(state, random.fold_in(key, block), np.asarray(v), block_size)
        counts = numpy.asarray(flags).sum(axis=0)
        history.append(counts)
        v, frozen = update_proposals(counts, v, frozen, block_size, literal)
        if frozen.all():
            break

    converged = bool(frozen.all())
    if not converged:
        unfrozen = [name for name, f in zip(PARAMETERS, frozen) if not f]
        warnings.warn(
            f"Proposal tuning did not settle after {max_blocks} blocks "
            f"(still adapting: {', '.join(unfrozen)}); continuing with the current variances"
        )

    return TuningResult(
        {name: float(x) for name, x in zip(PARAMETERS, v)},
        state,
        len(history),
        converged,
        numpy.stack(history),
    )
