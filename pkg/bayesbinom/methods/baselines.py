# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Naive calibrations of the tree from the observed returns.

- Sample Means (SM): one tree at the means of the up and down moves.
- Bootstrapped Means (BM): trees at the means of resamples of the up and down moves,
  each resample as long as the observed class.
- Bootstrapped Values (BV): trees at one resampled up move and one resampled down move.

Resampling is stratified, so every tree satisfies `0 < d < 1 + r_f <= u`.
"""

from typing import NamedTuple

from jax import jit
from jax import numpy as np
from jax import random, vmap

from bayesbinom.mcmc.core import ReturnSeries, check_window
from bayesbinom.methods.core import (
    PriceDistribution,
    PropagationMethod,
    check_count,
    price_distribution,
)
from bayesbinom.methods.utils import TaskConfig, run_tasks, sample_keys
from bayesbinom.trees import MarketFrame, XiPair, build_pricer, price_european
from bayesbinom.utils import dispatch, rng_key, shifted_mean


class BootstrapConfig(NamedTuple):
    """
    replicates: int
        Number of bootstrap trees.

    seed: int
        Seed of the resampling stream.
    """

    replicates: int = 5000
    seed: int = 0


class SampleMeans(PropagationMethod):
    tag = "sm"


class BootstrappedMeans(PropagationMethod):
    tag = "bm"

    def __init__(self, replicates: int = 5000, **kwargs):
        super().__init__(**kwargs)
        self.replicates = check_count(replicates, "replicates")


class BootstrappedValues(PropagationMethod):
    tag = "bv"

    def __init__(self, replicates: int = 5000, **kwargs):
        super().__init__(**kwargs)
        self.replicates = check_count(replicates, "replicates")


def _check_rates(data, frame):
    if data.r_f != frame.r_f:
        raise ValueError(f"Returns use r_f={data.r_f} but the market frame uses r_f={frame.r_f}")


def sample_means_calibration(data: ReturnSeries, frame: MarketFrame):
    """
    Price of the tree at the sample means of the up and down moves.
    """
    _check_rates(data, frame)
    ups, downs = check_window(data)
    xi = XiPair(float(shifted_mean(ups)), float(shifted_mean(downs)))
    return price_european(xi, frame)


def _bootstrap(data, frame, replicates, key, config, resample):
    _check_rates(data, frame)
    ups, downs = (np.asarray(x) for x in check_window(data))
    pricer = build_pricer(frame)

    def replicate(k):
        key_u, key_d = random.split(k)
        return resample(key_u, ups), resample(key_d, downs)

    @jit
    def evaluate(indices):
        u, d = vmap(replicate)(sample_keys(key, indices))
        return pricer(u, d)

    return run_tasks(evaluate, replicates, config)


def _resampled_mean(key, x):
    return shifted_mean(x[random.randint(key, x.shape, 0, x.size)])


def _resampled_value(key, x):
    return x[random.randint(key, (), 0, x.size)]


def bootstrapped_means(
    data: ReturnSeries,
    frame: MarketFrame,
    cfg: BootstrapConfig = BootstrapConfig(),
    config: TaskConfig = TaskConfig(),
    key=None,
):
    """
    Distribution of prices at the means of stratified bootstrap resamples.
    The stream defaults to the one of `cfg.seed`.
    """
    replicates = check_count(cfg.replicates, "replicates")
    key = rng_key(cfg.seed) if key is None else key
    prices = _bootstrap(data, frame, replicates, key, config, _resampled_mean)
    return price_distribution(prices, "bm")


def bootstrapped_values(
    data: ReturnSeries,
    frame: MarketFrame,
    cfg: BootstrapConfig = BootstrapConfig(),
    config: TaskConfig = TaskConfig(),
    key=None,
):
    """
    Distribution of prices at single resampled up and down moves.
    The stream defaults to the one of `cfg.seed`.
    """
    replicates = check_count(cfg.replicates, "replicates")
    key = rng_key(cfg.seed) if key is None else key
    prices = _bootstrap(data, frame, replicates, key, config, _resampled_value)
    return price_distribution(prices, "bv")


@dispatch
def propagate(  # noqa: F811 # pylint: disable=C0116,E0102
    method: SampleMeans,
    data: ReturnSeries,
    frame: MarketFrame,
    key,
    config: TaskConfig = TaskConfig(),
) -> PriceDistribution:
    return price_distribution([sample_means_calibration(data, frame)], "sm")


@dispatch
def propagate(  # noqa: F811 # pylint: disable=C0116,E0102
    method: BootstrappedMeans,
    data: ReturnSeries,
    frame: MarketFrame,
    key,
    config: TaskConfig = TaskConfig(),
) -> PriceDistribution:
    return bootstrapped_means(data, frame, BootstrapConfig(method.replicates), config, key)


@dispatch
def propagate(  # noqa: F811 # pylint: disable=C0116,E0102
    method: BootstrappedValues,
    data: ReturnSeries,
    frame: MarketFrame,
    key,
    config: TaskConfig = TaskConfig(),
) -> PriceDistribution:
    return bootstrapped_values(data, frame, BootstrapConfig(method.replicates), config, key)
