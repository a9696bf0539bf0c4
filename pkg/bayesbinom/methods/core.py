# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

from abc import ABC
from typing import NamedTuple, Optional

import numpy
from jax import numpy as np
from jax import random

from bayesbinom.distributions.core import lower_component, sample_truncated, upper_component
from bayesbinom.utils import dispatch, shifted_mean

#  Base Classes
#  ============

METHOD_TAGS = ("theta", "xi", "expected_xi", "sm", "bm", "bv")

# Order statistics reported by `summarize` by default
DEFAULT_LEVELS = (0.005, 0.5, 0.995)


class PropagationMethod(ABC):
    """
    Abstract base class of the ways of turning a calibration into a distribution of
    option prices. Subclasses hold the method's settings, and `propagate` is
    dispatched on them.
    """

    tag = None

    def __init__(self, **kwargs):
        self.kwargs = kwargs

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in vars(self).items() if k != "kwargs")
        return f"{type(self).__name__}({args})"


class PriceDistribution(NamedTuple):
    """
    Monte Carlo sample of option prices.

    samples: numpy.ndarray
        Non-negative prices.

    method_tag: str
        One of `METHOD_TAGS`.

    grid: Optional[XiGrid]
        Binned posterior predictive of the tree parameters (ξ method only).
    """

    samples: numpy.ndarray
    method_tag: str
    grid: Optional[NamedTuple] = None

    def __len__(self):
        return len(self.samples)

    @property
    def mean(self):
        return float(shifted_mean(self.samples))

    @property
    def standard_error(self):
        """
        Monte Carlo standard error of `mean`.
        """
        n = len(self.samples)
        return float(numpy.std(self.samples, ddof=1) / numpy.sqrt(n)) if n > 1 else 0.0

    def percentile(self, level):
        return float(numpy.quantile(self.samples, _check_level(level)))


def price_distribution(samples, method_tag, grid=None):
    """
    Validates and wraps a sample of prices into a `PriceDistribution`.
    """
    samples = numpy.atleast_1d(numpy.asarray(samples, dtype=numpy.float64))
    if method_tag not in METHOD_TAGS:
        raise ValueError(f"Unknown method tag {method_tag!r}: expected one of {METHOD_TAGS}")
    if samples.size == 0:
        raise ValueError("A price distribution needs at least one sample")
    if not numpy.all(numpy.isfinite(samples)):
        raise ArithmeticError(f"Non-finite prices produced by the {method_tag} method")
    if numpy.any(samples < 0):
        raise ValueError(f"Negative prices produced by the {method_tag} method")
    return PriceDistribution(samples, method_tag, grid)


def _check_level(level):
    if not 0 < level < 1:
        raise ValueError(f"Percentile levels must lie in (0, 1) (got {level})")
    return level


def summarize(dist: PriceDistribution, levels=DEFAULT_LEVELS):
    """
    Mean, median, requested percentiles and the 0.5%-99.5% credible interval of `dist`.
    Percentiles interpolate linearly between order statistics.
    """
    levels = tuple(_check_level(float(x)) for x in levels)
    probs = sorted(set(levels) | set(DEFAULT_LEVELS))
    values = numpy.quantile(dist.samples, probs)
    quantiles = dict(zip(probs, (float(v) for v in values)))
    lower, upper = quantiles[0.005], quantiles[0.995]
    return {
        "method": dist.method_tag,
        "samples": len(dist),
        "mean": dist.mean,
        "standard_error": dist.standard_error,
        "median": quantiles[0.5],
        "percentiles": {level: quantiles[level] for level in levels},
        "lower": lower,
        "upper": upper,
        "width": upper - lower,
    }


#  Shared kernels
#  ==============


def pick_theta(key, samples):
    """
    Uniform draw, with replacement, of one parameter vector from the chain arrays.
    """
    n = samples.p.shape[0]
    j = random.randint(key, (), 0, n)
    return type(samples)(*(x[j] for x in samples))


def sample_xi(key, theta, r_f, shape=()):
    """
    Draws `(u, d)` from the up and down components of `theta`.
    """
    key_u, key_d = random.split(key)
    sigma_u = np.sqrt(theta.sigma2_u)
    sigma_d = np.sqrt(theta.sigma2_d)
    u = sample_truncated(key_u, upper_component(theta.u_star, sigma_u, r_f), shape)
    d = sample_truncated(key_d, lower_component(theta.d_star, sigma_d, r_f), shape)
    return u, d


def chain_arrays(chain):
    samples = chain.samples
    return type(samples)(*(np.asarray(x, dtype=np.float64) for x in samples))


def check_rates(chain, frame):
    if not numpy.isclose(chain.r_f, frame.r_f, rtol=0, atol=1e-15):
        raise ValueError(
            f"The chain was calibrated with r_f={chain.r_f} but the market frame uses "
            f"r_f={frame.r_f}"
        )


def check_count(value, name):
    if int(value) != value or value < 1:
        raise ValueError(f"`{name}` must be a positive integer (got {value})")
    return int(value)


#  Main functions
#  ==============


@dispatch.abstract
def propagate(method, source, frame, key, config):
    """
    Turns `source` (a `Chain` for the Bayesian methods, a `ReturnSeries` for the
    baselines) into a `PriceDistribution` of the option described by `frame`.
    """


@dispatch
def analyze(dist: PriceDistribution, levels=DEFAULT_LEVELS):
    return summarize(dist, levels)
