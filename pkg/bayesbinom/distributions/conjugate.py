# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Normal, Beta, Gamma and Inverse-Gamma building blocks for the priors of the mixture model.
"""

import numpy
from jax import numpy as np
from jax import random
from jax.scipy.special import gammaln, ndtr

from bayesbinom.distributions.core import _is_concrete


def _check_positive(**params):
    for name, value in params.items():
        if _is_concrete(value) and numpy.any(~(numpy.asarray(value) > 0)):
            raise ValueError(f"`{name}` must be positive (got {value})")


def normal_cdf(x):
    """
    Standard normal cumulative distribution function Φ(x).
    """
    return ndtr(x)


def sample_beta(key, a, b, shape=()):
    """
    Draws from Beta(a, b).
    """
    _check_positive(a=a, b=b)
    return random.beta(key, a, b, shape, dtype=np.float64)


def sample_gamma(key, shape_param, rate=1.0, shape=()):
    """
    Draws from Ga(shape_param, rate) (mean `shape_param / rate`).
    """
    _check_positive(shape_param=shape_param, rate=rate)
    return random.gamma(key, shape_param, shape, dtype=np.float64) / rate


def sample_inverse_gamma(key, alpha, beta, shape=()):
    """
    Draws from IG(alpha, beta), the law of `beta / X` with X ~ Ga(alpha, 1).
    """
    _check_positive(alpha=alpha, beta=beta)
    return beta / random.gamma(key, alpha, shape, dtype=np.float64)


def inverse_gamma_logpdf(x, alpha, beta):
    """
    Log density of IG(alpha, beta) at `x`; `-inf` for `x <= 0`.
    """
    safe = np.where(x > 0, x, 1.0)
    logp = alpha * np.log(beta) - gammaln(alpha) - (alpha + 1) * np.log(safe) - beta / safe
    return np.where(x > 0, logp, -np.inf)


def gamma_logpdf(x, shape_param, rate=1.0):
    """
    Log density of Ga(shape_param, rate) at `x`; `-inf` for `x < 0`.
    """
    safe = np.where(x > 0, x, 1.0)
    logp = (
        shape_param * np.log(rate)
        - gammaln(shape_param)
        + (shape_param - 1) * np.log(safe)
        - rate * safe
    )
    logp = np.where(x > 0, logp, np.where(shape_param == 1, np.log(rate), -np.inf))
    return np.where(x < 0, -np.inf, logp)
