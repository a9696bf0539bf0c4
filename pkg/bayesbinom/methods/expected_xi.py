# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Expected-ξ method: one tree per posterior draw, built on the conditional means
`E(u | θ)` and `E(d | θ)` of the truncated components.

The risk-neutral probability of that tree is `((1 + r_f) - E(d)) / (E(u) - E(d))`.
"""

import numpy
from jax import jit
from jax import numpy as np
from jax import random, vmap

from bayesbinom.distributions.core import moments
from bayesbinom.mcmc.sampler import Chain
from bayesbinom.methods.core import (
    PriceDistribution,
    PropagationMethod,
    chain_arrays,
    check_count,
    check_rates,
    pick_theta,
    price_distribution,
)
from bayesbinom.methods.utils import TaskConfig, run_tasks, sample_keys
from bayesbinom.trees import MarketFrame, build_pricer
from bayesbinom.utils import NumericalError, dispatch


class ExpectedXiMethod(PropagationMethod):
    """
    Parameters
    ----------

    draws: int = 5000
        Number of parameter vectors θ drawn from the chain.
    """

    tag = "expected_xi"

    def __init__(self, draws: int = 5000, **kwargs):
        super().__init__(**kwargs)
        self.draws = check_count(draws, "draws")


def expected_xi(theta, r_f):
    """
    Returns `(E(u), E(d))` for a parameter vector `theta`.
    """
    m = moments(theta.u_star, np.sqrt(theta.sigma2_u), theta.d_star, np.sqrt(theta.sigma2_d), r_f)
    return m.mean_u, m.mean_d


def expected_xi_method(
    chain: Chain,
    frame: MarketFrame,
    key=None,
    draws: int = 5000,
    config: TaskConfig = TaskConfig(),
):
    draws = check_count(draws, "draws")
    check_rates(chain, frame)
    key = random.PRNGKey(0) if key is None else key

    samples = chain_arrays(chain)
    pricer = build_pricer(frame)
    r_f = frame.r_f

    def tree_at_means(k):
        return expected_xi(pick_theta(k, samples), r_f)

    @jit
    def evaluate(indices):
        u, d = vmap(tree_at_means)(sample_keys(key, indices))
        return u, d, pricer(u, d)

    u, d, prices = run_tasks(evaluate, draws, config)
    if not (numpy.all(numpy.isfinite(u)) and numpy.all(numpy.isfinite(d))):
        raise NumericalError("Truncated normal moments underflow for some posterior draws")
    return price_distribution(prices, "expected_xi")


@dispatch
def propagate(  # noqa: F811 # pylint: disable=C0116,E0102
    method: ExpectedXiMethod,
    chain: Chain,
    frame: MarketFrame,
    key,
    config: TaskConfig = TaskConfig(),
) -> PriceDistribution:
    return expected_xi_method(chain, frame, key, method.draws, config)
