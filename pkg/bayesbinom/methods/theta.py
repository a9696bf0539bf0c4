# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
θ method: the price conditional on each posterior draw of the mixture parameters.

For each of `draws` parameter vectors θ_i taken uniformly from the chain, `inner`
tree parameterizations ξ are drawn from f(ξ | θ_i) and priced. The average price
estimates E_{ξ|θ_i}[P(ξ)], and these per-θ averages form the distribution of the
risk-neutral price given the data.
"""

from jax import jit, vmap
from jax import random

from bayesbinom.mcmc.sampler import Chain
from bayesbinom.methods.core import (
    PriceDistribution,
    PropagationMethod,
    chain_arrays,
    check_count,
    check_rates,
    pick_theta,
    price_distribution,
    sample_xi,
)
from bayesbinom.methods.utils import TaskConfig, run_tasks, sample_keys
from bayesbinom.trees import MarketFrame, build_pricer
from bayesbinom.utils import dispatch, shifted_mean


class ThetaMethod(PropagationMethod):
    """
    Parameters
    ----------

    draws: int = 5000
        Number of parameter vectors θ drawn from the chain.

    inner: int = 100
        Number of trees priced per θ.
    """

    tag = "theta"

    def __init__(self, draws: int = 5000, inner: int = 100, **kwargs):
        super().__init__(**kwargs)
        self.draws = check_count(draws, "draws")
        self.inner = check_count(inner, "inner")


def theta_method(
    chain: Chain,
    frame: MarketFrame,
    draws: int = 5000,
    inner: int = 100,
    key=None,
    config: TaskConfig = TaskConfig(),
):  # pylint: disable=too-many-arguments
    draws = check_count(draws, "draws")
    inner = check_count(inner, "inner")
    check_rates(chain, frame)
    key = random.PRNGKey(0) if key is None else key

    samples = chain_arrays(chain)
    pricer = build_pricer(frame)
    r_f = frame.r_f

    def conditional_price(k):
        key_pick, key_xi = random.split(k)
        theta = pick_theta(key_pick, samples)
        u, d = sample_xi(key_xi, theta, r_f, (inner,))
        return shifted_mean(pricer(u, d))

    @jit
    def evaluate(indices):
        return vmap(conditional_price)(sample_keys(key, indices))

    return price_distribution(run_tasks(evaluate, draws, config), "theta")


@dispatch
def propagate(  # noqa: F811 # pylint: disable=C0116,E0102
    method: ThetaMethod,
    chain: Chain,
    frame: MarketFrame,
    key,
    config: TaskConfig = TaskConfig(),
) -> PriceDistribution:
    return theta_method(chain, frame, method.draws, method.inner, key, config)
