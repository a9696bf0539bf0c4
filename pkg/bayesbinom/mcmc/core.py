# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Posterior sampler for the truncated-normal mixture model of gross returns.

Each gross return :math:`\\xi_i = 1 + R_i` is an up move with probability `p`, distributed
as N(u*, σ_u²) truncated to `(1 + r_f, ∞)`, or a down move distributed as N(d*, σ_d²)
truncated to `(0, 1 + r_f)`. With the priors

    p ~ Beta(a, b),  u* ~ U(1 + r_f, u_upper),  d* ~ U(0, 1 + r_f),
    σ_u² ~ IG(α_u, β_u),  σ_d² ~ IG(α_d, β_d),

the full conditional of `p` is an exact Beta and the other four parameters are updated
by random-walk Metropolis steps. The up block `(u*, σ_u²)` only sees up moves and the
down block `(d*, σ_d²)` only sees down moves.

Observations equal to `1 + r_f` are classified as up moves.
"""

import warnings
from functools import partial
from typing import NamedTuple, Optional

import numpy
from jax import jit
from jax import numpy as np
from jax import random
from jax.lax import scan

from bayesbinom.distributions import (
    inverse_gamma_logpdf,
    lower_component,
    sample_beta,
    truncnorm_logpdf,
    upper_component,
)
from bayesbinom.utils import DegenerateWindowError, Float, JaxArray

# Metropolis-updated parameters, in the order they are swept
PARAMETERS = ("u_star", "d_star", "sigma2_u", "sigma2_d")

UP_BLOCK = ("u_star", "sigma2_u")
DOWN_BLOCK = ("d_star", "sigma2_d")

# Smallest variance used when a class has fewer than two observations
VARIANCE_FLOOR = 1e-8

# Initial proposal variances are this multiple of the large-sample posterior variances
PROPOSAL_SCALE = 25.0


class ReturnSeries(NamedTuple):
    """
    Ordered gross returns `ξ_i = 1 + R_i` and the per-period risk-free rate `r_f`.
    Use `return_series` to build a validated instance.
    """

    values: JaxArray
    r_f: Float = 0.0


class PriorConfig(NamedTuple):
    """
    Hyperparameters of the priors.

    a, b: Float
        Beta prior of the up-move probability `p`.

    alpha_u, beta_u: Float
        Inverse-Gamma prior of `σ_u²`.

    alpha_d, beta_d: Float
        Inverse-Gamma prior of `σ_d²`.

    u_upper: Float
        Upper end of the uniform prior of `u*` (lower end `1 + r_f`).

    See `default_prior` for hyperparameters adapted to the scale of the data.
    """

    a: Float = 1.0
    b: Float = 1.0
    alpha_u: Float = 2.0
    beta_u: Float = 1.0
    alpha_d: Float = 2.0
    beta_d: Float = 1.0
    u_upper: Float = 2.0


class ThetaSample(NamedTuple):
    """
    One draw `(u*, d*, σ_u², σ_d², p)` of the mixture parameters. The same structure
    with array fields stores a whole chain.
    """

    u_star: Float
    d_star: Float
    sigma2_u: Float
    sigma2_d: Float
    p: Float


#  Data and configuration
#  ======================


def up_mask(values, r_f):
    return values >= 1 + r_f


def return_series(values, r_f=0.0, u_upper=None):
    """
    Validates and wraps gross returns into a `ReturnSeries`.

    Raises `ValueError` for non-finite or non-positive values, or values at or above
    `u_upper` (when given). Warns when a value equals `1 + r_f`, since such ties are
    counted as up moves.
    """
    values = numpy.asarray(values, dtype=numpy.float64).ravel()
    r_f = float(r_f)
    if not numpy.all(numpy.isfinite(values)):
        raise ValueError("Gross returns must be finite")
    if numpy.any(values <= 0):
        raise ValueError(f"Gross returns must be positive (got {values[values <= 0][0]})")
    if not r_f > -1:
        raise ValueError(f"The per-period rate must exceed -1 (got {r_f})")
    if u_upper is not None and numpy.any(values >= u_upper):
        raise ValueError(
            f"Gross return {values.max()} is not below the prior upper bound u_upper={u_upper}"
        )
    ties = int(numpy.sum(values == 1 + r_f))
    if ties:
        warnings.warn(f"{ties} return(s) equal to 1 + r_f are counted as up moves")
    return ReturnSeries(values, r_f)


def split_moves(data: ReturnSeries):
    """
    Returns the host arrays of up and down moves of `data`.
    """
    values = numpy.asarray(data.values)
    up = up_mask(values, data.r_f)
    return values[up], values[~up]


def check_window(data: ReturnSeries):
    ups, downs = split_moves(data)
    if len(ups) == 0 or len(downs) == 0:
        raise DegenerateWindowError(
            f"degenerate window: {len(ups)} up and {len(downs)} down moves, "
            "both branches need at least one observation"
        )
    return ups, downs


def check_prior(prior: PriorConfig, r_f=0.0):
    for name, value in prior._asdict().items():
        if name != "u_upper" and not value > 0:
            raise ValueError(f"Prior hyperparameter `{name}` must be positive (got {value})")
    if not prior.u_upper > 1 + r_f:
        raise ValueError(f"u_upper={prior.u_upper} must exceed 1 + r_f = {1 + r_f}")
    return prior


def _class_stats(x):
    if len(x) == 0:
        return numpy.nan, VARIANCE_FLOOR
    var = numpy.var(x, ddof=1) if len(x) > 1 else 0.0
    return numpy.mean(x), max(float(var), VARIANCE_FLOOR)


def default_prior(data: ReturnSeries, u_upper=2.0):
    """
    Weakly informative prior adapted to the scale of `data`: `a = b = 1`,
    `α_u = α_d = 2` and `β = (α - 1)` times the sample variance of the corresponding
    class of moves, which centers each Inverse-Gamma prior on the observed variance.
    """
    ups, downs = split_moves(data)
    _, var_u = _class_stats(ups)
    _, var_d = _class_stats(downs)
    alpha = 2.0
    return PriorConfig(1.0, 1.0, alpha, (alpha - 1) * var_u, alpha, (alpha - 1) * var_d, u_upper)


def initial_state(data: ReturnSeries, prior: Optional[PriorConfig] = None):
    """
    Starting point of the sampler and initial proposal variances.

    `u*`, `σ_u²` (`d*`, `σ_d²`) start at the mean and variance of the up (down) moves,
    and `p` at the fraction of up moves. Proposal variances start at `PROPOSAL_SCALE`
    times the large-sample posterior variance of each parameter.
    """
    ups, downs = check_window(data)
    prior = default_prior(data) if prior is None else prior
    r_f = data.r_f

    u_star, var_u = _class_stats(ups)
    d_star, var_d = _class_stats(downs)
    # Ties with 1 + r_f can put the mean of up moves on the support boundary
    lower = 1 + r_f
    u_star = min(max(u_star, numpy.nextafter(lower, numpy.inf)), numpy.nextafter(prior.u_upper, 0))

    n_up, n_down = len(ups), len(downs)
    theta = ThetaSample(
        float(u_star), float(d_star), float(var_u), float(var_d), n_up / (n_up + n_down)
    )
    variances = {
        "u_star": PROPOSAL_SCALE * var_u / n_up,
        "d_star": PROPOSAL_SCALE * var_d / n_down,
        "sigma2_u": PROPOSAL_SCALE * 2 * var_u**2 / n_up,
        "sigma2_d": PROPOSAL_SCALE * 2 * var_d**2 / n_down,
    }
    return theta, variances


#  Model
#  =====


def in_support(theta: ThetaSample, r_f, u_upper=np.inf):
    """
    Whether `0 < d* < 1 + r_f < u* < u_upper` and both variances are positive.
    """
    return (
        (theta.d_star > 0)
        & (theta.d_star < 1 + r_f)
        & (theta.u_star > 1 + r_f)
        & (theta.u_star < u_upper)
        & (theta.sigma2_u > 0)
        & (theta.sigma2_d > 0)
    )


def _component_logpdfs(theta, data):
    xi = np.asarray(data.values, dtype=np.float64)
    r_f = data.r_f
    sigma_u = np.sqrt(np.where(theta.sigma2_u > 0, theta.sigma2_u, 1.0))
    sigma_d = np.sqrt(np.where(theta.sigma2_d > 0, theta.sigma2_d, 1.0))
    log_up = truncnorm_logpdf(xi, upper_component(theta.u_star, sigma_u, r_f))
    log_down = truncnorm_logpdf(xi, lower_component(theta.d_star, sigma_d, r_f))
    return xi, up_mask(xi, r_f), log_up, log_down


def log_likelihood(theta: ThetaSample, data: ReturnSeries):
    """
    Log-likelihood of the mixture,
    :math:`\\sum_i \\log [p f_u(\\xi_i) + (1 - p) f_d(\\xi_i)]`.

    Returns `-inf` when `theta` violates the support ordering.
    """
    _, up, log_up, log_down = _component_logpdfs(theta, data)
    p = theta.p
    terms = np.where(up, np.log(p) + log_up, np.log1p(-p) + log_down)
    valid = in_support(theta, data.r_f) & (p >= 0) & (p <= 1)
    return np.where(valid, np.sum(terms), -np.inf)


def up_block_log_posterior(theta: ThetaSample, data: ReturnSeries, prior: PriorConfig):
    """
    Unnormalized log full conditional of `(u*, σ_u²)`.
    """
    _, up, log_up, _ = _component_logpdfs(theta, data)
    r_f = data.r_f
    valid = (theta.u_star > 1 + r_f) & (theta.u_star < prior.u_upper) & (theta.sigma2_u > 0)
    value = inverse_gamma_logpdf(theta.sigma2_u, prior.alpha_u, prior.beta_u)
    value = value + np.sum(np.where(up, log_up, 0.0))
    return np.where(valid, value, -np.inf)


def down_block_log_posterior(theta: ThetaSample, data: ReturnSeries, prior: PriorConfig):
    """
    Unnormalized log full conditional of `(d*, σ_d²)`.
    """
    _, up, _, log_down = _component_logpdfs(theta, data)
    r_f = data.r_f
    valid = (theta.d_star > 0) & (theta.d_star < 1 + r_f) & (theta.sigma2_d > 0)
    value = inverse_gamma_logpdf(theta.sigma2_d, prior.alpha_d, prior.beta_d)
    value = value + np.sum(np.where(up, 0.0, log_down))
    return np.where(valid, value, -np.inf)


def block_log_posterior(param_id: str, theta, data, prior):
    if param_id in UP_BLOCK:
        return up_block_log_posterior(theta, data, prior)
    if param_id in DOWN_BLOCK:
        return down_block_log_posterior(theta, data, prior)
    raise ValueError(f"Unknown parameter {param_id!r}: expected one of {PARAMETERS}")


def acceptance_log_ratio(param_id: str, current: ThetaSample, candidate: ThetaSample, data, prior):
    """
    Log Metropolis ratio of moving from `current` to `candidate` along `param_id`.
    Proposals outside of the support give `-inf`.
    """
    log_new = block_log_posterior(param_id, candidate, data, prior)
    log_old = block_log_posterior(param_id, current, data, prior)
    return np.where(np.isneginf(log_new), -np.inf, log_new - log_old)


def sample_p(data: ReturnSeries, prior: PriorConfig, key, shape=()):
    """
    Draws `p` from its exact full conditional
    Beta(a + #{ξ_i ≥ 1 + r_f}, b + #{ξ_i < 1 + r_f}).
    """
    up = up_mask(np.asarray(data.values, dtype=np.float64), data.r_f)
    n_up = np.sum(up)
    n_down = up.size - n_up
    return sample_beta(key, prior.a + n_up, prior.b + n_down, shape)


def metropolis_step(
    param_id: str, current: ThetaSample, data, prior, proposal_variance, key
):  # pylint: disable=too-many-arguments
    """
    Random-walk Metropolis update of one of `PARAMETERS`.

    Proposes `N(current, proposal_variance)` for `param_id` and accepts with
    probability `min(1, ratio)`, where the ratio only involves the block of the
    parameter. Returns the new state and whether the proposal was accepted.
    """
    key_move, key_accept = random.split(key)
    value = getattr(current, param_id)
    step = np.sqrt(proposal_variance) * random.normal(key_move, dtype=np.float64)
    candidate = current._replace(**{param_id: value + step})
    log_ratio = acceptance_log_ratio(param_id, current, candidate, data, prior)
    accepted = np.log(random.uniform(key_accept, dtype=np.float64)) < log_ratio
    new_value = np.where(accepted, value + step, value)
    return current._replace(**{param_id: new_value}), accepted


def gibbs_sweep(state: ThetaSample, key, variances, data, prior):
    """
    One iteration of the sampler: an exact draw of `p` followed by a Metropolis
    update of each of `PARAMETERS`. `variances` is ordered as `PARAMETERS`.
    """
    keys = random.split(key, len(PARAMETERS) + 1)
    state = state._replace(p=sample_p(data, prior, keys[0]))
    flags = []
    for i, name in enumerate(PARAMETERS):
        state, accepted = metropolis_step(name, state, data, prior, variances[i], keys[i + 1])
        flags.append(accepted)
    return state, np.stack(flags)


@partial(jit, static_argnums=5)
def _run_sweeps(state, key, variances, data, prior, length):
    def body(state, i):
        state, flags = gibbs_sweep(state, random.fold_in(key, i), variances, data, prior)
        return state, (state, flags)

    state, (draws, flags) = scan(body, state, np.arange(length))
    return state, draws, flags


def build_sampler(data: ReturnSeries, prior: PriorConfig):
    """
    Returns a compiled function `(state, key, variances, length) -> (state, draws, flags)`
    that runs `length` iterations of `gibbs_sweep`.

    The returns and the prior are traced arguments, so windows of the same length share
    one compilation.
    """
    data = ReturnSeries(
        np.asarray(data.values, dtype=np.float64), np.asarray(data.r_f, dtype=np.float64)
    )
    prior = PriorConfig(*(np.asarray(v, dtype=np.float64) for v in prior))

    def run(state, key, variances, length):
        state = ThetaSample(*(np.asarray(x, dtype=np.float64) for x in state))
        return _run_sweeps(state, key, np.asarray(variances, dtype=np.float64), data, prior, length)

    return run


