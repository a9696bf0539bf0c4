# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Truncated normal densities, samplers and moments.

Up moves of the underlying are modelled as a normal with location `u_star` truncated
to `(1 + r_f, ∞)`, and down moves as a normal with location `d_star` truncated to
`(0, 1 + r_f)`. Everything here is written against `jax.numpy`, so the same functions
are used eagerly by the public API and inside the compiled samplers.

All tail quantities are evaluated in log-space through `log_ndtr`, which switches to an
asymptotic expansion far in the tails where `1 - Φ(c)` underflows.
"""

from typing import NamedTuple

import jax
import numpy
from jax import numpy as np
from jax import random
from jax.lax import while_loop
from jax.scipy.special import log_ndtr, ndtr, ndtri
from jax.scipy.stats import norm

from bayesbinom.utils import Float, NumericalError, check_finite

# Beyond this many standard deviations into a tail the inverse CDF loses precision
# and the sampler switches to rejection from an exponential proposal.
TAIL_CUTOFF = 5.0

# Relative scale below which a truncated normal is treated as a point mass.
DEGENERATE_SCALE = 1e-12


class TruncatedNormal(NamedTuple):
    """
    Normal distribution with `location` and `scale` restricted to `[lower, upper]`.

    Parameters
    ----------

    location: Float
        Location of the untruncated normal (in gross-return units, e.g. `1.004`).

    scale: Float
        Standard deviation of the untruncated normal. Must be positive.

    lower: Float
        Lower truncation point (may be `-inf`).

    upper: Float
        Upper truncation point (may be `inf`).
    """

    location: Float
    scale: Float
    lower: Float = -numpy.inf
    upper: Float = numpy.inf


class TruncatedMoments(NamedTuple):
    """
    Standardized truncation points and conditional means of the up and down components.

    c0 = (1 + r_f - u*) / σ_u, a0 = -d* / σ_d, b0 = (1 + r_f - d*) / σ_d
    """

    c0: Float
    a0: Float
    b0: Float
    mean_u: Float
    mean_d: Float


def _is_concrete(*xs):
    return not any(isinstance(x, jax.core.Tracer) for x in jax.tree_util.tree_leaves(xs))


def validate(dist: TruncatedNormal):
    """
    Raises `ValueError` if `dist` does not describe a proper truncated normal.
    Only concrete (non-traced) values are checked.
    """
    if not _is_concrete(dist):
        return dist
    loc, scale, lower, upper = (numpy.asarray(v, dtype=numpy.float64) for v in dist)
    check_finite(loc, "location")
    if numpy.any(~(scale > 0)):
        raise ValueError(f"The scale of a truncated normal must be positive (got {scale})")
    if numpy.any(~(lower < upper)):
        raise ValueError(f"Invalid truncation bounds: lower={lower} must be below upper={upper}")
    return dist


def upper_component(u_star, sigma_u, r_f):
    """
    Distribution of the up move `u`: N(u*, σ_u²) truncated to `(1 + r_f, ∞)`.
    """
    return TruncatedNormal(u_star, sigma_u, 1 + r_f, np.inf)


def lower_component(d_star, sigma_d, r_f):
    """
    Distribution of the down move `d`: N(d*, σ_d²) truncated to `(0, 1 + r_f)`.
    """
    return TruncatedNormal(d_star, sigma_d, 0.0, 1 + r_f)


def log_mass(alpha, beta):
    """
    Returns `log(Φ(beta) - Φ(alpha))` for standardized bounds `alpha < beta`.
    Intervals lying in the upper tail are reflected into the lower one, where `log_ndtr`
    keeps full relative precision.
    """
    flip = alpha > 0
    lo = np.where(flip, -beta, alpha)
    hi = np.where(flip, -alpha, beta)
    log_hi = log_ndtr(hi)
    return log_hi + np.log1p(-np.exp(log_ndtr(lo) - log_hi))


def mills_ratio(c):
    """
    Tail-stable evaluation of φ(c) / (1 - Φ(c)).
    """
    return np.exp(norm.logpdf(c) - log_ndtr(-c))


def truncnorm_logpdf(x, dist: TruncatedNormal):
    """
    Log density of `dist` at `x`; `-inf` outside of `[lower, upper]`.
    """
    loc, scale, lower, upper = dist
    z = (x - loc) / scale
    logp = norm.logpdf(z) - np.log(scale) - log_mass((lower - loc) / scale, (upper - loc) / scale)
    return np.where((x >= lower) & (x <= upper), logp, -np.inf)


def truncnorm_pdf(x, dist: TruncatedNormal):
    """
    Density of `dist` at `x`: φ((x - loc) / scale) / scale normalized by the mass of the
    truncation interval, and zero outside of it.
    """
    validate(dist)
    if _is_concrete(x):
        check_finite(x, "x")
    return np.exp(truncnorm_logpdf(x, dist))


def _tail_sample(key, lo, hi, done):
    # Draws from N(0, 1) restricted to (lo, hi) with lo >= TAIL_CUTOFF, by rejection from
    # a shifted exponential (or a uniform proposal when the interval is narrower than the
    # exponential's scale).
    alpha = (lo + np.sqrt(lo**2 + 4)) / 2
    narrow = (hi - lo) < 1 / alpha

    def keep_going(carry):
        return np.any(~carry[2])

    def propose(carry):
        key, z, ok = carry
        key, k1, k2 = random.split(key, 3)
        v = random.uniform(k1, z.shape, dtype=z.dtype)
        z_new = np.where(narrow, lo + (hi - lo) * v, lo - np.log1p(-v) / alpha)
        log_accept = np.where(narrow, -(z_new**2 - lo**2) / 2, -((z_new - alpha) ** 2) / 2)
        w = random.uniform(k2, z.shape, dtype=z.dtype)
        accept = (np.log(w) <= log_accept) & (z_new > lo) & (z_new < hi)
        z = np.where(ok, z, z_new)
        return key, z, ok | accept

    _, z, _ = while_loop(keep_going, propose, (key, np.zeros_like(lo), done))
    return z


def standard_truncated_sample(key, alpha, beta, shape=()):
    """
    Draws from a standard normal restricted to `(alpha, beta)`.

    The inverse CDF is applied on the truncated uniform range. Intervals in the upper
    tail are reflected to the lower tail first, and intervals more than `TAIL_CUTOFF`
    standard deviations into the tail are sampled by one-sided rejection.
    """
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), shape)
    beta = np.broadcast_to(np.asarray(beta, dtype=np.float64), shape)

    flip = alpha > 0
    a = np.where(flip, -beta, alpha)
    b = np.where(flip, -alpha, beta)
    in_tail = b < -TAIL_CUTOFF

    key_icdf, key_tail = random.split(key)
    pa = ndtr(a)
    pb = ndtr(b)
    w = random.uniform(key_icdf, shape, dtype=np.float64)
    z_icdf = ndtri(pa + w * (pb - pa))
    z_tail = -_tail_sample(key_tail, np.where(in_tail, -b, TAIL_CUTOFF), -a, ~in_tail)

    z = np.where(in_tail, z_tail, z_icdf)
    z = np.clip(z, np.nextafter(a, b), np.nextafter(b, a))
    return np.where(flip, -z, z)


def sample_truncated(key, dist: TruncatedNormal, shape=()):
    """
    Compiled-path sampler (no input checks). See `truncnorm_sample`.
    """
    loc, scale, lower, upper = (np.asarray(v, dtype=np.float64) for v in dist)
    z = standard_truncated_sample(key, (lower - loc) / scale, (upper - loc) / scale, shape)
    x = loc + scale * z
    point_mass = scale <= DEGENERATE_SCALE * np.maximum(1.0, np.abs(loc))
    x = np.where(point_mass, loc, x)
    return np.clip(x, np.nextafter(lower, upper), np.nextafter(upper, lower))


def truncnorm_sample(dist: TruncatedNormal, key, shape=()):
    """
    Draws from `dist` using the stream `key`. Draws lie strictly inside
    `(lower, upper)` and are reproducible for a fixed key.

    When the scale is negligible relative to the location the distribution is a point
    mass and `location` is returned.
    """
    validate(dist)
    return sample_truncated(key, dist, shape)


def mean_up(u_star, sigma_u, r_f):
    """
    Compiled-path version of `truncnorm_mean_u` (no input checks).
    """
    c0 = (1 + r_f - u_star) / sigma_u
    return u_star + sigma_u * mills_ratio(c0)


def mean_down(d_star, sigma_d, r_f):
    """
    Compiled-path version of `truncnorm_mean_d` (no input checks).
    """
    a0 = -d_star / sigma_d
    b0 = (1 + r_f - d_star) / sigma_d
    logz = log_mass(a0, b0)
    ratio = np.exp(norm.logpdf(b0) - logz) - np.exp(norm.logpdf(a0) - logz)
    return d_star - sigma_d * ratio


def _check_scale(sigma, name):
    if _is_concrete(sigma) and numpy.any(~(numpy.asarray(sigma) > 0)):
        raise ValueError(f"`{name}` must be positive (got {sigma})")


def truncnorm_mean_u(u_star, sigma_u, r_f):
    """
    Mean of the up move, E(u) = u* + σ_u φ(c0) / (1 - Φ(c0)) with c0 = (1 + r_f - u*) / σ_u.
    """
    _check_scale(sigma_u, "sigma_u")
    return mean_up(u_star, sigma_u, r_f)


def truncnorm_mean_d(d_star, sigma_d, r_f):
    """
    Mean of the down move,
    E(d) = d* - σ_d (φ(b0) - φ(a0)) / (Φ(b0) - Φ(a0)) with a0 = -d* / σ_d and
    b0 = (1 + r_f - d*) / σ_d.

    Raises `NumericalError` when the distribution has no representable mass on `(0, 1 + r_f)`.
    """
    _check_scale(sigma_d, "sigma_d")
    result = mean_down(d_star, sigma_d, r_f)
    if _is_concrete(result) and not numpy.all(numpy.isfinite(numpy.asarray(result))):
        raise NumericalError("The truncated normal mass vanishes on (0, 1 + r_f)")
    return result


def moments(u_star, sigma_u, d_star, sigma_d, r_f):
    """
    Returns the `TruncatedMoments` of a parameter draw.
    """
    return TruncatedMoments(
        (1 + r_f - u_star) / sigma_u,
        -d_star / sigma_d,
        (1 + r_f - d_star) / sigma_d,
        mean_up(u_star, sigma_u, r_f),
        mean_down(d_star, sigma_d, r_f),
    )


def truncnorm_moments(u_star, sigma_u, d_star, sigma_d, r_f):
    """
    Checked version of `moments`, see `truncnorm_mean_u` and `truncnorm_mean_d`.
    """
    _check_scale(sigma_u, "sigma_u")
    _check_scale(sigma_d, "sigma_d")
    result = moments(u_star, sigma_u, d_star, sigma_d, r_f)
    if _is_concrete(result) and not numpy.all(numpy.isfinite(numpy.asarray(result.mean_d))):
        raise NumericalError("The truncated normal mass vanishes on (0, 1 + r_f)")
    return result
