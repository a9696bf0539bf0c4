# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Cox-Ross-Rubinstein recombinant binomial trees.

Given one realized parameterization `ξ = (u, d)` the underlying moves as
:math:`S_{t+1} = S_t \\xi` and a European claim is valued as the discounted expectation of
its payoff under the risk-neutral up probability :math:`q = ((1 + r_f) - d) / (u - d)`.

European payoffs only depend on the number of up moves, so prices are computed as a
closed binomial sum with log-space weights, in `O(T)` per tree. Backward induction is
provided behind the same interface for payoffs that need it.
"""

from functools import partial
from typing import NamedTuple

import numpy
from jax import jit
from jax import numpy as np
from jax import vmap
from jax.lax import fori_loop
from jax.scipy.special import gammaln, ndtr, xlogy

from bayesbinom.utils import Float

OPTION_KINDS = ("european_call", "european_put")

# Smallest admissible spread `u - d`, relative to `1 + r_f`.
SPREAD_TOLERANCE = 1e-14


class XiPair(NamedTuple):
    """
    One realized tree parameterization.

    u: Float
        Gross up return, above `1 + r_f`.

    d: Float
        Gross down return, in `(0, 1 + r_f)`.
    """

    u: Float
    d: Float


class MarketFrame(NamedTuple):
    """
    Market inputs of a valuation.

    spot: Float
        Current price of the underlying.

    strike: Float
        Strike price of the option.

    periods: int
        Number of tree steps until maturity.

    r_f: Float
        Risk-free rate per tree step.

    option_kind: str
        One of `OPTION_KINDS`.
    """

    spot: Float
    strike: Float
    periods: int
    r_f: Float = 0.0
    option_kind: str = "european_call"


def check_frame(frame: MarketFrame):
    spot, strike, periods, r_f, kind = frame
    if not spot > 0:
        raise ValueError(f"The spot price must be positive (got {spot})")
    if not strike > 0:
        raise ValueError(f"The strike must be positive (got {strike})")
    if int(periods) != periods or periods < 1:
        raise ValueError(f"The number of periods must be a positive integer (got {periods})")
    if not r_f > -1:
        raise ValueError(f"The per-period rate must exceed -1 (got {r_f})")
    if kind not in OPTION_KINDS:
        raise ValueError(f"Unknown option kind {kind!r}: supported options are {OPTION_KINDS}")
    return frame


def check_xi(xi: XiPair, r_f):
    """
    Raises `ValueError` unless `0 < d < 1 + r_f < u` and the tree is not degenerate.
    """
    u, d = float(xi.u), float(xi.d)
    if not (0 < d < 1 + r_f < u):
        raise ValueError(f"No-arbitrage ordering 0 < d < 1 + r_f < u violated by (u={u}, d={d})")
    if u - d <= SPREAD_TOLERANCE * (1 + r_f):
        raise ValueError(f"Degenerate tree: u - d = {u - d} is below numerical tolerance")
    return xi


def q_measure(u, d, r_f):
    return ((1 + r_f) - d) / (u - d)


def risk_neutral_q(xi: XiPair, r_f):
    """
    Returns the risk-neutral up probability `q = ((1 + r_f) - d) / (u - d)`, the
    unique probability making the discounted underlying a martingale.
    """
    check_xi(xi, r_f)
    return q_measure(xi.u, xi.d, r_f)


def payoff_function(kind):
    if kind == "european_call":
        return lambda s, k: np.maximum(s - k, 0.0)
    if kind == "european_put":
        return lambda s, k: np.maximum(k - s, 0.0)
    raise ValueError(f"Unknown option kind {kind!r}: supported options are {OPTION_KINDS}")


def _terminal_values(u, d, frame):
    T = frame.periods
    k = np.arange(T + 1)
    log_s = np.log(frame.spot) + k * np.log(u) + (T - k) * np.log(d)
    return payoff_function(frame.option_kind)(np.exp(log_s), frame.strike)


def _closed_form(u, d, frame):
    # Log space: on long trees `S u^k d^(T-k)` overflows where its weight underflows
    T = frame.periods
    q = q_measure(u, d, frame.r_f)
    k = np.arange(T + 1)
    log_s = np.log(frame.spot) + k * np.log(u) + (T - k) * np.log(d)
    log_w = gammaln(T + 1.0) - gammaln(k + 1.0) - gammaln(T - k + 1.0)
    log_w = log_w + xlogy(k, q) + xlogy(T - k, 1 - q) - T * np.log1p(frame.r_f)
    stock = np.exp(log_w + log_s)
    cash = frame.strike * np.exp(log_w)
    if frame.option_kind == "european_call":
        values = np.where(log_s > np.log(frame.strike), stock - cash, 0.0)
    else:
        values = np.where(log_s < np.log(frame.strike), cash - stock, 0.0)
    return np.sum(values)


def _backward_induction(u, d, frame):
    T = frame.periods
    q = q_measure(u, d, frame.r_f)
    growth = 1 + frame.r_f
    values = _terminal_values(u, d, frame)

    def step(_, v):
        # Node `k` counts up moves, so its up child is node `k + 1`.
        return (q * np.roll(v, -1) + (1 - q) * v) / growth

    return fori_loop(0, T, step, values)[0]


def build_pricer(frame: MarketFrame, backward=False):
    """
    Returns a compiled function `(u, d) -> prices` that values the option described by
    `frame` on arrays of tree parameterizations. Inputs are assumed to satisfy the
    no-arbitrage ordering.
    """
    check_frame(frame)
    frame = frame._replace(periods=int(frame.periods))
    kernel = _backward_induction if backward else _closed_form
    price = partial(kernel, frame=frame)

    @jit
    def evaluate(u, d):
        u, d = np.broadcast_arrays(np.asarray(u, dtype=np.float64), np.asarray(d, dtype=np.float64))
        return vmap(price)(u.ravel(), d.ravel()).reshape(u.shape)

    return evaluate


def price_european(xi: XiPair, frame: MarketFrame):
    """
    Value of a European option on a recombinant tree:
    :math:`(1 + r_f)^{-T} \\sum_k \\binom{T}{k} q^k (1 - q)^{T - k} f(S u^k d^{T - k})`,
    where `f` is the payoff.
    """
    check_frame(frame)
    check_xi(xi, frame.r_f)
    return float(build_pricer(frame)(xi.u, xi.d))


def price_backward(xi: XiPair, frame: MarketFrame):
    """
    Same valuation as `price_european`, computed by backward induction through the tree.
    """
    check_frame(frame)
    check_xi(xi, frame.r_f)
    return float(build_pricer(frame, backward=True)(xi.u, xi.d))


def black_scholes_call(spot, strike, sigma, tau=1.0, rate=0.0):
    """
    Black-Scholes value of a European call. Zero volatility (or maturity) reduces to
    the discounted intrinsic value.
    """
    spot, strike, sigma = (np.asarray(x, dtype=np.float64) for x in (spot, strike, sigma))
    vol = sigma * numpy.sqrt(tau)
    positive = vol > 0
    safe = np.where(positive, vol, 1.0)
    d1 = (np.log(spot / strike) + rate * tau) / safe + safe / 2
    d2 = d1 - safe
    discounted = strike * numpy.exp(-rate * tau)
    value = spot * ndtr(d1) - discounted * ndtr(d2)
    return np.where(positive, value, np.maximum(spot - discounted, 0.0))
