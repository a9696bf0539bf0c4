# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Expected-utility selection of a quoted price.

A market maker quotes `P(θ^M)` while the value of the option is `P(θ)` for an unknown
parameter θ with prior (or posterior) π. The best quote maximizes
:math:`E_\\pi[U(P(\\theta^M), P(\\theta))]`, where with probability `p` the quote is a
sale and otherwise a purchase, :math:`U = p U_S + (1 - p) U_B`.

The expectation is a Simpson quadrature when π is a density on a grid of θ values, and
a sample average when π is represented by draws (for instance posterior samples).
"""

from typing import Callable, NamedTuple, Optional

import numpy
from scipy.integrate import simpson

from bayesbinom.distributions import gamma_logpdf
from bayesbinom.trees import black_scholes_call

UTILITY_KINDS = ("quadratic", "zero_one", "volatility_threshold", "general")

# Allowed deviation from one of the integral of a gridded prior
PRIOR_MASS_TOLERANCE = 1e-6


class UtilitySpec(NamedTuple):
    """
    kind: str
        One of `UTILITY_KINDS`.

        - `quadratic`: :math:`U = -(quote - P)^2`.
        - `zero_one`: one when `|quote - P| <= tolerance`, zero otherwise.
        - `volatility_threshold`: quadratic utility when the standard deviation of `P`
          under the prior is at most `threshold`, and zero for every quote otherwise.
        - `general`: :math:`p U_S(quote, P) + (1 - p) U_B(quote, P)` from the
          user-provided `sell_utility` and `buy_utility`.

    threshold: Optional[float]
        Required by, and only allowed for, `volatility_threshold`.

    sell_probability: float
        Probability `p` that the quote is a sale.

    tolerance: Optional[float]
        Width of the `zero_one` band. `optimal_quote` defaults it to half the spacing of
        its search grid.

    sell_utility, buy_utility: Optional[Callable]
        Vectorized functions `(quote, price) -> utility` for `general`.
    """

    kind: str = "quadratic"
    threshold: Optional[float] = None
    sell_probability: float = 0.5
    tolerance: Optional[float] = None
    sell_utility: Optional[Callable] = None
    buy_utility: Optional[Callable] = None


class ScalarPriceModel(NamedTuple):
    """
    Pricing map `price_fn` of a scalar parameter together with its prior.

    theta: numpy.ndarray
        Quadrature nodes, or prior draws when `density` is `None`.

    density: Optional[numpy.ndarray]
        Prior density at the nodes, normalized to integrate to one.

    prices: numpy.ndarray
        `price_fn(theta)`.
    """

    price_fn: Callable
    theta: numpy.ndarray
    density: Optional[numpy.ndarray]
    prices: numpy.ndarray

    @property
    def is_empirical(self):
        return self.density is None


def check_utility(util: UtilitySpec):
    if util.kind not in UTILITY_KINDS:
        raise ValueError(f"Unknown utility {util.kind!r}: expected one of {UTILITY_KINDS}")
    if (util.kind == "volatility_threshold") != (util.threshold is not None):
        raise ValueError("A threshold is required by, and only by, volatility_threshold")
    if not 0 <= util.sell_probability <= 1:
        raise ValueError(f"The sell probability must lie in [0, 1] (got {util.sell_probability})")
    if util.kind == "general" and (util.sell_utility is None or util.buy_utility is None):
        raise ValueError("The general utility needs both sell_utility and buy_utility")
    if util.tolerance is not None and not util.tolerance > 0:
        raise ValueError(f"The zero_one tolerance must be positive (got {util.tolerance})")
    return util


def _prices(price_fn, theta):
    prices = numpy.asarray(price_fn(theta), dtype=numpy.float64)
    if prices.shape != theta.shape or not numpy.all(numpy.isfinite(prices)):
        raise ValueError("The pricing function must be finite on every prior node")
    return prices


def scalar_price_model(price_fn, theta, density=None):
    """
    Builds a `ScalarPriceModel`. With a `density`, `theta` must be an increasing grid
    over which the density integrates to one within `PRIOR_MASS_TOLERANCE`.
    """
    theta = numpy.asarray(theta, dtype=numpy.float64).ravel()
    if theta.size == 0:
        raise ValueError("A price model needs at least one prior node")
    if density is not None:
        density = numpy.asarray(density, dtype=numpy.float64).ravel()
        if density.shape != theta.shape or theta.size < 3:
            raise ValueError("A prior density needs one value per node and at least three nodes")
        if numpy.any(numpy.diff(theta) <= 0) or numpy.any(density < 0):
            raise ValueError("Prior nodes must increase and the density must be non-negative")
        mass = simpson(density, x=theta)
        if abs(mass - 1) > PRIOR_MASS_TOLERANCE:
            raise ValueError(f"The prior integrates to {mass} on its grid instead of 1")
        density = density / mass
    return ScalarPriceModel(price_fn, theta, density, _prices(price_fn, theta))


def atm_call_price(theta):
    """
    Black-Scholes value of an at-the-money call with unit strike, zero rate and unit
    maturity as a function of the volatility: `Φ(θ / 2) - Φ(-θ / 2)`.
    """
    return numpy.asarray(black_scholes_call(1.0, 1.0, numpy.asarray(theta, dtype=numpy.float64)))


def gamma_prior_model(shape=2.0, rate=1.0, price_fn=atm_call_price, theta_max=30.0, points=3001):
    """
    Price model with a Ga(shape, rate) prior discretized on `points` equally spaced
    nodes over `[0, theta_max]`.
    """
    theta = numpy.linspace(0.0, theta_max, int(points))
    density = numpy.exp(numpy.asarray(gamma_logpdf(theta, shape, rate)))
    return scalar_price_model(price_fn, theta, density)


def empirical_model(price_fn, samples):
    """
    Price model whose prior is represented by draws, such as posterior samples.
    """
    return scalar_price_model(price_fn, samples)


def _expectation(model: ScalarPriceModel, values):
    # `values` has the prior nodes along its last axis
    if model.is_empirical:
        return numpy.mean(values, axis=-1)
    return simpson(values * model.density, x=model.theta, axis=-1)


def price_std(model: ScalarPriceModel):
    """
    Standard deviation of `P(θ)` under the prior of `model`.
    """
    mean = _expectation(model, model.prices)
    return float(numpy.sqrt(max(_expectation(model, (model.prices - mean) ** 2), 0.0)))


def _utility(util: UtilitySpec, quotes, prices):
    if util.kind in ("quadratic", "volatility_threshold"):
        return -((quotes - prices) ** 2)
    if util.kind == "zero_one":
        return (numpy.abs(quotes - prices) <= util.tolerance).astype(numpy.float64)
    p = util.sell_probability
    return p * util.sell_utility(quotes, prices) + (1 - p) * util.buy_utility(quotes, prices)


def _curve(quotes, model: ScalarPriceModel, util: UtilitySpec):
    if util.kind == "zero_one" and util.tolerance is None:
        raise ValueError("The zero_one utility needs a tolerance")
    if util.kind == "volatility_threshold" and price_std(model) > util.threshold:
        return numpy.zeros(len(quotes))
    values = _utility(util, quotes[:, None], model.prices[None, :])
    return _expectation(model, values)


def expected_utility(quote, model: ScalarPriceModel, util: UtilitySpec):
    """
    Expected utility of quoting `quote` under the prior of `model`.
    """
    check_utility(util)
    quote = float(quote)
    if not numpy.isfinite(quote):
        raise ValueError(f"The quote must be finite (got {quote})")
    return float(_curve(numpy.array([quote]), model, util)[0])


def optimal_quote(model: ScalarPriceModel, util: UtilitySpec, grid=None):
    """
    Quote of highest expected utility on `grid` (by default 1001 points spanning the
    range of prices over the prior nodes).

    Returns the optimal quote and the `(quotes, expected utilities)` curve.
    """
    check_utility(util)
    if grid is None:
        grid = numpy.linspace(model.prices.min(), model.prices.max(), 1001)
    quotes = numpy.asarray(grid, dtype=numpy.float64).ravel()
    if quotes.size == 0:
        raise ValueError("The search grid is empty")
    if not numpy.all(numpy.isfinite(quotes)):
        raise ValueError("The search grid must be finite")
    if util.kind == "zero_one" and util.tolerance is None:
        spacing = numpy.min(numpy.diff(numpy.unique(quotes))) if quotes.size > 1 else 1.0
        util = util._replace(tolerance=spacing / 2)

    curve = _curve(quotes, model, util)
    best = int(numpy.argmax(curve))
    return float(quotes[best]), (quotes, curve)
