import numpy
import pytest
from scipy import integrate, stats

from bayesbinom.utility import (
    UtilitySpec,
    atm_call_price,
    empirical_model,
    expected_utility,
    gamma_prior_model,
    optimal_quote,
    price_std,
    scalar_price_model,
)

QUADRATIC = UtilitySpec()


@pytest.fixture(scope="module")
def model():
    return gamma_prior_model(2.0, 1.0)


def prior_mean_price():
    f = lambda t: float(atm_call_price(t)) * stats.gamma(2.0).pdf(t)  # noqa: E731
    return integrate.quad(f, 0, numpy.inf)[0]


def test_gamma_prior_example(model):
    quote, (quotes, curve) = optimal_quote(model, QUADRATIC)
    assert quote == pytest.approx(0.59, abs=0.02)
    assert len(quotes) == len(curve) == 1001
    assert curve.max() == pytest.approx(expected_utility(quote, model, QUADRATIC), rel=1e-12)

    assert float(atm_call_price(2.0)) == pytest.approx(0.6827, abs=1e-4)
    assert float(atm_call_price(1.0)) == pytest.approx(0.3829, abs=1e-4)
    # P(mode) < optimal quote < P(prior mean)
    assert float(atm_call_price(1.0)) < quote < float(atm_call_price(2.0))


def test_quadratic_optimum_is_the_prior_mean(model):
    mean = prior_mean_price()
    for points in (1001, 4001):
        grid = numpy.linspace(0.0, 1.0, points)
        quote, _ = optimal_quote(model, QUADRATIC, grid)
        assert abs(quote - mean) <= grid[1] - grid[0]


def test_point_mass_prior():
    model = empirical_model(atm_call_price, [0.7])
    price = float(atm_call_price(0.7))
    quote, _ = optimal_quote(model, QUADRATIC)
    assert quote == pytest.approx(price, rel=1e-14)
    assert expected_utility(price, model, QUADRATIC) == pytest.approx(0.0, abs=1e-28)
    assert expected_utility(price + 0.1, model, QUADRATIC) == pytest.approx(-0.01)
    assert price_std(model) == 0.0


def test_zero_one():
    model = empirical_model(atm_call_price, [1.0, 1.0, 1.0, 2.0])
    util = UtilitySpec("zero_one", tolerance=1e-9)
    low, high = model.prices.min(), model.prices.max()

    quote, (_, curve) = optimal_quote(model, util, [0.5, high, low])
    assert quote == pytest.approx(low, rel=1e-14)
    assert curve.tolist() == [0.0, 0.25, 0.75]

    # Half the grid spacing by default
    quote, _ = optimal_quote(model, UtilitySpec("zero_one"))
    assert quote == pytest.approx(low, abs=(high - low) / 1000)

    with pytest.raises(ValueError):
        expected_utility(low, model, UtilitySpec("zero_one"))


def test_volatility_threshold(model):
    assert price_std(model) > 0.1

    declined = UtilitySpec("volatility_threshold", threshold=1e-3)
    _, (_, curve) = optimal_quote(model, declined)
    assert numpy.all(curve == 0.0)
    assert expected_utility(0.5, model, declined) == 0.0

    accepted = UtilitySpec("volatility_threshold", threshold=1.0)
    assert optimal_quote(model, accepted)[0] == optimal_quote(model, QUADRATIC)[0]


def test_general_utility(model):
    grid = numpy.linspace(0.0, 1.2, 1201)
    base, _ = optimal_quote(model, QUADRATIC, grid)

    util = UtilitySpec(
        "general",
        sell_probability=1.0,
        sell_utility=lambda q, p: -((q - p - 0.1) ** 2),
        buy_utility=lambda q, p: -((q - p + 0.1) ** 2),
    )
    quote, _ = optimal_quote(model, util, grid)
    assert quote == pytest.approx(base + 0.1, abs=2.5e-3)

    symmetric, _ = optimal_quote(model, util._replace(sell_probability=0.5), grid)
    assert symmetric == pytest.approx(base, abs=2.5e-3)

    # Positive affine transformations of the utility keep the optimum
    scaled = util._replace(
        sell_probability=0.5,
        sell_utility=lambda q, p: 3 * util.sell_utility(q, p) + 5,
        buy_utility=lambda q, p: 3 * util.buy_utility(q, p) + 5,
    )
    assert optimal_quote(model, scaled, grid)[0] == symmetric


def test_utility_errors(model):
    with pytest.raises(ValueError):
        expected_utility(0.5, model, UtilitySpec("linear"))
    with pytest.raises(ValueError):
        expected_utility(0.5, model, UtilitySpec(threshold=0.1))
    with pytest.raises(ValueError):
        expected_utility(0.5, model, UtilitySpec("volatility_threshold"))
    with pytest.raises(ValueError):
        expected_utility(0.5, model, UtilitySpec(sell_probability=1.5))
    with pytest.raises(ValueError):
        expected_utility(0.5, model, UtilitySpec("general"))
    with pytest.raises(ValueError):
        expected_utility(numpy.nan, model, QUADRATIC)
    with pytest.raises(ValueError):
        optimal_quote(model, QUADRATIC, [])


def test_prior_must_be_normalized():
    theta = numpy.linspace(0.0, 3.0, 301)
    with pytest.raises(ValueError, match="integrates"):
        scalar_price_model(atm_call_price, theta, stats.gamma(2.0).pdf(theta))

    theta = numpy.linspace(0.0, 40.0, 4001)
    model = scalar_price_model(atm_call_price, theta, stats.gamma(2.0).pdf(theta))
    assert model.prices.shape == theta.shape
    assert not model.is_empirical
