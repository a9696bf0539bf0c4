import itertools

import numpy
import pytest
from scipy.stats import norm

from bayesbinom.trees import (
    MarketFrame,
    XiPair,
    black_scholes_call,
    build_pricer,
    price_backward,
    price_european,
    risk_neutral_q,
)

rng = numpy.random.default_rng(2022)


def random_tree():
    r_f = rng.uniform(0.0, 0.01)
    u = 1 + r_f + rng.uniform(0.005, 0.2)
    d = rng.uniform(0.7, 1 + r_f - 0.005)
    return XiPair(u, d), r_f


def enumerate_paths(xi, frame):
    # Sums the discounted payoff over every up/down path of the tree
    u, d = xi
    q = ((1 + frame.r_f) - d) / (u - d)
    T = frame.periods
    total = 0.0
    for path in itertools.product((True, False), repeat=T):
        k = sum(path)
        spot = frame.spot * u**k * d ** (T - k)
        if frame.option_kind == "european_call":
            payoff = max(spot - frame.strike, 0.0)
        else:
            payoff = max(frame.strike - spot, 0.0)
        total += q**k * (1 - q) ** (T - k) * payoff
    return total / (1 + frame.r_f) ** T


def test_risk_neutral_q():
    assert float(risk_neutral_q(XiPair(1.2, 0.8), 0.0)) == pytest.approx(0.5, rel=1e-15)

    q = float(risk_neutral_q(XiPair(1.1, 0.9), 0.01))
    assert q == pytest.approx(0.55, rel=1e-14)
    assert q * 1.1 + (1 - q) * 0.9 == pytest.approx(1.01, rel=1e-14)

    for _ in range(100):
        xi, r_f = random_tree()
        q = float(risk_neutral_q(xi, r_f))
        assert 0 < q < 1
        assert q * xi.u + (1 - q) * xi.d == pytest.approx(1 + r_f, rel=1e-12)

    with pytest.raises(ValueError):
        risk_neutral_q(XiPair(1.1, 1.0), 0.0)
    with pytest.raises(ValueError):
        risk_neutral_q(XiPair(1.0, 0.9), 0.01)
    with pytest.raises(ValueError, match="Degenerate"):
        risk_neutral_q(XiPair(1 + 2.0**-52, 1 - 2.0**-53), 0.0)


def test_price_european():
    frame = MarketFrame(100.0, 100.0, 1, 0.0)
    assert price_european(XiPair(1.2, 0.8), frame) == pytest.approx(10.0, rel=1e-14)

    # Strike beyond the highest terminal node S u^T = 172.8
    frame = MarketFrame(100.0, 180.0, 3, 0.0)
    assert price_european(XiPair(1.2, 0.8), frame) == 0.0

    with pytest.raises(ValueError):
        price_european(XiPair(1.2, 0.8), MarketFrame(100.0, 100.0, 0))
    with pytest.raises(ValueError):
        price_european(XiPair(1.2, 0.8), MarketFrame(-1.0, 100.0, 1))
    with pytest.raises(ValueError):
        price_european(XiPair(1.2, 0.8), MarketFrame(100.0, 100.0, 1, 0.0, "american_call"))


@pytest.mark.parametrize("periods", [1, 2, 5, 10, 12])
@pytest.mark.parametrize("kind", ["european_call", "european_put"])
def test_matches_path_enumeration(periods, kind):
    # 20 random trees per case, 200 in total
    for _ in range(20):
        xi, r_f = random_tree()
        spot = rng.uniform(50, 150)
        frame = MarketFrame(spot, rng.uniform(50, 150), periods, r_f, kind)
        expected = enumerate_paths(xi, frame)
        assert price_european(xi, frame) == pytest.approx(expected, rel=1e-12, abs=1e-12 * spot)
        assert price_backward(xi, frame) == pytest.approx(expected, rel=1e-12, abs=1e-12 * spot)


def test_put_call_parity():
    for _ in range(50):
        xi, r_f = random_tree()
        periods = int(rng.integers(1, 200))
        spot, strike = rng.uniform(50, 150, 2)
        call = price_european(xi, MarketFrame(spot, strike, periods, r_f, "european_call"))
        put = price_european(xi, MarketFrame(spot, strike, periods, r_f, "european_put"))
        parity = spot - strike / (1 + r_f) ** periods
        assert call - put == pytest.approx(parity, rel=1e-10, abs=1e-10 * spot)


def test_monotonicity():
    pricer = build_pricer(MarketFrame(100.0, 100.0, 30, 0.001))
    u = numpy.linspace(1.002, 1.2, 50)
    prices = numpy.asarray(pricer(u, 0.95))
    assert numpy.all(numpy.diff(prices) >= -1e-12)

    strikes = numpy.linspace(50, 150, 50)
    prices = [price_european(XiPair(1.05, 0.96), MarketFrame(100.0, k, 30, 0.001)) for k in strikes]
    assert numpy.all(numpy.diff(prices) <= 1e-12)

    for r_f in (0.0, 0.001):
        prices = [
            price_european(XiPair(1.05, 0.96), MarketFrame(100.0, 100.0, t, r_f))
            for t in range(1, 40)
        ]
        assert numpy.all(numpy.diff(prices) >= -1e-12)


def test_long_trees():
    # S u^T overflows without log-space weights
    frame = MarketFrame(100.0, 100.0, 20_000, 0.0001)
    call = price_european(XiPair(1.05, 0.95), frame)
    put = price_european(XiPair(1.05, 0.95), frame._replace(option_kind="european_put"))
    assert numpy.isfinite(call) and numpy.isfinite(put)
    assert 0 <= call <= 100.0
    assert call - put == pytest.approx(100.0 - 100.0 / 1.0001**20_000, rel=1e-8)

    # CRR parameterization converges to Black-Scholes
    sigma, rate, periods = 0.2, 0.05, 20_000
    dt = 1.0 / periods
    u = numpy.exp(sigma * numpy.sqrt(dt))
    frame = MarketFrame(100.0, 100.0, periods, numpy.expm1(rate * dt))
    expected = float(black_scholes_call(100.0, 100.0, sigma, 1.0, rate))
    assert price_european(XiPair(u, 1 / u), frame) == pytest.approx(expected, abs=5e-3)


def test_pricer_broadcasts():
    frame = MarketFrame(100.0, 100.0, 10, 0.001)
    pricer = build_pricer(frame)
    u = numpy.array([[1.05, 1.06], [1.07, 1.08]])
    prices = numpy.asarray(pricer(u, 0.97))
    assert prices.shape == (2, 2)
    assert prices[1, 0] == pytest.approx(price_european(XiPair(1.07, 0.97), frame), rel=1e-14)


def test_black_scholes_call():
    theta = numpy.array([0.5, 1.0, 2.0, 4.0])
    expected = norm.cdf(theta / 2) - norm.cdf(-theta / 2)
    assert numpy.allclose(black_scholes_call(1.0, 1.0, theta), expected, rtol=1e-12)
    assert float(black_scholes_call(1.2, 1.0, 0.0)) == pytest.approx(0.2)
    assert float(black_scholes_call(0.8, 1.0, 0.0)) == 0.0
