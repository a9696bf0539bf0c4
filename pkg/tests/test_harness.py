import json

import numpy
import pandas
import pytest

from bayesbinom.harness import (
    PriceSeries,
    RunConfig,
    business_periods,
    date_seeds,
    emit_report,
    evaluate_day,
    load_chain,
    load_series,
    per_period_rate,
    read_report,
    rolling_run,
    save_chain,
    save_series,
)
from bayesbinom.harness import cli
from bayesbinom.mcmc import ChainConfig, ThetaSample, chain_from_samples

pytestmark = pytest.mark.filterwarnings("ignore:Proposal tuning")

SMALL_CHAIN = ChainConfig(iterations=300, burn_in=100, thin=2, block_size=50, max_blocks=3)
SMALL_RUN = dict(chain=SMALL_CHAIN, draws=40, inner=5, bins=8, replicates=40, window=20)


def synthetic_series(n=30, seed=0, trend=None):
    rng = numpy.random.default_rng(seed)
    dates = numpy.busday_offset("1993-01-04", numpy.arange(n), roll="forward")
    steps = numpy.full(n - 1, trend) if trend is not None else rng.normal(0, 0.01, n - 1)
    closes = 100 * numpy.exp(numpy.concatenate([[0.0], numpy.cumsum(steps)]))
    market = numpy.full(n, 2.5)
    return PriceSeries(dates.astype("datetime64[D]"), closes, market)


@pytest.fixture
def series_file(tmp_path):
    path = tmp_path / "prices.csv"
    save_series(synthetic_series(), path)
    return path


def test_load_series(tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("date,close\n1993-01-04,100\n1993-01-05,110\n")
    series = load_series(path)
    assert series.returns.tolist() == [1.1]
    assert series.market is None and series.rates is None

    permuted = tmp_path / "permuted.csv"
    permuted.write_text("rate,close,date\n0.03,100,1993-01-04\n,110,1993-01-05\n")
    other = load_series(permuted)
    assert numpy.array_equal(other.dates, series.dates)
    assert numpy.array_equal(other.closes, series.closes)
    assert other.rates[0] == 0.03 and numpy.isnan(other.rates[1])

    duplicate = tmp_path / "duplicate.csv"
    duplicate.write_text("date,close\n1993-01-04,100\n1993-01-04,110\n")
    with pytest.raises(ValueError, match="line 3: duplicate date"):
        load_series(duplicate)

    decreasing = tmp_path / "decreasing.csv"
    decreasing.write_text("date,close\n1993-01-05,100\n1993-01-04,110\n")
    with pytest.raises(ValueError, match="line 3: decreasing date"):
        load_series(decreasing)

    bad = tmp_path / "bad.csv"
    bad.write_text("date,close\n1993-01-04,100\n1993-01-05,abc\n")
    with pytest.raises(ValueError, match="line 3"):
        load_series(bad)

    negative = tmp_path / "negative.csv"
    negative.write_text("date,close\n1993-01-04,-1\n")
    with pytest.raises(ValueError, match="positive"):
        load_series(negative)

    with pytest.raises(ValueError):
        load_series(tmp_path / "missing.csv")


def test_series_round_trip(tmp_path):
    series = synthetic_series(n=200, seed=7)
    rng = numpy.random.default_rng(7)
    market = rng.uniform(0.5, 5.0, 200)
    market[::7] = numpy.nan
    rates = rng.uniform(0.0, 0.08, 200) / 3.0
    series = series._replace(market=market, rates=rates)
    save_series(series, tmp_path / "series.csv")
    loaded = load_series(tmp_path / "series.csv")
    assert numpy.array_equal(loaded.dates, series.dates)
    # Bit-identical values, so the recomputed returns match as well
    assert numpy.array_equal(loaded.closes, series.closes)
    assert numpy.array_equal(loaded.returns, series.returns)
    assert numpy.array_equal(loaded.market, series.market, equal_nan=True)
    assert numpy.array_equal(loaded.rates, series.rates)


def test_per_period_rate():
    assert per_period_rate(0.03) == pytest.approx(1.1731e-4, rel=1e-3)
    assert (1 + per_period_rate(0.03)) ** 252 == pytest.approx(1.03, rel=1e-12)
    assert per_period_rate(0.0) == 0.0
    with pytest.raises(ValueError):
        per_period_rate(0.03, "actual_365")
    with pytest.raises(ValueError):
        per_period_rate(-2.0)


def test_chain_round_trip(tmp_path):
    rng = numpy.random.default_rng(1)
    samples = ThetaSample(*(rng.uniform(0.5, 1.5, 20) for _ in ThetaSample._fields))
    chain = chain_from_samples(samples, r_f=1.17e-4, seed=12, iterations=40)
    save_chain(chain, tmp_path / "chain.csv")
    loaded = load_chain(tmp_path / "chain.csv")
    for x, y in zip(chain.samples, loaded.samples):
        assert numpy.array_equal(x, y)
    assert loaded.r_f == chain.r_f
    assert loaded.seed == 12
    assert loaded.iterations == 40


def test_dates_and_seeds():
    # Friday to Monday is one business day
    assert business_periods("1993-01-08", "1993-01-11") == 1
    assert business_periods("1993-01-04", "1993-01-04") == 0
    assert date_seeds(0, "1993-01-04") == date_seeds(0, "1993-01-04")
    assert date_seeds(0, "1993-01-04") != date_seeds(0, "1993-01-05")
    assert date_seeds(0, "1993-01-04") != date_seeds(1, "1993-01-04")


def test_run_config():
    config = RunConfig(strike=100.0, maturity="1993-02-26")
    assert config.to_dict()["methods"] == list(config.methods)
    with pytest.raises(ValueError):
        RunConfig(strike=100.0, maturity="1993-02-26", methods=("theta", "delta"))
    with pytest.raises(ValueError):
        RunConfig(strike=-1.0, maturity="1993-02-26")
    with pytest.raises(ValueError):
        RunConfig(strike=100.0, maturity="not a date")


def test_single_day_to_maturity():
    series = synthetic_series()
    config = RunConfig(strike=100.0, maturity=str(series.dates[21]), methods=("sm",), **SMALL_RUN)
    report = rolling_run(series, config)
    assert len(report) == 1
    entry = report.entries[0]
    assert entry.date == str(series.dates[20])
    assert entry.periods == 1
    assert entry.gap is None
    summary = entry.summaries["sm"]
    assert summary["premium_mean"] == pytest.approx(2.5 - summary["mean"])

    # The default window does not fit in the series
    with pytest.raises(ValueError):
        rolling_run(series, RunConfig(strike=100.0, maturity=str(series.dates[25])))


def test_rolling_run_is_deterministic():
    series = synthetic_series()
    base = dict(strike=100.0, maturity=str(series.dates[24]), methods=("theta", "bm"), **SMALL_RUN)
    serial = rolling_run(series, RunConfig(**base))
    threaded = rolling_run(series, RunConfig(**base, workers=2))
    assert len(serial) == len(threaded) == 4
    for a, b in zip(serial.entries, threaded.entries):
        assert a.date == b.date
        assert a.summaries == b.summaries


def test_widths_shrink_across_maturity_buckets():
    # 20 synthetic runs, four evaluation days in each bucket of 60-41, 40-21 and 20-1 periods
    window, horizon = 30, 60
    settings = dict(SMALL_RUN, window=window, methods=("expected_xi",), draws=400)
    buckets = ([], [], [])
    for seed in range(20):
        series = synthetic_series(n=window + horizon, seed=100 + seed)
        maturity = str(numpy.busday_offset(series.dates[window], horizon))
        strike = float(series.closes[window])
        config = RunConfig(strike=strike, maturity=maturity, seed=seed, **settings)
        for t in range(window + 2, window + horizon, 5):
            entry = evaluate_day(series, t, config)
            assert entry.gap is None
            assert entry.periods == horizon - (t - window)
            buckets[(horizon - entry.periods) // 20].append(entry.summaries["expected_xi"]["width"])

    assert [len(b) for b in buckets] == [80, 80, 80]
    widths = [numpy.mean(b) for b in buckets]
    assert widths[0] >= widths[1] >= widths[2], widths


def test_degenerate_windows_become_gaps(tmp_path):
    series = synthetic_series(trend=0.01)
    maturity = str(series.dates[23])
    config = RunConfig(strike=100.0, maturity=maturity, methods=("sm", "theta"), **SMALL_RUN)
    report = rolling_run(series, config)
    assert len(report.gaps) == len(report) == 3
    assert all("degenerate" in e.gap for e in report.entries)

    emit_report(report, tmp_path)
    result = read_report(tmp_path)
    assert len(result["gaps"]) == 3
    assert len(result["series"]["sm"]) == 0
    assert result["summary"]["dates"].tolist() == [0, 0]


def test_report_round_trip(tmp_path):
    series = synthetic_series()
    config = RunConfig(
        strike=100.0,
        maturity=str(series.dates[23]),
        methods=("expected_xi", "bv"),
        sample_files=True,
        **SMALL_RUN,
    )
    report = rolling_run(series, config)
    written = emit_report(report, tmp_path, sample_files=True)
    assert (tmp_path / "samples" / f"{report.entries[0].date}_bv.csv") in written

    result = read_report(tmp_path)
    assert result["config"]["methods"] == ["expected_xi", "bv"]
    assert len(result["gaps"]) == 0
    for tag in ("expected_xi", "bv"):
        frame = result["series"][tag]
        assert frame["date"].tolist() == [e.date for e in report.entries]
        assert frame["mean"].tolist() == [e.summaries[tag]["mean"] for e in report.entries]
        assert frame["p99.5"].tolist() == [e.summaries[tag]["upper"] for e in report.entries]

    summary = result["summary"].set_index("method")
    means = [e.summaries["bv"]["mean"] for e in report.entries]
    assert summary.loc["bv", "mean"] == pytest.approx(numpy.mean(means), rel=1e-12)

    samples = pandas.read_csv(tmp_path / "samples" / f"{report.entries[0].date}_bv.csv")
    assert len(samples) == 40


def test_empty_method_set(tmp_path):
    series = synthetic_series()
    config = RunConfig(strike=100.0, maturity=str(series.dates[22]), methods=(), **SMALL_RUN)
    report = rolling_run(series, config)
    assert len(report) == 2
    emit_report(report, tmp_path)
    summary = pandas.read_csv(tmp_path / "summary.csv")
    assert len(summary) == 0
    assert tuple(summary.columns)[0] == "method"


def test_cli_utility(tmp_path):
    assert cli.main(["utility", "--output", str(tmp_path), "--quotes", "101"]) == 0
    result = json.loads((tmp_path / "utility.json").read_text())
    assert result["optimal_quote"] == pytest.approx(0.59, abs=0.02)
    curve = pandas.read_csv(tmp_path / "utility_curve.csv")
    assert list(curve.columns) == ["quote", "expected_utility"]
    assert len(curve) == 101


def test_cli_config_file(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"quotes": 11, "gamma-shape": 2.0}))
    out = tmp_path / "out"
    assert cli.main(["utility", "--config", str(config), "--output", str(out)]) == 0
    assert len(pandas.read_csv(out / "utility_curve.csv")) == 11

    # Command line flags take precedence
    argv = ["utility", "--config", str(config), "--output", str(out), "--quotes", "21"]
    assert cli.main(argv) == 0
    assert len(pandas.read_csv(out / "utility_curve.csv")) == 21

    config.write_text(json.dumps({"colour": "blue"}))
    assert cli.main(["utility", "--config", str(config), "--output", str(out)]) == 1


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["utility", "--kind", "linear"]) == 1
    assert cli.main(["price", "--output", str(tmp_path)]) == 1
    assert cli.main(["roll", "--methods", "theta,delta"]) == 1
    assert cli.main(["utility", "--kind", "volatility_threshold", "--output", str(tmp_path)]) == 1

    def fail(args):
        raise ArithmeticError("overflow")

    monkeypatch.setitem(cli.COMMANDS, "utility", fail)
    assert cli.main(["utility"]) == 2


def test_cli_calibrate_and_price(tmp_path, series_file):
    run = tmp_path / "run"
    chain_flags = ["--iterations", "300", "--burn-in", "100", "--thin", "2"]
    chain_flags += ["--block-size", "50", "--max-blocks", "2"]
    argv = ["calibrate", "--series", str(series_file), "--window", "20", "--output", str(run)]
    assert cli.main(argv + chain_flags) == 0
    diagnostics = json.loads((run / "diagnostics.json").read_text())
    assert set(diagnostics["acceptance_rates"]) == {"u_star", "d_star", "sigma2_u", "sigma2_d"}
    assert len(load_chain(run / "chain.csv")) == 100

    argv = [
        "price",
        "--chain",
        str(run / "chain.csv"),
        "--spot",
        "100",
        "--strike",
        "100",
        "--periods",
        "5",
        "--methods",
        "theta,expected_xi",
        "--draws",
        "20",
        "--inner",
        "4",
        "--output",
        str(run),
    ]
    assert cli.main(argv) == 0
    summary = json.loads((run / "price_summary.json").read_text())
    assert set(summary) == {"theta", "expected_xi"}

    # Baseline methods need the observed returns
    assert cli.main(argv[:-2] + ["--methods", "sm", "--output", str(run)]) == 1

    argv = ["baselines", "--series", str(series_file), "--window", "20", "--strike", "100"]
    assert cli.main(argv + ["--periods", "5", "--replicates", "30", "--output", str(run)]) == 0
    summary = json.loads((run / "baselines_summary.json").read_text())
    assert set(summary) == {"sm", "bm", "bv"}
