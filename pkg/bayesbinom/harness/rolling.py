# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Rolling-window pricing of one option up to its maturity.

On every day `t` of the series before maturity, the tree is calibrated on the
`window` gross returns ending at `t` and priced with `periods` business days to go,
using each of the selected methods. Days are independent jobs. Each one derives its
seeds from the run seed and its date alone, so results do not depend on the number of
workers.
"""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional, Tuple

import numpy
from jax import random

from bayesbinom.harness.io import RATE_BASES, PriceSeries, per_period_rate
from bayesbinom.mcmc import ChainConfig, default_prior, return_series, run_chain
from bayesbinom.methods import (
    METHOD_TAGS,
    METHODS,
    SerialExecutor,
    TaskConfig,
    analyze,
    propagate,
)
from bayesbinom.trees import OPTION_KINDS, MarketFrame
from bayesbinom.utils import DegenerateWindowError, rng_key

logger = logging.getLogger(__name__)

BAYESIAN_METHODS = ("theta", "xi", "expected_xi")


@dataclasses.dataclass
class RunConfig:
    """
    Settings of a rolling run.

    strike: float
        Strike of the option.

    maturity: str
        Maturity day, ISO-8601.

    window: int = 252
        Number of gross returns per calibration window.

    methods: Tuple[str, ...]
        Subset of `METHOD_TAGS` to run.

    chain: ChainConfig
        Sampler settings. Its seed is replaced by the per-date seed.

    rate: float = 0.0
        Annualized risk-free quote used on days without a `rate` value in the series.
    """

    strike: float
    maturity: str
    window: int = 252
    methods: Tuple[str, ...] = METHOD_TAGS
    chain: ChainConfig = ChainConfig()
    draws: int = 5000
    inner: int = 100
    bins: int = 100
    bin_free: bool = False
    replicates: int = 5000
    rate: float = 0.0
    basis: str = "business_252"
    option_kind: str = "european_call"
    u_upper: float = 2.0
    seed: int = 0
    workers: int = 1
    chunk_size: int = 1000
    sample_files: bool = False

    def __post_init__(self):
        self.methods = tuple(self.methods)
        unknown = set(self.methods) - set(METHOD_TAGS)
        if unknown:
            raise ValueError(
                f"Unknown method(s) {sorted(unknown)}: expected a subset of {METHOD_TAGS}"
            )
        if int(self.window) < 2:
            raise ValueError(f"The window needs at least two returns (got {self.window})")
        if not self.strike > 0:
            raise ValueError(f"The strike must be positive (got {self.strike})")
        if int(self.workers) < 1:
            raise ValueError(f"workers must be positive (got {self.workers})")
        if self.basis not in RATE_BASES:
            raise ValueError(f"Unknown rate basis {self.basis!r}")
        if self.option_kind not in OPTION_KINDS:
            raise ValueError(f"Unknown option kind {self.option_kind!r}")
        try:
            self.maturity = str(numpy.datetime64(self.maturity, "D"))
        except ValueError as err:
            raise ValueError(f"Malformed maturity date {self.maturity!r}") from err
        self.window = int(self.window)

    def to_dict(self):
        config = dataclasses.asdict(self)
        config["chain"] = self.chain._asdict()
        config["methods"] = list(self.methods)
        return config


class RollingEntry(NamedTuple):
    """
    Result of one evaluation date.

    summaries: dict
        `analyze` output per method, extended with the keys `market`, `premium_mean`
        (market price minus posterior mean) and `premium_upper` (market price minus the
        99.5% percentile). Premiums are `nan` without a market price.

    gap: Optional[str]
        Reason the date could not be calibrated. Gap entries carry no summaries.
    """

    date: str
    periods: int
    r_f: float
    spot: float
    market: float
    summaries: dict
    distributions: dict
    gap: Optional[str] = None


class RollingReport(NamedTuple):
    entries: tuple
    config: RunConfig

    @property
    def methods(self):
        return self.config.methods

    @property
    def gaps(self):
        return tuple(e for e in self.entries if e.gap)

    def __len__(self):
        return len(self.entries)


def business_periods(start, maturity):
    """
    Number of business days in `[start, maturity)`, one tree period each.
    """
    return int(numpy.busday_count(numpy.datetime64(start, "D"), numpy.datetime64(maturity, "D")))


def date_seeds(seed, date):
    """
    Seeds of the sampler and of the propagation methods for one evaluation date.
    """
    ordinal = int(numpy.datetime64(date, "D").astype(numpy.int64))
    chain_seed, method_seed = numpy.random.SeedSequence([int(seed), ordinal]).generate_state(2)
    return int(chain_seed), int(method_seed)


def evaluation_days(series: PriceSeries, config: RunConfig):
    """
    Indices of the days with a full window of returns before maturity.
    """
    maturity = numpy.datetime64(config.maturity, "D")
    indices = [t for t in range(config.window, len(series)) if series.dates[t] < maturity]
    if not indices:
        raise ValueError(
            f"No day before maturity {config.maturity} has {config.window} returns behind it: "
            f"the series must cover window + 1 closes before the first evaluation date"
        )
    return indices


def _rate(series, config, t):
    annualized = config.rate
    if series.rates is not None and numpy.isfinite(series.rates[t]):
        annualized = series.rates[t]
    return per_period_rate(annualized, config.basis)


def _market(series, t):
    return float(series.market[t]) if series.market is not None else numpy.nan


def build_methods(config: RunConfig):
    settings = {
        "theta": dict(draws=config.draws, inner=config.inner),
        "xi": dict(draws=config.draws, bins=config.bins, bin_free=config.bin_free),
        "expected_xi": dict(draws=config.draws),
        "sm": {},
        "bm": dict(replicates=config.replicates),
        "bv": dict(replicates=config.replicates),
    }
    return {tag: METHODS[tag](**settings[tag]) for tag in config.methods}


def with_premiums(summary, market):
    return dict(
        summary,
        market=market,
        premium_mean=market - summary["mean"],
        premium_upper=market - summary["upper"],
    )


def evaluate_day(series: PriceSeries, t: int, config: RunConfig):
    """
    Calibrates and prices the option on day `t` of `series`.
    """
    date = str(series.dates[t])
    periods = business_periods(series.dates[t], config.maturity)
    r_f = _rate(series, config, t)
    spot = float(series.closes[t])
    market = _market(series, t)
    entry = RollingEntry(date, periods, r_f, spot, market, {}, {})

    if periods < 1:
        return entry._replace(gap="no business day before maturity")

    returns = series.returns[t - config.window : t]
    data = return_series(returns, r_f, config.u_upper)
    frame = MarketFrame(spot, config.strike, periods, r_f, config.option_kind)
    chain_seed, method_seed = date_seeds(config.seed, date)
    task_config = TaskConfig(config.chunk_size)
    methods = build_methods(config)

    try:
        chain = None
        if any(tag in BAYESIAN_METHODS for tag in methods):
            prior = default_prior(data, config.u_upper)
            chain = run_chain(data, prior, config.chain._replace(seed=chain_seed))
        summaries, distributions = {}, {}
        for i, (tag, method) in enumerate(methods.items()):
            source = chain if tag in BAYESIAN_METHODS else data
            key = random.fold_in(rng_key(method_seed), i)
            dist = propagate(method, source, frame, key, task_config)
            summaries[tag] = with_premiums(analyze(dist), market)
            if config.sample_files:
                distributions[tag] = dist
    except DegenerateWindowError as err:
        logger.warning("%s: %s", date, err)
        return entry._replace(gap=str(err))

    logger.info("%s: priced with %d periods to maturity", date, periods)
    return entry._replace(summaries=summaries, distributions=distributions)


def rolling_run(series: PriceSeries, config: RunConfig):
    """
    Prices the option on every day of `series` with a full window behind it and before
    maturity. Degenerate windows yield gap entries instead of aborting the run.
    """
    days = evaluation_days(series, config)
    logger.info(
        "Rolling run over %d days (%s to %s) with methods %s",
        len(days),
        series.dates[days[0]],
        series.dates[days[-1]],
        ", ".join(config.methods),
    )
    workers = int(config.workers)
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else SerialExecutor()
    with executor:
        futures = [executor.submit(evaluate_day, series, t, config) for t in days]
        entries = tuple(f.result() for f in futures)

    gaps = sum(1 for e in entries if e.gap)
    if gaps:
        logger.warning("%d of %d days had no calibration", gaps, len(entries))
    return RollingReport(entries, config)
