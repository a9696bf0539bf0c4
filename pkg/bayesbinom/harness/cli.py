# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Command line interface.

    bayesbinom calibrate --series prices.csv --window 252 --output run/
    bayesbinom price --chain run/chain.csv --spot 430 --strike 450 --periods 60
    bayesbinom baselines --series prices.csv --strike 450 --periods 60
    bayesbinom roll --series prices.csv --strike 450 --maturity 1993-06-18 --workers 4
    bayesbinom utility --kind quadratic

Any flag may also be given in a JSON file passed with `--config`, keyed by the flag
name (`burn_in` or `burn-in`). Flags given on the command line take precedence.

Exit codes: 0 on success, 1 for invalid input, 2 for numerical failures.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy
from jax import random

from bayesbinom.harness.io import (
    RATE_BASES,
    emit_report,
    load_chain,
    load_series,
    per_period_rate,
    save_chain,
    save_distribution,
    write_utility_curve,
)
from bayesbinom.harness.rolling import BAYESIAN_METHODS, RunConfig, rolling_run
from bayesbinom.mcmc import (
    ChainConfig,
    chain_diagnostics,
    default_prior,
    posterior_summary,
    return_series,
    run_chain,
)
from bayesbinom.methods import METHOD_TAGS, METHODS, TaskConfig, analyze, propagate
from bayesbinom.trees import OPTION_KINDS, MarketFrame
from bayesbinom.utility import UTILITY_KINDS, UtilitySpec, gamma_prior_model, optimal_quote
from bayesbinom.utils import rng_key

logger = logging.getLogger(__name__)

BASELINE_METHODS = ("sm", "bm", "bv")


class ArgumentParser(argparse.ArgumentParser):
    """
    Reports usage errors as `ValueError`, so that they share the exit code of every
    other validation error.
    """

    def error(self, message):
        raise ValueError(message)


def method_list(text):
    tags = tuple(t.strip() for t in text.split(",") if t.strip())
    unknown = set(tags) - set(METHOD_TAGS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown method(s) {sorted(unknown)}")
    return tags


#  Parser
#  ======


def _add_common(parser):
    parser.add_argument("--config", help="JSON file with default values for any flag")
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level")
    parser.add_argument("--seed", type=int, default=0, help="Seed of every random stream")
    parser.add_argument("--output", default=".", help="Output directory")


def _add_window(parser):
    parser.add_argument("--series", help="Price series file (date, close[, rate, ...])")
    parser.add_argument("--date", help="Evaluation day (defaults to the last day of the series)")
    parser.add_argument("--window", type=int, default=252, help="Returns per window")
    parser.add_argument("--rate", type=float, default=0.0, help="Annualized risk-free rate")
    parser.add_argument("--basis", default="business_252", choices=tuple(RATE_BASES))
    parser.add_argument("--u-upper", type=float, default=2.0, help="Upper bound of up moves")


def _add_chain(parser):
    defaults = ChainConfig()
    parser.add_argument("--iterations", type=int, default=defaults.iterations)
    parser.add_argument("--burn-in", type=int, default=defaults.burn_in)
    parser.add_argument("--thin", type=int, default=defaults.thin)
    parser.add_argument("--block-size", type=int, default=defaults.block_size)
    parser.add_argument("--max-blocks", type=int, default=defaults.max_blocks)
    parser.add_argument(
        "--tuner-literal",
        action="store_true",
        help="Tune proposals with the reversed doubling and halving rule",
    )


def _add_option(parser, periods=True):
    parser.add_argument("--strike", type=float, help="Option strike")
    parser.add_argument("--option-kind", default="european_call", choices=OPTION_KINDS)
    if periods:
        parser.add_argument("--spot", type=float, help="Spot price (defaults to the last close)")
        parser.add_argument("--periods", type=int, help="Tree periods to maturity")


def _add_propagation(parser, methods):
    parser.add_argument("--methods", type=method_list, default=methods)
    parser.add_argument("--draws", type=int, default=5000, help="Price samples per method")
    parser.add_argument("--inner", type=int, default=100, help="Trees per θ (θ method)")
    parser.add_argument("--bins", type=int, default=100, help="Bins per axis (ξ method)")
    parser.add_argument("--bin-free", action="store_true", help="Price raw ξ draws")
    parser.add_argument("--replicates", type=int, default=5000, help="Bootstrap trees")
    parser.add_argument("--chunk-size", type=int, default=1000, help="Samples per task")
    parser.add_argument("--sample-files", action="store_true", help="Write price samples")


def build_parser():
    parser = ArgumentParser(prog="bayesbinom", description=__doc__.split("\n\n")[0].strip())
    commands = parser.add_subparsers(dest="command", required=True)

    calibrate = commands.add_parser("calibrate", help="Sample the posterior of one window")
    _add_common(calibrate)
    _add_window(calibrate)
    _add_chain(calibrate)

    price = commands.add_parser("price", help="Price an option from a chain file")
    _add_common(price)
    price.add_argument("--chain", help="Chain file written by `calibrate`")
    _add_option(price)
    _add_propagation(price, BAYESIAN_METHODS)

    baselines = commands.add_parser("baselines", help="Price with the bootstrap baselines")
    _add_common(baselines)
    _add_window(baselines)
    _add_option(baselines)
    _add_propagation(baselines, BASELINE_METHODS)

    roll = commands.add_parser("roll", help="Rolling-window pricing up to maturity")
    _add_common(roll)
    _add_window(roll)
    _add_chain(roll)
    _add_option(roll, periods=False)
    roll.add_argument("--maturity", help="Maturity day, ISO-8601")
    roll.add_argument("--workers", type=int, default=1, help="Days evaluated in parallel")
    _add_propagation(roll, METHOD_TAGS)

    utility = commands.add_parser("utility", help="Optimal quote under a Gamma prior")
    _add_common(utility)
    utility.add_argument("--kind", default="quadratic", choices=UTILITY_KINDS[:-1])
    utility.add_argument("--threshold", type=float, help="Price volatility threshold")
    utility.add_argument("--sell-probability", type=float, default=0.5)
    utility.add_argument("--tolerance", type=float, help="Band of the zero_one utility")
    utility.add_argument("--gamma-shape", type=float, default=2.0)
    utility.add_argument("--gamma-rate", type=float, default=1.0)
    utility.add_argument("--theta-max", type=float, default=30.0)
    utility.add_argument("--points", type=int, default=3001, help="Quadrature nodes")
    utility.add_argument("--quotes", type=int, default=1001, help="Quotes searched in [0, 1]")

    return parser, commands.choices


def parse_args(argv=None):
    """
    Parses `argv`, taking defaults from the `--config` file when one is given.
    """
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ValueError(f"Cannot read the config file {args.config}: {err}") from err
        config = {k.replace("-", "_"): v for k, v in config.items()}
        unknown = set(config) - (set(vars(args)) - {"command", "config"})
        if unknown:
            raise ValueError(f"Unknown key(s) {sorted(unknown)} in {args.config}")
        if "methods" in config:
            methods = config["methods"]
            methods = methods if isinstance(methods, str) else ",".join(methods)
            try:
                config["methods"] = method_list(methods)
            except argparse.ArgumentTypeError as err:
                raise ValueError(f"{args.config}: {err}") from err
        commands[args.command].set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValueError(f"`{args.command}` needs {flags}")


def _output(args):
    output = Path(args.output)
    output.mkdir(parents=True, exist_ok=True)
    return output


def _write_json(data, path):
    text = json.dumps(data, indent=2, sort_keys=True, default=float)
    Path(path).write_text(text, encoding="utf-8")
    logger.info("Wrote %s", path)


def _chain_config(args):
    return ChainConfig(
        args.iterations,
        args.burn_in,
        args.thin,
        args.seed,
        args.block_size,
        args.max_blocks,
        args.tuner_literal,
    )


def _window(args):
    """
    Returns the gross returns of the window ending on `args.date`, the per-period rate
    and the spot price of that day.
    """
    _require(args, "series")
    series = load_series(args.series)
    t = len(series) - 1
    if args.date is not None:
        matches = numpy.flatnonzero(series.dates == numpy.datetime64(args.date, "D"))
        if matches.size == 0:
            raise ValueError(f"{args.date} is not a day of {args.series}")
        t = int(matches[0])
    if t < args.window:
        raise ValueError(f"{series.dates[t]} has fewer than {args.window} returns behind it")

    annualized = args.rate
    if series.rates is not None and numpy.isfinite(series.rates[t]):
        annualized = series.rates[t]
    r_f = per_period_rate(annualized, args.basis)
    data = return_series(series.returns[t - args.window : t], r_f, args.u_upper)
    return data, float(series.closes[t])


def _methods(args):
    settings = {
        "theta": dict(draws=args.draws, inner=args.inner),
        "xi": dict(draws=args.draws, bins=args.bins, bin_free=args.bin_free),
        "expected_xi": dict(draws=args.draws),
        "sm": {},
        "bm": dict(replicates=args.replicates),
        "bv": dict(replicates=args.replicates),
    }
    return {tag: METHODS[tag](**settings[tag]) for tag in args.methods}


def _price(args, source, frame, allowed):
    output = _output(args)
    summaries = {}
    for i, (tag, method) in enumerate(_methods(args).items()):
        if tag not in allowed:
            raise ValueError(f"`{args.command}` cannot run the {tag} method")
        key = random.fold_in(rng_key(args.seed), i)
        dist = propagate(method, source, frame, key, TaskConfig(args.chunk_size))
        summaries[tag] = analyze(dist)
        if args.sample_files:
            save_distribution(dist, output / f"samples_{tag}.csv")
    _write_json(summaries, output / f"{args.command}_summary.json")
    return summaries


#  Subcommands
#  ===========


def calibrate(args):
    data, _ = _window(args)
    prior = default_prior(data, args.u_upper)
    chain = run_chain(data, prior, _chain_config(args))
    diagnostics = chain_diagnostics(chain)

    output = _output(args)
    save_chain(chain, output / "chain.csv")
    report = {
        "acceptance_rates": diagnostics.acceptance_rates,
        "correlations": diagnostics.correlations,
        "degenerate": diagnostics.degenerate,
        "effective_size": diagnostics.effective_size,
        "integrated_time": diagnostics.integrated_time,
        "posterior": posterior_summary(chain),
        "prior": prior._asdict(),
        "tuning": {"blocks": chain.tuning.blocks, "converged": chain.tuning.converged},
    }
    _write_json(report, output / "diagnostics.json")
    return report


def price(args):
    _require(args, "chain", "spot", "strike", "periods")
    chain = load_chain(args.chain)
    frame = MarketFrame(args.spot, args.strike, args.periods, chain.r_f, args.option_kind)
    return _price(args, chain, frame, BAYESIAN_METHODS)


def baselines(args):
    _require(args, "strike", "periods")
    data, spot = _window(args)
    spot = spot if args.spot is None else args.spot
    frame = MarketFrame(spot, args.strike, args.periods, data.r_f, args.option_kind)
    return _price(args, data, frame, BASELINE_METHODS)


def roll(args):
    _require(args, "series", "strike", "maturity")
    config = RunConfig(
        strike=args.strike,
        maturity=args.maturity,
        window=args.window,
        methods=args.methods,
        chain=_chain_config(args),
        draws=args.draws,
        inner=args.inner,
        bins=args.bins,
        bin_free=args.bin_free,
        replicates=args.replicates,
        rate=args.rate,
        basis=args.basis,
        option_kind=args.option_kind,
        u_upper=args.u_upper,
        seed=args.seed,
        workers=args.workers,
        chunk_size=args.chunk_size,
        sample_files=args.sample_files,
    )
    report = rolling_run(load_series(args.series), config)
    emit_report(report, args.output, sample_files=args.sample_files)
    return report


def utility(args):
    util = UtilitySpec(
        kind=args.kind,
        threshold=args.threshold,
        sell_probability=args.sell_probability,
        tolerance=args.tolerance,
    )
    model = gamma_prior_model(
        args.gamma_shape, args.gamma_rate, theta_max=args.theta_max, points=args.points
    )
    quote, (quotes, curve) = optimal_quote(model, util, numpy.linspace(0.0, 1.0, args.quotes))

    output = _output(args)
    write_utility_curve(quotes, curve, output / "utility_curve.csv")
    result = {"optimal_quote": quote, "expected_utility": float(numpy.max(curve))}
    _write_json(result, output / "utility.json")
    return result


COMMANDS = {
    "calibrate": calibrate,
    "price": price,
    "baselines": baselines,
    "roll": roll,
    "utility": utility,
}


def main(argv=None):
    try:
        args = parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
        logging.captureWarnings(True)
        COMMANDS[args.command](args)
    except ValueError as err:
        logger.error("%s", err)
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ArithmeticError as err:
        logger.error("numerical failure: %s", err)
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
