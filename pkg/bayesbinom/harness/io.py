# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Reading and writing of price series, chains, price samples and rolling reports.

Tables are comma-separated files keyed by their header. Floats are written with 17
significant digits and read back with round-trip parsing, so that re-reading any
emitted file reproduces the in-memory values exactly.
"""

import json
import logging
from pathlib import Path
from typing import NamedTuple, Optional

import numpy
import pandas

from bayesbinom.mcmc import PARAMETERS, Chain, ThetaSample, chain_from_samples

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

RATE_BASES = {"business_252": 252}

REPORT_COLUMNS = (
    "date",
    "periods",
    "r_f",
    "spot",
    "mean",
    "standard_error",
    "median",
    "p0.5",
    "p99.5",
    "width",
    "market",
    "premium_mean",
    "premium_p99.5",
)

SUMMARY_COLUMNS = ("method", "dates", "mean", "median", "p0.5", "p99.5", "width", "premium_mean")

GAP_COLUMNS = ("date", "reason")


class PriceSeries(NamedTuple):
    """
    dates: numpy.ndarray
        Strictly increasing days, as `datetime64[D]`.

    closes: numpy.ndarray
        Positive closing prices.

    market: Optional[numpy.ndarray]
        Observed option prices (`nan` where not quoted), when the file has a
        `market_option_price` column.

    rates: Optional[numpy.ndarray]
        Annualized risk-free quotes (`nan` where missing), when the file has a `rate`
        column.
    """

    dates: numpy.ndarray
    closes: numpy.ndarray
    market: Optional[numpy.ndarray] = None
    rates: Optional[numpy.ndarray] = None

    def __len__(self):
        return len(self.dates)

    @property
    def returns(self):
        """
        Gross returns `close_t / close_{t-1}`; entry `t - 1` belongs to day `t`.
        """
        return self.closes[1:] / self.closes[:-1]


def _line(index):
    # One header line and one-based numbering
    return int(index) + 2


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        return numpy.nan


def _numeric(frame, column, path, required=True):
    # float() is correctly rounded, so `%.17g` output reads back bit for bit
    raw = frame[column].str.strip()
    values = raw.map(_parse_float).astype(numpy.float64)
    malformed = ~numpy.isfinite(values)
    if not required:
        malformed &= raw != ""
    if malformed.any():
        index = malformed.idxmax()
        raise ValueError(
            f"{path}, line {_line(index)}: malformed {column} value {frame[column][index]!r}"
        )
    return values.to_numpy(dtype=numpy.float64)


def load_series(path):
    """
    Reads a price series file with columns `date` (ISO-8601 day) and `close`, and the
    optional columns `market_option_price` and `rate`. Column order is irrelevant.

    Raises `ValueError` naming the offending line for malformed rows, duplicate or
    decreasing dates, and non-positive prices.
    """
    path = Path(path)
    try:
        frame = pandas.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (OSError, pandas.errors.ParserError, pandas.errors.EmptyDataError) as err:
        raise ValueError(f"Cannot read the price series {path}: {err}") from err

    frame.columns = [c.strip() for c in frame.columns]
    missing = {"date", "close"} - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing column(s) {sorted(missing)}")
    if len(frame) == 0:
        raise ValueError(f"{path}: no rows")

    dates = pandas.to_datetime(frame["date"].str.strip(), format="%Y-%m-%d", errors="coerce")
    if dates.isna().any():
        index = dates.isna().idxmax()
        raise ValueError(f"{path}, line {_line(index)}: malformed date {frame['date'][index]!r}")
    dates = dates.to_numpy().astype("datetime64[D]")

    steps = numpy.diff(dates).astype(numpy.int64)
    if numpy.any(steps <= 0):
        index = int(numpy.argmax(steps <= 0)) + 1
        kind = "duplicate" if steps[index - 1] == 0 else "decreasing"
        raise ValueError(f"{path}, line {_line(index)}: {kind} date {dates[index]}")

    closes = _numeric(frame, "close", path)
    if numpy.any(~(closes > 0)):
        index = int(numpy.argmax(~(closes > 0)))
        raise ValueError(
            f"{path}, line {_line(index)}: close must be positive (got {closes[index]})"
        )

    market = rates = None
    if "market_option_price" in frame.columns:
        market = _numeric(frame, "market_option_price", path, required=False)
    if "rate" in frame.columns:
        rates = _numeric(frame, "rate", path, required=False)

    logger.info("Loaded %d closes from %s", len(closes), path)
    return PriceSeries(dates, closes, market, rates)


def save_series(series: PriceSeries, path):
    """
    Writes `series` in the format read by `load_series`.
    """
    columns = {"date": numpy.datetime_as_string(series.dates, unit="D"), "close": series.closes}
    if series.market is not None:
        columns["market_option_price"] = series.market
    if series.rates is not None:
        columns["rate"] = series.rates
    pandas.DataFrame(columns).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def per_period_rate(annualized, basis="business_252"):
    """
    Converts an annualized risk-free quote into the rate of one tree period.

    Under `business_252` a period is a business day and
    `r_f = (1 + annualized) ** (1 / 252) - 1`.
    """
    if basis not in RATE_BASES:
        raise ValueError(f"Unknown rate basis {basis!r}: expected one of {tuple(RATE_BASES)}")
    annualized = numpy.asarray(annualized, dtype=numpy.float64)
    if numpy.any(annualized < -1):
        raise ValueError(f"Annualized rates must be at least -1 (got {annualized})")
    rate = numpy.expm1(numpy.log1p(annualized) / RATE_BASES[basis])
    return float(rate) if rate.ndim == 0 else rate


#  Chains and samples
#  ==================


def _sidecar(path):
    return Path(path).with_suffix(".json")


def _write_json(data, path):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")


def save_chain(chain: Chain, path, extra=None):
    """
    Writes the kept draws of `chain` to a CSV file and its run metadata (proposal
    variances, acceptance counts, seed, rates) to a JSON file next to it.
    """
    path = Path(path)
    columns = {name: numpy.asarray(x) for name, x in chain.samples._asdict().items()}
    frame = pandas.DataFrame(columns)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    metadata = {
        "proposal_variances": {k: float(v) for k, v in chain.proposal_variances.items()},
        "acceptance_counts": {k: int(v) for k, v in chain.acceptance_counts.items()},
        "iterations": int(chain.iterations),
        "seed": int(chain.seed),
        "r_f": float(chain.r_f),
        "u_upper": float(chain.u_upper),
    }
    if extra:
        metadata.update(extra)
    _write_json(metadata, _sidecar(path))


def load_chain(path):
    """
    Reads a chain written by `save_chain`. The JSON sidecar is optional; without it
    the chain is assumed to use `r_f = 0`.
    """
    path = Path(path)
    try:
        frame = pandas.read_csv(path, float_precision="round_trip")
    except (OSError, pandas.errors.ParserError, pandas.errors.EmptyDataError) as err:
        raise ValueError(f"Cannot read the chain {path}: {err}") from err
    missing = set(ThetaSample._fields) - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing column(s) {sorted(missing)}")

    metadata = {}
    if _sidecar(path).exists():
        metadata = json.loads(_sidecar(path).read_text(encoding="utf-8"))
    columns = (frame[name].to_numpy(dtype=numpy.float64) for name in ThetaSample._fields)
    samples = ThetaSample(*columns)
    return chain_from_samples(
        samples,
        r_f=metadata.get("r_f", 0.0),
        u_upper=metadata.get("u_upper", 2.0),
        seed=metadata.get("seed", 0),
        proposal_variances=metadata.get("proposal_variances", {}),
        acceptance_counts={k: metadata.get("acceptance_counts", {}).get(k, 0) for k in PARAMETERS},
        iterations=metadata.get("iterations", len(frame)),
    )


def save_distribution(dist, path):
    pandas.DataFrame({"price": dist.samples}).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def write_utility_curve(quotes, utilities, path):
    """
    Writes the expected utility of each quote as a two-column file.
    """
    frame = pandas.DataFrame({"quote": quotes, "expected_utility": utilities})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


#  Rolling reports
#  ===============


def _report_row(entry, summary):
    return {
        "date": entry.date,
        "periods": entry.periods,
        "r_f": entry.r_f,
        "spot": entry.spot,
        "mean": summary["mean"],
        "standard_error": summary["standard_error"],
        "median": summary["median"],
        "p0.5": summary["lower"],
        "p99.5": summary["upper"],
        "width": summary["width"],
        "market": entry.market,
        "premium_mean": summary["premium_mean"],
        "premium_p99.5": summary["premium_upper"],
    }


def _summary_row(tag, rows):
    if not rows:
        return {"method": tag, "dates": 0, **{c: numpy.nan for c in SUMMARY_COLUMNS[2:]}}
    frame = pandas.DataFrame(rows)
    return {
        "method": tag,
        "dates": len(frame),
        **{c: float(frame[c].mean()) for c in SUMMARY_COLUMNS[2:]},
    }


def emit_report(report, directory, sample_files=False):
    """
    Writes one time-series file per method (`<method>.csv`), the dates without a
    calibration (`gaps.csv`), a summary with averages over dates per method
    (`summary.csv`) and the run configuration (`report.json`).

    With `sample_files`, the price samples of every date and method are written under
    `samples/` as `<date>_<method>.csv`.

    Returns the list of written paths.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        if sample_files:
            (directory / "samples").mkdir(exist_ok=True)
        return _emit(report, directory, sample_files)
    except OSError as err:
        raise ValueError(f"Cannot write the report to {directory}: {err}") from err


def _emit(report, directory, sample_files):
    written = []
    summary_rows = []
    for tag in report.methods:
        rows = [
            _report_row(entry, entry.summaries[tag]) for entry in report.entries if not entry.gap
        ]
        path = directory / f"{tag}.csv"
        pandas.DataFrame(rows, columns=REPORT_COLUMNS).to_csv(
            path, index=False, float_format=FLOAT_FORMAT
        )
        written.append(path)
        summary_rows.append(_summary_row(tag, rows))

    gaps = [{"date": e.date, "reason": e.gap} for e in report.entries if e.gap]
    path = directory / "gaps.csv"
    pandas.DataFrame(gaps, columns=GAP_COLUMNS).to_csv(path, index=False)
    written.append(path)

    path = directory / "summary.csv"
    pandas.DataFrame(summary_rows, columns=SUMMARY_COLUMNS).to_csv(
        path, index=False, float_format=FLOAT_FORMAT
    )
    written.append(path)

    path = directory / "report.json"
    _write_json({"config": report.config.to_dict(), "dates": len(report.entries)}, path)
    written.append(path)

    if sample_files:
        for entry in report.entries:
            for tag, dist in entry.distributions.items():
                path = directory / "samples" / f"{entry.date}_{tag}.csv"
                save_distribution(dist, path)
                written.append(path)

    logger.info("Wrote %d files to %s", len(written), directory)
    return written


def read_report(directory):
    """
    Reads the files written by `emit_report`. Returns a dict with the time series of
    each method, the gaps and the summary as `pandas.DataFrame`s, and the configuration.
    """
    directory = Path(directory)
    config = json.loads((directory / "report.json").read_text(encoding="utf-8"))["config"]
    summary = pandas.read_csv(
        directory / "summary.csv", dtype={"method": str}, float_precision="round_trip"
    )
    series = {
        tag: pandas.read_csv(
            directory / f"{tag}.csv", dtype={"date": str}, float_precision="round_trip"
        )
        for tag in config["methods"]
    }
    gaps = pandas.read_csv(directory / "gaps.csv", dtype=str, keep_default_na=False)
    return {"config": config, "series": series, "gaps": gaps, "summary": summary}
