# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

"""
Convergence and mixing diagnostics of a posterior chain.
"""

from typing import NamedTuple

import numpy

from bayesbinom.mcmc.core import PARAMETERS, ThetaSample
from bayesbinom.mcmc.sampler import Chain

DEFAULT_MAX_LAG = 50


class ChainDiagnostics(NamedTuple):
    """
    acceptance_rates: dict
        Fraction of accepted proposals per Metropolis-updated parameter.

    autocorrelation: dict
        Autocorrelation function of each parameter for lags `0, ..., max_lag`
        (`nan` for degenerate parameters).

    degenerate: dict
        Whether a parameter is constant along the chain, so that its
        autocorrelation is undefined.

    histograms: dict
        `(density, edges)` of each parameter, as returned by `numpy.histogram`.

    correlations: dict
        Posterior correlation within the up block `(u*, σ_u²)` and the down
        block `(d*, σ_d²)`.

    integrated_time: dict
        Integrated autocorrelation time per parameter.

    effective_size: dict
        Effective sample size per parameter.
    """

    acceptance_rates: dict
    autocorrelation: dict
    degenerate: dict
    histograms: dict
    correlations: dict
    integrated_time: dict
    effective_size: dict


def autocorrelation(x, max_lag=None):
    """
    Sample autocorrelation function of `x` for lags `0, ..., max_lag`, computed with
    FFTs. Returns an array of `nan` when `x` is constant.
    """
    x = numpy.asarray(x, dtype=numpy.float64)
    n = len(x)
    max_lag = n - 1 if max_lag is None else int(max_lag)
    if max_lag >= n:
        raise ValueError(f"Lag {max_lag} must be below the chain length {n}")
    if max_lag < 0:
        raise ValueError(f"Lag {max_lag} must be non-negative")

    y = x - x.mean()
    if numpy.ptp(x) == 0:
        return numpy.full(max_lag + 1, numpy.nan)
    size = 2 ** int(numpy.ceil(numpy.log2(2 * n)))
    f = numpy.fft.rfft(y, size)
    acov = numpy.fft.irfft(f * numpy.conjugate(f), size)[: max_lag + 1] / n
    return acov / acov[0]


def integrated_time(x):
    """
    Integrated autocorrelation time `τ = 1 + 2 Σ ρ_t`, truncated with Geyer's initial
    positive and monotone sequence estimators. Returns `nan` for constant chains.
    """
    x = numpy.asarray(x, dtype=numpy.float64)
    n = len(x)
    if n < 4 or numpy.ptp(x) == 0:
        return numpy.nan
    rho = autocorrelation(x)
    # Initial positive sequence of pair sums, then made monotone
    pairs = rho[: 2 * ((n - 1) // 2)].reshape(-1, 2).sum(axis=1)
    negative = numpy.nonzero(pairs < 0)[0]
    pairs = pairs[: negative[0]] if len(negative) else pairs
    pairs = numpy.minimum.accumulate(pairs)
    return max(-1.0 + 2.0 * pairs.sum(), 1.0 / numpy.log10(n))


def _rates(chain: Chain):
    flags = numpy.asarray(chain.accepted)
    if flags.size == 0:
        total = max(chain.iterations, 1)
        return {name: chain.acceptance_counts.get(name, 0) / total for name in PARAMETERS}
    rates = flags.mean(axis=0)
    return {name: float(r) for name, r in zip(PARAMETERS, rates)}


def _correlation(x, y):
    if numpy.ptp(x) == 0 or numpy.ptp(y) == 0:
        return numpy.nan
    return float(numpy.corrcoef(x, y)[0, 1])


def chain_diagnostics(chain: Chain, max_lag=None, bins=50):
    """
    Acceptance rates, autocorrelation functions, posterior histograms, within-block
    correlations and effective sample sizes of `chain`.

    `max_lag` defaults to `min(50, len(chain) - 1)`; a lag at or above the chain length
    raises `ValueError`.
    """
    n = len(chain)
    if n == 0:
        raise ValueError("Cannot diagnose an empty chain")
    max_lag = min(DEFAULT_MAX_LAG, n - 1) if max_lag is None else int(max_lag)
    if max_lag >= n:
        raise ValueError(f"Lag {max_lag} must be below the chain length {n}")

    samples = chain.samples._asdict()
    acf, degenerate, histograms, tau, ess = {}, {}, {}, {}, {}
    for name, x in samples.items():
        x = numpy.asarray(x, dtype=numpy.float64)
        degenerate[name] = bool(numpy.ptp(x) == 0)
        acf[name] = autocorrelation(x, max_lag)
        histograms[name] = numpy.histogram(x, bins=bins, density=True)
        tau[name] = integrated_time(x)
        ess[name] = n / tau[name] if numpy.isfinite(tau[name]) else numpy.nan

    correlations = {
        "up": _correlation(samples["u_star"], samples["sigma2_u"]),
        "down": _correlation(samples["d_star"], samples["sigma2_d"]),
    }
    return ChainDiagnostics(_rates(chain), acf, degenerate, histograms, correlations, tau, ess)


def posterior_summary(chain: Chain):
    """
    Posterior mean and standard deviation of each parameter, as
    `{name: (mean, sd)}`.
    """
    return {
        name: (float(numpy.mean(x)), float(numpy.std(x, ddof=1)) if len(x) > 1 else 0.0)
        for name, x in zip(ThetaSample._fields, chain.samples)
    }
