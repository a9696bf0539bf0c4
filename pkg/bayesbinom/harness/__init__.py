# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

# flake8: noqa
# pylint: disable=unused-import,relative-beyond-top-level

"""
Data files, the rolling-window driver and the `bayesbinom` command.
"""

from .io import (
    PriceSeries,
    emit_report,
    load_chain,
    load_series,
    per_period_rate,
    read_report,
    save_chain,
    save_distribution,
    save_series,
    write_utility_curve,
)
from .rolling import (
    RollingEntry,
    RollingReport,
    RunConfig,
    business_periods,
    date_seeds,
    evaluate_day,
    rolling_run,
)
