# SPDX-License-Identifier: MIT
# Copyright (c) 2022: BayesBinom contributors
# See LICENSE.md and CONTRIBUTORS.md

# flake8: noqa
# pylint: disable=unused-import,relative-beyond-top-level

"""
Exact and sampled quantities of the five distribution families used by the model:
normal, truncated normal, Beta, Gamma and Inverse-Gamma.
"""

from .conjugate import (
    gamma_logpdf,
    inverse_gamma_logpdf,
    normal_cdf,
    sample_beta,
    sample_gamma,
    sample_inverse_gamma,
)
from .core import (
    TruncatedMoments,
    TruncatedNormal,
    lower_component,
    mills_ratio,
    moments,
    truncnorm_logpdf,
    truncnorm_mean_d,
    truncnorm_mean_u,
    truncnorm_moments,
    truncnorm_pdf,
    truncnorm_sample,
    upper_component,
)
