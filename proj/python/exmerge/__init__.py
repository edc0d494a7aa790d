"""Posterior and predictive merging rates for exchangeable sequences."""

from ._core import (
    ConfigError,
    Error,
    GroundSpace,
    InvalidInput,
    Measure,
    ResourceLimit,
    Unsupported,
    dW,
    empirical,
    empirical_bayes,
    fortet_mourier,
    gini_bound,
    moment_bound,
    oracle_check,
    ot_cost,
    pi_r,
    posterior_rate,
    predictive_rate,
    prokhorov,
    prokhorov_bruteforce,
    rate,
    simulate,
    w1_real,
    y_estimator,
)

__version__ = "0.1.0"
