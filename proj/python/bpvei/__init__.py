"""Python bindings for the bpvei C++ core."""

import json

from ._bpvei import (  # noqa: F401
    DomainError,
    ValidationError,
    cli,
    compose_offspring,
    criticality,
    endpoint_sample,
    exact_survival_curve,
    extinction,
    gamma_cdf,
    iterated_shape_residual,
    ks_statistic,
    mean_sequence,
    normalizer,
    presets,
    process_pgf,
    propagate,
    shape_function,
    survival_curve,
    variance_sequence,
    variance_sequence_printed,
)
from ._bpvei import gamma_limit as _gamma_limit


def gamma_limit(model, n, reps, seed=1, lambdas=(0.5, 1.0, 2.0)):
    """Gamma-limit report as a dict."""
    return json.loads(_gamma_limit(model, list(n), reps, seed, list(lambdas)))
