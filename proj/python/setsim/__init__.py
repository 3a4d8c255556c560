"""Single-event transient fault injection on gate-level netlists."""

import json

from ._core import (
    Circuit,
    SetsimError,
    bundled_profiles,
    classify,
    clock_period,
    levelize,
    load_bench,
    parse_bench,
    standard_error,
    validate,
    wrap_combinational,
)
from . import _core

__all__ = [
    "Circuit",
    "SetsimError",
    "bundled_profiles",
    "campaign",
    "classify",
    "clock_period",
    "levelize",
    "load_bench",
    "oracle",
    "parse_bench",
    "standard_error",
    "validate",
    "wrap_combinational",
]


def campaign(circuit, tech="65nm-like", stimulus="random:1000:1", seed=1, max_samples=100000,
             min_samples=100, stderr_target=0.1, capture_policy="instant", workers=1):
    """Monte Carlo campaign. Returns (stats dict, sample log CSV text)."""
    stats, log = _core.run_campaign(circuit, tech, stimulus, seed, max_samples, min_samples,
                                    stderr_target, capture_policy, workers)
    return json.loads(stats), log


def oracle(circuit, tech="65nm-like", stimulus="random:1000:1", t_grid=200, workers=1):
    return json.loads(_core.run_oracle(circuit, tech, stimulus, t_grid, workers))
