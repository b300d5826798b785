"""Linear genetic programming neuroevolution with a Kriging surrogate."""

import json

from ._core import (
    ConfigError,
    Error,
    Genome,
    Instruction,
    ParseError,
    cost_reduction,
    decode,
    default_config,
    describe,
    expected_improvement,
    kendall_tau,
    modeled_cost,
    mse,
    param_count,
    proxy_fitness,
    r_squared,
    repair,
)
from ._core import run as _run

__all__ = [
    "ConfigError",
    "Error",
    "Genome",
    "Instruction",
    "ParseError",
    "cost_reduction",
    "decode",
    "default_config",
    "describe",
    "expected_improvement",
    "kendall_tau",
    "modeled_cost",
    "mse",
    "param_count",
    "proxy_fitness",
    "r_squared",
    "repair",
    "run",
]


def run(config=None, on_generation=None):
    """Runs one arm. `config` is a dict or a JSON string in the CLI format."""
    if config is None:
        config = {}
    if not isinstance(config, str):
        config = json.dumps(config)
    return _run(config, on_generation)
