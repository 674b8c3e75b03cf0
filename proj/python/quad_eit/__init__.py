"""Two-phonon transparency in a quadratically coupled optomechanical cavity."""

from ._core import (
    ConfigError,
    ConvergenceError,
    NumericalError,
    dip,
    load_config,
    parse_config,
    steady_state,
    sweep,
    total_output_field,
    verify,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "NumericalError",
    "dip",
    "load_config",
    "parse_config",
    "steady_state",
    "sweep",
    "total_output_field",
    "verify",
]
