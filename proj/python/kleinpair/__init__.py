"""Vacuum pair creation at potential steps: analytic oracle and lattice channels."""

from ._kleinpair import (
    ConfigError,
    IoError,
    channel_rate,
    config_hash,
    klein_window,
    load_run,
    run_channel,
    total_rate,
    transmission,
)

__all__ = [
    "ConfigError",
    "IoError",
    "channel_rate",
    "config_hash",
    "klein_window",
    "load_run",
    "run_channel",
    "total_rate",
    "transmission",
]
