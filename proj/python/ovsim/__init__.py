"""Python bindings for the ovsim simulator."""

from ._ovsim import (
    CodecError,
    ConfigError,
    LogFormatError,
    describe_hex,
    parse_log,
    profiles,
    replay,
    resolve_powers,
    run_scenario,
)

__all__ = [
    "CodecError",
    "ConfigError",
    "LogFormatError",
    "describe_hex",
    "parse_log",
    "profiles",
    "replay",
    "resolve_powers",
    "run_scenario",
]
