"""Sub-slope and continuity solver for eigenvalue equations on flat tori."""

from ._core import (
    ConfigError,
    DhymBranch,
    DomainError,
    Error,
    InvalidArgument,
    MonitorBreach,
    NotSubsolution,
    Operator,
    PathFailure,
    builtin_configs,
    check_subsolution,
    set_threads,
    sigma,
    solve,
    subslope_bracket,
)

__all__ = [
    "ConfigError",
    "DhymBranch",
    "DomainError",
    "Error",
    "InvalidArgument",
    "MonitorBreach",
    "NotSubsolution",
    "Operator",
    "PathFailure",
    "builtin_configs",
    "check_subsolution",
    "set_threads",
    "sigma",
    "solve",
    "subslope_bracket",
]
