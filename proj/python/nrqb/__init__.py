"""Nonreciprocal quantum battery simulator (Python bindings)."""

from ._core import (
    ConditionsNotMet,
    ConfigError,
    EffectiveParams,
    Error,
    IncompatiblePhase,
    InvalidParameter,
    NoRealSolution,
    NonConvergence,
    SystemParams,
    UnstableSystem,
    __version__,
    analytic,
    figure,
    figure_names,
    parse_config,
    preset,
    preset_names,
    reduce,
    simulate,
    solve_ep,
    spectrum,
    steady,
    validate,
)

__all__ = [
    "ConditionsNotMet",
    "ConfigError",
    "EffectiveParams",
    "Error",
    "IncompatiblePhase",
    "InvalidParameter",
    "NoRealSolution",
    "NonConvergence",
    "SystemParams",
    "UnstableSystem",
    "__version__",
    "analytic",
    "figure",
    "figure_names",
    "parse_config",
    "preset",
    "preset_names",
    "reduce",
    "simulate",
    "solve_ep",
    "spectrum",
    "steady",
    "validate",
]
