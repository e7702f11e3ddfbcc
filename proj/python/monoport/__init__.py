"""Periodic steady-state analysis of one-port monotone networks.

The heavy lifting lives in the compiled extension ``monoport._core``; this
package re-exports its public surface.
"""

from ._core import (
    SCHEMA_VERSION,
    ArgumentError,
    ConfigError,
    ConstructionError,
    DivergenceError,
    DomainViolation,
    MonoportError,
    NumericalError,
    __version__,
    audit,
    check,
    derivative,
    diode_resolvent,
    integral,
    normalize_netlist,
    schema_text,
    solve,
    validate_netlist,
)

__all__ = [
    "SCHEMA_VERSION",
    "ArgumentError",
    "ConfigError",
    "ConstructionError",
    "DivergenceError",
    "DomainViolation",
    "MonoportError",
    "NumericalError",
    "__version__",
    "audit",
    "check",
    "derivative",
    "diode_resolvent",
    "integral",
    "normalize_netlist",
    "schema_text",
    "solve",
    "validate_netlist",
]
