"""Buck converter disturbance-rejection loop: simulation and frequency analysis.

Thin facade over the native module so callers write `import cesobuck`.
"""

from _cesobuck import (
    bandwidths,
    control_gain_mag,
    eso_gains,
    noise_error_mag,
    simulate,
    validate,
)

__all__ = [
    "bandwidths",
    "control_gain_mag",
    "eso_gains",
    "noise_error_mag",
    "simulate",
    "validate",
]
