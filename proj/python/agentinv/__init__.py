"""Python bindings for the agentinv C++ library."""

from ._agentinv import (
    ModelError,
    ModelParams,
    NumericalError,
    build_matrices,
    char_poly,
    compare,
    from_centered,
    integrate,
    preset_ids,
    preset_params,
    simulate,
    stability_report,
    to_centered,
    validate,
)

__all__ = [
    "ModelError",
    "ModelParams",
    "NumericalError",
    "build_matrices",
    "char_poly",
    "compare",
    "from_centered",
    "integrate",
    "preset_ids",
    "preset_params",
    "simulate",
    "stability_report",
    "to_centered",
    "validate",
]
