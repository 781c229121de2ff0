"""Python bindings for the ltlab numerical laboratory."""

from ._core import (
    BoxSpec,
    ConfigError,
    GridFunction,
    IoError,
    NumericError,
    certificate_factor,
    exclusion_conversion_constant,
    frac_laplacian_apply,
    gn_quotient,
    gn_reference_1d,
    hardy_constant,
    hgn_quotient,
    lambda_threshold,
    minimize_gn,
    minimize_hgn,
    run_cli,
    semiclassical_constant,
    seminorm_global,
)

__all__ = [
    "BoxSpec",
    "ConfigError",
    "GridFunction",
    "IoError",
    "NumericError",
    "certificate_factor",
    "exclusion_conversion_constant",
    "frac_laplacian_apply",
    "gn_quotient",
    "gn_reference_1d",
    "hardy_constant",
    "hgn_quotient",
    "lambda_threshold",
    "minimize_gn",
    "minimize_hgn",
    "run_cli",
    "semiclassical_constant",
    "seminorm_global",
]
