"""Coded-surface ptychography: forward model, TV-regularized and baseline solvers."""

from ._core import (
    ConfigError,
    DimensionError,
    DivergenceError,
    aligned_rmse,
    bin_intensity,
    fft2,
    forward_intensity,
    ifft2,
    propagate,
    read_dataset,
    reconstruct,
    shift,
    simulate,
    simulate_to_file,
    tv_prox,
    tv_seminorm,
    upsample_adjoint,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DivergenceError",
    "aligned_rmse",
    "bin_intensity",
    "fft2",
    "forward_intensity",
    "ifft2",
    "propagate",
    "read_dataset",
    "reconstruct",
    "shift",
    "simulate",
    "simulate_to_file",
    "tv_prox",
    "tv_seminorm",
    "upsample_adjoint",
]
