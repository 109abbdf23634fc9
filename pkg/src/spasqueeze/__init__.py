"""Gain, squeezing, intermodulation and calibration models for a degenerate
three-wave-mixing parametric amplifier."""

from __future__ import annotations

from .core import (
    DeviceParams,
    EffectiveParams,
    PumpPoint,
    ScatteringSet,
    SqueezeReport,
    antisqueeze_check,
    effective_params,
    gain_il,
    insertion_loss,
    kerr_lowest_order,
    optimal_squeeze,
    s_obs,
    scattering_set,
    squeeze_variance,
)
from .errors import InstabilityError, ModelError, NoSolutionError, SnailError, UnreachableGainError

__version__ = "0.1.0"

__all__ = [
    "DeviceParams",
    "EffectiveParams",
    "PumpPoint",
    "ScatteringSet",
    "SqueezeReport",
    "antisqueeze_check",
    "effective_params",
    "gain_il",
    "insertion_loss",
    "kerr_lowest_order",
    "optimal_squeeze",
    "s_obs",
    "scattering_set",
    "squeeze_variance",
    "InstabilityError",
    "ModelError",
    "NoSolutionError",
    "SnailError",
    "UnreachableGainError",
    "__version__",
]
