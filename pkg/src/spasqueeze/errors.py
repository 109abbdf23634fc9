"""Exception types raised by the models."""

from __future__ import annotations


class ModelError(Exception):
    """Base class for physics/model failures (as opposed to bad arguments)."""


class InstabilityError(ModelError):
    """Operating point at or beyond the parametric instability threshold."""

    def __init__(self, d0: float, g_eff: float, threshold: float, message: str | None = None):
        self.d0 = d0
        self.g_eff = g_eff
        self.threshold = threshold
        if message is None:
            message = (
                f"unstable operating point: D0={d0:.6g} rad^2/s^2, "
                f"g_eff={g_eff:.6g} rad/s >= threshold {threshold:.6g} rad/s"
            )
        super().__init__(message)


class UnreachableGainError(ModelError):
    """Requested gain exceeds the maximum reachable at the given detuning and Kerr."""

    def __init__(self, target: float, g_max: float, n_at_max: float):
        self.target = target
        self.g_max = g_max
        self.n_at_max = n_at_max
        super().__init__(f"target gain {target:.6g} unreachable; maximum is {g_max:.6g} at n_p={n_at_max:.6g}")


class NoSolutionError(ModelError):
    """An inversion has no physical solution (e.g. variance under the chain noise floor)."""


class SnailError(ModelError):
    """SNAIL potential has no usable bracketed minimum."""
