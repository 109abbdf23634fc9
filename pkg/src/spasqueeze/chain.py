"""Measurement-chain efficiencies and calibration arithmetic.

The chain is modelled as beam splitters: a variance ``V`` (vacuum = 1/2)
becomes ``eta V + (1 - eta)/2``. In dB relative to vacuum this is
``S_meas = 10 log10(eta 10^(S/10) + 1 - eta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DeviceParams
from .errors import NoSolutionError
from .units import H_PLANCK, HBAR, K_B, TWO_PI


def _check_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class EfficiencyChain:
    eta_int: float
    eta_cold: float
    eta_hot: float

    def __post_init__(self):
        for name in ("eta_int", "eta_cold", "eta_hot"):
            _check_unit_interval(name, getattr(self, name))

    @classmethod
    def from_device(cls, device: DeviceParams, eta_cold: float, eta_hot: float) -> "EfficiencyChain":
        return cls(eta_int=device.eta_int, eta_cold=eta_cold, eta_hot=eta_hot)

    @property
    def eta_total(self) -> float:
        return self.eta_int * self.eta_cold * self.eta_hot

    @property
    def eta_detection(self) -> float:
        """Efficiency after the device output port (cold path times warm chain)."""
        return self.eta_cold * self.eta_hot


def total_efficiency(chain: EfficiencyChain) -> float:
    return chain.eta_total


def measured_from_reference(s_db, eta_hot: float):
    """Forward map: squeezing at the reference plane to the value seen after the warm chain."""
    _check_unit_interval("eta_hot", eta_hot)
    return 10.0 * np.log10(eta_hot * 10.0 ** (np.asarray(s_db, dtype=float) / 10.0) + (1.0 - eta_hot))


def infer_reference_squeezing(s_meas_db, eta_hot: float):
    """Undo the warm-chain admixture: ``10 log10((10^(S_meas/10) - (1 - eta_hot)) / eta_hot)``.

    Raises
    ------
    NoSolutionError
        When the measured variance sits at or below the added chain noise,
        so no reference-plane variance can produce it.
    """
    if not 0.0 < eta_hot <= 1.0:
        raise ValueError(f"eta_hot must lie in (0, 1], got {eta_hot}")
    arg = (10.0 ** (np.asarray(s_meas_db, dtype=float) / 10.0) - (1.0 - eta_hot)) / eta_hot
    if np.any(arg <= 0):
        raise NoSolutionError(f"measured squeezing {s_meas_db} dB is below the noise floor for eta_hot={eta_hot}")
    out = 10.0 * np.log10(arg)
    return float(out) if np.ndim(out) == 0 else out


def eta_hot_from_tsys(t_sys: float, f_s: float) -> float:
    """Warm-chain efficiency ``1 / (1 + 2 k_B T_sys / (h f_s))``."""
    if t_sys < 0:
        raise ValueError(f"system noise temperature must be non-negative, got {t_sys}")
    return float(1.0 / (1.0 + 2.0 * K_B * t_sys / (H_PLANCK * f_s)))


def eta_hot_high_temperature(t_sys: float, f_s: float) -> float:
    """Large-``T_sys`` asymptote ``h f_s / (2 k_B T_sys)``."""
    if not t_sys > 0:
        raise ValueError(f"temperature must be positive, got {t_sys}")
    return float(H_PLANCK * f_s / (2.0 * K_B * t_sys))


def tsys_from_eta_hot(eta_hot: float, f_s: float) -> float:
    if not 0.0 < eta_hot <= 1.0:
        raise ValueError(f"eta_hot must lie in (0, 1], got {eta_hot}")
    return float((1.0 / eta_hot - 1.0) * H_PLANCK * f_s / (2.0 * K_B))


def tsys_from_noise(p_n_meas: float, g_line: float, bandwidth: float) -> float:
    """System noise temperature ``P_n / (k_B G_line B)``; ``bandwidth`` in Hz."""
    if not g_line > 0:
        raise ValueError(f"line gain must be positive, got {g_line}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if p_n_meas < 0:
        raise ValueError(f"noise power must be non-negative, got {p_n_meas}")
    return float(p_n_meas / (K_B * g_line * bandwidth))


@dataclass(frozen=True)
class CalibrationRecord:
    """Inputs of the readout-cavity calibration. Rates in rad/s, times in s, powers in W.

    Every field is optional; each operation checks for the ones it needs.
    """

    t1: float | None = None
    t2r: float | None = None
    chi: float | None = None
    kappa_c: float | None = None
    omega_ce: float | None = None
    omega_cg: float | None = None
    omega_d: float | None = None
    delta_theta_max: float | None = None
    ramsey_delay: float | None = None
    p_meas: float | None = None
    p_n_meas: float | None = None
    bandwidth: float | None = None
    g_line: float | None = None
    t_sys: float | None = None

    def __post_init__(self):
        if self.t1 is not None and self.t2r is not None and self.t2r > 2.0 * self.t1:
            raise ValueError(f"T2R={self.t2r} exceeds 2 T1={2 * self.t1}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def need(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError(f"calibration record is missing {', '.join(missing)}")


@dataclass(frozen=True)
class DrivePower:
    power: float  # W incident on the readout port
    n_photons: float  # Stark-inferred cavity population


def drive_power_from_ramsey(rec: CalibrationRecord) -> DrivePower:
    """Drive power from the Ramsey phase shift.

    ``P_d = hbar omega_d dtheta (omega_ce + omega_cg - 2 omega_d)^2 / (4 T chi kappa_c)``,
    with the photon number ``n = dtheta / (chi T)``.
    """
    rec.need("omega_d", "delta_theta_max", "omega_ce", "omega_cg", "ramsey_delay", "chi", "kappa_c")
    if not rec.ramsey_delay > 0:
        raise ValueError("Ramsey delay must be positive")
    if not (rec.chi > 0 and rec.kappa_c > 0):
        raise ValueError("chi and kappa_c must be positive")
    detuning = rec.omega_ce + rec.omega_cg - 2.0 * rec.omega_d
    power = HBAR * rec.omega_d * rec.delta_theta_max * detuning**2 / (4.0 * rec.ramsey_delay * rec.chi * rec.kappa_c)
    return DrivePower(power=float(power), n_photons=float(rec.delta_theta_max / (rec.chi * rec.ramsey_delay)))


def line_gain(p_meas: float, p_d: float) -> float:
    """Output-line gain ``P_meas / P_d``."""
    if not p_d > 0:
        raise ValueError(f"drive power must be positive, got {p_d}")
    return float(p_meas / p_d)


def thermal_occupancy_bound(t1: float, t2r: float, kappa_c: float, chi: float) -> float:
    """Upper bound on the readout-cavity thermal population from excess dephasing.

    ``(1/T2R - 1/(2 T1)) (kappa^2 + chi^2) / (kappa chi^2)``. The result
    carries the units of ``1/(T kappa)``: pass angular rates for the
    rad/s convention, cyclic rates (Hz) for the other (a 2 pi larger
    number). :func:`thermal_bound_conventions` returns both.
    """
    if t2r > 2.0 * t1:
        raise ValueError(f"T2R={t2r} exceeds 2 T1={2 * t1}")
    if not (kappa_c > 0 and chi > 0):
        raise ValueError("kappa_c and chi must be positive")
    gamma_phi = 1.0 / t2r - 1.0 / (2.0 * t1)
    return float(gamma_phi * (kappa_c**2 + chi**2) / (kappa_c * chi**2))


def thermal_bound_conventions(t1: float, t2r: float, kappa_c: float, chi: float) -> dict[str, float]:
    """The bound with ``kappa_c, chi`` (given in rad/s) used as angular and as cyclic rates."""
    return {
        "angular": thermal_occupancy_bound(t1, t2r, kappa_c, chi),
        "cyclic": thermal_occupancy_bound(t1, t2r, kappa_c / TWO_PI, chi / TWO_PI),
    }
