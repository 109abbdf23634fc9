"""Two-tone intermodulation: pumped susceptibility, IIP3 and intercept fitting.

Powers are in watts internally; dBm uses a 1 mW reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DeviceParams, EffectiveParams, PumpPoint
from .errors import InstabilityError
from .units import HBAR, watt_to_dbm

NARROWBAND_GUARD = 0.05


@dataclass(frozen=True)
class ImdSetup:
    """Two equal-power tones and the third-order product being detected.

    ``offset`` is the tone-pair centre relative to ``omega_p/2`` (rad/s) and
    ``nu_*`` are ``omega0 / omega_tone``.
    """

    f1: float
    f2: float
    delta_imd: float
    offset: float
    nu1: float = 1.0
    nu2: float = 1.0
    nu_imd: float = 1.0

    def __post_init__(self):
        if self.f1 == self.f2:
            raise ValueError("the two tones must differ in frequency")
        for name in ("nu1", "nu2", "nu_imd"):
            nu = getattr(self, name)
            if not abs(nu - 1.0) < NARROWBAND_GUARD:
                raise ValueError(f"{name}={nu} outside the narrowband guard |nu-1| < {NARROWBAND_GUARD}")

    @classmethod
    def centered(
        cls, device: DeviceParams, pump: PumpPoint, offset: float, spacing: float, upper: bool = False
    ) -> "ImdSetup":
        """Tones at ``omega_p/2 + offset -/+ spacing/2``; product at ``2 f1 - f2`` (or ``2 f2 - f1``)."""
        centre = pump.omega_p / 2.0 + offset
        f1, f2 = centre - spacing / 2.0, centre + spacing / 2.0
        f_imd = 2 * f2 - f1 if upper else 2 * f1 - f2
        w0 = device.omega0
        return cls(f1=f1, f2=f2, delta_imd=spacing, offset=offset, nu1=w0 / f1, nu2=w0 / f2, nu_imd=w0 / f_imd)

    @property
    def weight(self) -> float:
        """Prefactor ``nu1^2 nu2 / nu_imd`` of the general intercept."""
        return self.nu1**2 * self.nu2 / self.nu_imd


@dataclass(frozen=True)
class Susceptibility:
    chi: complex
    amplitude_gain: complex  # i kappa_ext chi - 1

    @property
    def theta_g(self) -> float:
        return float(np.angle(self.amplitude_gain))

    @property
    def g_il(self) -> float:
        return float(abs(self.amplitude_gain) ** 2)


def pumped_susceptibility(eff: EffectiveParams, device: DeviceParams, delta_omega: float = 0.0) -> Susceptibility:
    """Signal susceptibility of the pumped resonator at ``omega_p/2 + delta_omega``.

    ``chi = (-delta_omega - Delta_eff - i kappa/2) / D_eff`` with
    ``D_eff = Delta_eff^2 - (delta_omega + i kappa/2)^2 - g_eff^2``.
    """
    half = device.kappa / 2.0
    d_eff = eff.delta_eff**2 - complex(delta_omega, half) ** 2 - eff.g_eff**2
    if d_eff == 0:
        raise InstabilityError(eff.d0, eff.g_eff, eff.threshold, "susceptibility pole at D_eff = 0")
    chi = complex(-delta_omega - eff.delta_eff, -half) / d_eff
    return Susceptibility(chi=chi, amplitude_gain=1j * device.kappa_ext * chi - 1.0)


@dataclass(frozen=True)
class Iip3Result:
    iip3: float  # W
    theta_g: float
    k_abs: float

    @property
    def iip3_dbm(self) -> float:
        return float(watt_to_dbm(self.iip3)) if np.isfinite(self.iip3) else float("inf")


def _distortion_denominator(g_il: float, theta_g: float) -> float:
    return float(abs(np.sqrt(g_il) * np.exp(1j * theta_g) + 1.0) ** 3)


def _iip3_numerator(device: DeviceParams, setup: ImdSetup | None) -> float:
    weight = 1.0 if setup is None else setup.weight
    return weight * device.kappa_ext**2 * HBAR * device.omega0


def iip3_forward(
    device: DeviceParams,
    eff: EffectiveParams,
    g_il: float,
    theta_g: float,
    setup: ImdSetup | None = None,
) -> Iip3Result:
    """Input-referred third-order intercept.

    ``IIP3 = (nu1^2 nu2 / nu_imd) kappa_ext^2 hbar omega0 / |K| * |sqrt(G) e^{i theta_g} + 1|^-3``,
    with all ``nu = 1`` when ``setup`` is None (narrowband form). ``K = 0``
    gives an infinite intercept.
    """
    if not g_il > 0:
        raise ValueError(f"g_il must be positive, got {g_il}")
    k_abs = abs(eff.kerr)
    if k_abs == 0:
        return Iip3Result(iip3=float("inf"), theta_g=float(theta_g), k_abs=0.0)
    value = _iip3_numerator(device, setup) / (k_abs * _distortion_denominator(g_il, theta_g))
    return Iip3Result(iip3=float(value), theta_g=float(theta_g), k_abs=k_abs)


def kerr_from_iip3(
    iip3_meas: float,
    device: DeviceParams,
    g_il: float,
    theta_g: float,
    setup: ImdSetup | None = None,
) -> float:
    """|K| in rad/s that reproduces a measured intercept (exact inverse of :func:`iip3_forward`)."""
    if not iip3_meas > 0:
        raise ValueError(f"IIP3 must be positive, got {iip3_meas}")
    if np.isinf(iip3_meas):
        return 0.0
    return float(_iip3_numerator(device, setup) / (iip3_meas * _distortion_denominator(g_il, theta_g)))


def iip3_at(device: DeviceParams, eff: EffectiveParams, setup: ImdSetup | None = None) -> Iip3Result:
    """Intercept with gain and phase taken from the susceptibility at the tone-pair centre."""
    sus = pumped_susceptibility(eff, device, 0.0 if setup is None else setup.offset)
    return iip3_forward(device, eff, sus.g_il, sus.theta_g, setup)


@dataclass(frozen=True)
class ImdSweep:
    p_in: np.ndarray  # per-tone input power, W
    p_fund: np.ndarray  # fundamental output, W
    p_imd: np.ndarray  # third-order product output, W
    n1: np.ndarray
    n2: np.ndarray


def imd_sweep_simulate(device: DeviceParams, eff: EffectiveParams, setup: ImdSetup, power_grid) -> ImdSweep:
    """Exact-cubic two-tone response for equal per-tone input powers.

    Intra-resonator tone photon numbers follow the linear gain relation
    ``n = |sqrt(G) e^{i theta_g} + 1|^2 P / (nu^2 hbar omega0 kappa_ext)``; the
    detected product is ``G hbar omega0 nu_imd^2 K^2 n1^2 n2 / kappa_ext``.
    """
    p = np.asarray(power_grid, dtype=float)
    sus = pumped_susceptibility(eff, device, setup.offset)
    g = sus.g_il
    drive = abs(np.sqrt(g) * np.exp(1j * sus.theta_g) + 1.0) ** 2
    quantum = HBAR * device.omega0 * device.kappa_ext
    n1 = drive * p / (setup.nu1**2 * quantum)
    n2 = drive * p / (setup.nu2**2 * quantum)
    p_imd = g * HBAR * device.omega0 / device.kappa_ext * setup.nu_imd**2 * eff.kerr**2 * n1**2 * n2
    return ImdSweep(p_in=p, p_fund=g * p, p_imd=p_imd, n1=n1, n2=n2)


@dataclass(frozen=True)
class InterceptFit:
    iip3_dbm: float
    fund_offset_db: float  # p_fund_dbm - p_in_dbm
    side_offset_db: float  # p_side_dbm - 3 p_in_dbm
    n_used: int

    @property
    def iip3(self) -> float:
        return float(1e-3 * 10.0 ** (self.iip3_dbm / 10.0))


def intercept_fit(powers_in, p_fund, p_side, n_fit: int | None = None) -> InterceptFit:
    """Intersect 1 dB/dB and 3 dB/dB lines fitted to the lowest-power points.

    With the slopes fixed, the least-squares intercepts are the mean offsets
    in dB, and the lines cross at ``x = (a - b)/2``.

    Parameters
    ----------
    powers_in, p_fund, p_side : array_like
        Per-tone input power and the two output powers, all in W.
    n_fit : int, optional
        Number of lowest-input-power points used (default: all). At least 4.
    """
    x = np.asarray(powers_in, dtype=float)
    yf = np.asarray(p_fund, dtype=float)
    ys = np.asarray(p_side, dtype=float)
    if not (x.shape == yf.shape == ys.shape) or x.ndim != 1:
        raise ValueError("power arrays must be 1-D and of equal length")
    n = len(x) if n_fit is None else int(n_fit)
    if n < 4 or len(x) < n:
        raise ValueError(f"intercept fit needs at least 4 points, got {min(n, len(x))}")
    order = np.argsort(x)[:n]
    x, yf, ys = x[order], yf[order], ys[order]
    if np.any(x <= 0) or np.any(yf <= 0) or np.any(ys <= 0):
        raise ValueError("powers must be positive for a dB-domain fit")
    if np.ptp(x) == 0:
        raise ValueError("degenerate fit: all input powers equal")
    xd, fd, sd = watt_to_dbm(x), watt_to_dbm(yf), watt_to_dbm(ys)
    a = float(np.mean(fd - xd))
    b = float(np.mean(sd - 3.0 * xd))
    return InterceptFit(iip3_dbm=(a - b) / 2.0, fund_offset_db=a, side_offset_db=b, n_used=n)
