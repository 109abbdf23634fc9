"""Linearized pump-biased DPA: effective parameters, scattering, gain and squeezing.

Conventions
-----------
* Every rate is an angular frequency in rad/s.
* Quadrature variances are normalized so that vacuum is 1/2; decibel values
  are ``10*log10(2*variance)``.
* The pump phase is real, so ``g_eff >= 0``; a complex pump only rotates the
  quadrature angle (see :func:`rotate_for_pump_phase`).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError
from .units import TWO_PI, db, variance_db

STARK_FACTOR = 8.0 / 9.0
_EYE = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class DeviceParams:
    """Resonator, coupling rates and bare nonlinearities (all rad/s)."""

    omega0: float
    g3: float
    g4: float
    kappa_ext: float
    kappa_int: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not self.kappa_ext > 0:
            raise ValueError(f"kappa_ext must be positive, got {self.kappa_ext}")
        if not self.kappa_int >= 0:
            raise ValueError(f"kappa_int must be non-negative, got {self.kappa_int}")

    @classmethod
    def from_hz(cls, f0, g3, g4, kappa_ext, kappa_int=0.0) -> "DeviceParams":
        """Build from cyclic frequencies (f, g/2pi, kappa/2pi in Hz)."""
        return cls(
            omega0=TWO_PI * f0,
            g3=TWO_PI * g3,
            g4=TWO_PI * g4,
            kappa_ext=TWO_PI * kappa_ext,
            kappa_int=TWO_PI * kappa_int,
        )

    @classmethod
    def from_total(cls, omega0, g3, g4, kappa, ext_fraction) -> "DeviceParams":
        """Split a total linewidth ``kappa`` so that ``kappa_ext = ext_fraction * kappa``."""
        kappa_ext = ext_fraction * kappa
        return cls(omega0, g3, g4, kappa_ext, max(kappa - kappa_ext, 0.0))

    @property
    def kappa(self) -> float:
        return self.kappa_ext + self.kappa_int

    @property
    def eta_int(self) -> float:
        """Coupling efficiency 1 - kappa_int/kappa."""
        return self.kappa_ext / self.kappa

    def replace(self, **changes) -> "DeviceParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PumpPoint:
    """Pump frequency, pump-induced photon number and detuning ``omega0 - omega_p/2``."""

    omega_p: float
    n_p: float
    delta: float

    def __post_init__(self):
        if not self.n_p >= 0:
            raise ValueError(f"n_p must be non-negative, got {self.n_p}")

    @classmethod
    def detuned(cls, device: DeviceParams, delta: float, n_p: float) -> "PumpPoint":
        return cls(omega_p=2.0 * (device.omega0 - delta), n_p=n_p, delta=delta)

    @classmethod
    def at_frequency(cls, device: DeviceParams, omega_p: float, n_p: float) -> "PumpPoint":
        return cls(omega_p=omega_p, n_p=n_p, delta=device.omega0 - omega_p / 2.0)

    def check_consistent(self, device: DeviceParams, rtol: float = 1e-9) -> None:
        expected = device.omega0 - self.omega_p / 2.0
        if abs(self.delta - expected) > rtol * device.omega0:
            raise ValueError(
                f"pump detuning {self.delta:.9g} inconsistent with omega0 - omega_p/2 = {expected:.9g}"
            )


@dataclass(frozen=True)
class EffectiveParams:
    """Pump-dressed DPA parameters."""

    delta_eff: float
    g_eff: float
    kerr: float
    d0: float

    @property
    def stable(self) -> bool:
        return self.d0 > 0

    @property
    def threshold(self) -> float:
        """Squeezing rate at which D0 reaches zero for this detuning."""
        return float(np.sqrt(max(self.d0 + self.g_eff**2, 0.0)))

    def require_stable(self) -> None:
        if not self.d0 > 0:
            raise InstabilityError(self.d0, self.g_eff, self.threshold)


def stability_discriminant(delta_eff, g_eff, kappa):
    return delta_eff**2 + (kappa / 2.0) ** 2 - g_eff**2


def dressed_params(delta: float, n_p: float, g3: float, kerr: float, kappa: float) -> EffectiveParams:
    """Effective parameters from raw numbers; shared by the solver's inner loop."""
    delta_eff = delta + STARK_FACTOR * kerr * n_p
    g_eff = 4.0 * abs(g3) * np.sqrt(n_p)
    return EffectiveParams(
        delta_eff=float(delta_eff),
        g_eff=float(g_eff),
        kerr=float(kerr),
        d0=float(stability_discriminant(delta_eff, g_eff, kappa)),
    )


def effective_params(device: DeviceParams, pump: PumpPoint, kerr: float) -> EffectiveParams:
    """Stark-shifted detuning, squeezing rate and stability discriminant.

    Parameters
    ----------
    device : DeviceParams
    pump : PumpPoint
        Must satisfy ``delta = omega0 - omega_p/2`` to 1e-9 relative.
    kerr : float
        Effective Kerr coefficient K in rad/s (measured, or from
        :func:`kerr_lowest_order`).

    Returns
    -------
    EffectiveParams
        ``d0 <= 0`` marks an operating point past threshold; it is not raised here.
    """
    pump.check_consistent(device)
    return dressed_params(pump.delta, pump.n_p, device.g3, kerr, device.kappa)


def kerr_lowest_order(g3: float, g4: float, omega_a: float) -> float:
    """Lowest-order Kerr ``K = 12 (g4 - 5 g3^2 / omega_a)`` in rad/s."""
    if not omega_a > 0:
        raise ValueError(f"omega_a must be positive, got {omega_a}")
    return 12.0 * (g4 - 5.0 * g3**2 / omega_a)


def drift_matrix(eff: EffectiveParams, device: DeviceParams) -> np.ndarray:
    half = device.kappa / 2.0
    d, g = eff.delta_eff, eff.g_eff
    return np.array([[-1j * d - half, -1j * g], [1j * g, 1j * d - half]], dtype=complex)


@dataclass(frozen=True)
class ScatteringSet:
    """Drift matrix and port-resolved 2x2 Bogoliubov blocks at one analysis frequency."""

    drift: np.ndarray
    s_ext: np.ndarray
    s_int: np.ndarray
    omega: float

    @property
    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.s_ext, self.s_int)

    def bogoliubov_norm(self) -> float:
        """``sum_mu |S_mu,11|^2 - |S_mu,12|^2``; equals 1 for a valid set."""
        return float(sum(abs(s[0, 0]) ** 2 - abs(s[0, 1]) ** 2 for s in self.blocks))


def _inverse_2x2(m: np.ndarray) -> tuple[np.ndarray, complex]:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)
    return adj / det, det


def scattering_set(
    eff: EffectiveParams,
    device: DeviceParams,
    omega: float = 0.0,
    *,
    check_stability: bool = True,
) -> ScatteringSet:
    """External and internal scattering blocks ``S_ext``, ``S_int`` at analysis frequency ``omega``.

    With ``R = (i*omega + N)^-1``: ``S_ext = -kappa_ext R - 1`` and
    ``S_int = -sqrt(kappa_ext kappa_int) R``.

    Raises
    ------
    InstabilityError
        If ``d0 <= 0`` (unless ``check_stability`` is False) or the matrix is
        singular (the parametric-oscillation pole).
    """
    if check_stability:
        eff.require_stable()
    n = drift_matrix(eff, device)
    m = 1j * omega * _EYE + n
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0:
        raise InstabilityError(eff.d0, eff.g_eff, eff.threshold, "singular drift matrix at the oscillation pole")
    r, _ = _inverse_2x2(m)
    s_ext = -device.kappa_ext * r - _EYE
    s_int = -np.sqrt(device.kappa_ext * device.kappa_int) * r
    return ScatteringSet(drift=n, s_ext=s_ext, s_int=s_int, omega=float(omega))


def gain_il(eff: EffectiveParams, device: DeviceParams) -> float:
    """Reflection power gain referenced to unity transmission, lossy closed form.

    ``((D0 - kappa_ext*kappa/2)^2 + (kappa_ext*Delta_eff)^2) / D0^2``; reduces
    to ``1 + kappa^2 g^2 / D0^2`` without internal loss.
    """
    eff.require_stable()
    ke, k, d0 = device.kappa_ext, device.kappa, eff.d0
    return float(((d0 - ke * k / 2.0) ** 2 + (ke * eff.delta_eff) ** 2) / d0**2)


@dataclass(frozen=True)
class InsertionLoss:
    s11_off: complex
    power: float  # |S11,off|^2
    gain_il: float
    gain: float  # gain referenced to pump-off reflection

    @property
    def power_db(self) -> float:
        return float(db(self.power))


def s11_pump_off(device: DeviceParams, delta: float) -> complex:
    """Pump-off reflection at ``omega_p/2``: ``i kappa_ext chi0 - 1``, ``1/chi0 = -delta + i kappa/2``."""
    chi0 = 1.0 / complex(-delta, device.kappa / 2.0)
    return 1j * device.kappa_ext * chi0 - 1.0


def insertion_loss(device: DeviceParams, pump: PumpPoint, kerr: float = 0.0) -> InsertionLoss:
    """Pump-off reflection ``|S11,off|^2`` and the pump-off-referenced gain ``G = G_IL/|S11,off|^2``."""
    s11 = s11_pump_off(device, pump.delta)
    power = abs(s11) ** 2
    g_il = gain_il(effective_params(device, pump, kerr), device)
    return InsertionLoss(s11_off=s11, power=power, gain_il=g_il, gain=g_il / power)


def squeeze_variance(scat: ScatteringSet, theta):
    """Zero-frequency output quadrature variance at angle ``theta`` (vacuum = 1/2).

    ``1/2 * sum_mu |S_mu,11 e^{-i theta} + conj(S_mu,12) e^{i theta}|^2``;
    ``theta`` may be an array.
    """
    theta = np.asarray(theta, dtype=float)
    em, ep = np.exp(-1j * theta), np.exp(1j * theta)
    total = 0.0
    for s in scat.blocks:
        total = total + np.abs(s[0, 0] * em + np.conj(s[0, 1]) * ep) ** 2
    out = 0.5 * total
    return float(out) if out.ndim == 0 else out


def squeeze_spectrum(eff: EffectiveParams, device: DeviceParams, theta, omega: float):
    """Symmetrized squeezing spectrum at analysis frequency ``omega``.

    Uses blocks at ``+omega`` and ``-omega``; at ``omega = 0`` this equals
    :func:`squeeze_variance`.
    """
    theta = np.asarray(theta, dtype=float)
    plus = scattering_set(eff, device, omega)
    minus = scattering_set(eff, device, -omega)
    em, ep = np.exp(-1j * theta), np.exp(1j * theta)
    total = 0.0
    for sp, sm in zip(plus.blocks, minus.blocks):
        total = total + np.abs(sp[0, 0] * em + np.conj(sm[0, 1]) * ep) ** 2
        total = total + np.abs(sp[0, 1] * em + np.conj(sm[0, 0]) * ep) ** 2
    out = 0.25 * total
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SqueezeReport:
    s_min: float
    theta_min: float
    anti_s: float
    g_il: float

    @property
    def s_min_db(self) -> float:
        return float(variance_db(self.s_min))

    @property
    def anti_s_db(self) -> float:
        return float(variance_db(self.anti_s))

    @property
    def g_il_db(self) -> float:
        return float(db(self.g_il))

    @property
    def values_db(self) -> dict[str, float]:
        return {"s_min": self.s_min_db, "anti_s": self.anti_s_db, "g_il": self.g_il_db}


def optimal_squeeze(scat: ScatteringSet) -> SqueezeReport:
    """Minimum and maximum quadrature variance at zero analysis frequency.

    ``s_min = 1/2 + sum|S_mu,12|^2 - |sum S_mu,11 S_mu,12|`` at
    ``theta_min = arg(sum S_mu,11 S_mu,12)/2 + pi/2``; the anti-squeezed
    variance sits at ``theta_min + pi/2``.
    """
    if scat.omega != 0.0:
        raise ValueError("optimal_squeeze needs the zero-frequency scattering set")
    corr = sum(s[0, 0] * s[0, 1] for s in scat.blocks)
    theta_min = float(np.mod(0.5 * float(np.angle(corr)) + np.pi / 2.0, np.pi))
    # evaluating the variance at theta_min avoids the O(G^2) cancellation in 1/2 + leak - |corr|
    return SqueezeReport(
        s_min=squeeze_variance(scat, theta_min),
        theta_min=theta_min,
        anti_s=squeeze_variance(scat, theta_min + np.pi / 2.0),
        g_il=float(abs(scat.s_ext[0, 0]) ** 2),
    )


def smin_from_gain(g_il: float) -> float:
    """Lossless minimum variance ``(sqrt(G) - sqrt(G-1))^2 / 2``, in cancellation-free form."""
    if g_il < 1:
        raise ValueError(f"lossless gain must be >= 1, got {g_il}")
    return 0.5 / (np.sqrt(g_il) + np.sqrt(g_il - 1.0)) ** 2


def smin_lossless_table(eff: EffectiveParams, device: DeviceParams) -> float:
    """Closed-form lossless minimum variance in terms of D0, kappa, Delta_eff and g_eff."""
    eff.require_stable()
    k, d0 = device.kappa, eff.d0
    root = np.sqrt((k**2 / 2.0 - d0) ** 2 + (k * eff.delta_eff) ** 2)
    return float(((root - k * eff.g_eff) / (np.sqrt(2.0) * d0)) ** 2)


def smin_lossy_table(eff: EffectiveParams, device: DeviceParams, *, check_stability: bool = True) -> float:
    if check_stability:
        eff.require_stable()
    ke, k, d0, g = device.kappa_ext, device.kappa, eff.d0, eff.g_eff
    root = np.sqrt((k**2 / 2.0 - d0) ** 2 + (k * eff.delta_eff) ** 2)
    return float(0.5 + ke * k * g**2 / d0**2 - ke * g * root / d0**2)


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")


def s_obs(eff: EffectiveParams, device: DeviceParams, eta: float, *, check_stability: bool = True) -> float:
    """Squeezed variance after a beam-splitter chain of efficiency ``eta``.

    ``eta * s_min_lossy + (1 - eta)/2`` with ``s_min_lossy`` from the
    zero-frequency scattering blocks. ``check_stability=False`` evaluates the
    algebra past threshold (the linear model is then not physical).
    """
    _check_eta(eta)
    scat = scattering_set(eff, device, 0.0, check_stability=check_stability)
    return eta * optimal_squeeze(scat).s_min + (1.0 - eta) * 0.5


def s_obs_closed_form(eff: EffectiveParams, device: DeviceParams, eta: float, *, check_stability: bool = True) -> float:
    """Same quantity as :func:`s_obs`, via ``kappa_ext -> eta*kappa_ext`` in the lossy table form."""
    _check_eta(eta)
    if eta == 0.0:
        return 0.5
    scaled = device.replace(kappa_ext=eta * device.kappa_ext, kappa_int=device.kappa_int + (1 - eta) * device.kappa_ext)
    return smin_lossy_table(eff, scaled, check_stability=check_stability)


def s_obs_resonant(g_eff: float, kappa: float, kappa_ext: float, eta: float) -> float:
    """Observed variance at ``Delta_eff = 0``: ``1/2 - eta kappa_ext g / (g + kappa/2)^2``."""
    _check_eta(eta)
    return 0.5 - eta * kappa_ext * g_eff / (g_eff + kappa / 2.0) ** 2


def antisqueeze_check(g_il: float) -> float:
    """Lossless anti-squeezed variance relative to vacuum, ``(sqrt(G) + sqrt(G-1))^2``."""
    if g_il < 1:
        raise ValueError(f"gain must be >= 1, got {g_il}")
    return float((np.sqrt(g_il) + np.sqrt(g_il - 1.0)) ** 2)


def rotate_for_pump_phase(theta: float, pump_phase: float) -> float:
    """Quadrature angle for a pump ``g_eff * exp(i*pump_phase)`` on the ``a^dagger^2`` term.

    Mapping ``a -> a exp(i*phase/2)`` restores a real pump, so every angle
    shifts by half the pump phase (mod pi).
    """
    return float(np.mod(theta + pump_phase / 2.0, np.pi))
