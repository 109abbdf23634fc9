"""Flux-dependent SPA parameters from the SNAIL potential.

The SNAIL potential in units of the large-junction energy E_J is

    U(phi) / E_J = -alpha cos(phi) - n cos((phi_ext - phi) / n)

with ``phi_ext = 2 pi Phi_ext / Phi0``. The coefficients ``c2, c3, c4`` are
the derivatives of U/E_J at its minimum.

Mapping to Hamiltonian parameters (a fixed convention, exposed so it can be
matched to fitted device curves):

* capacitance is flux independent; the junction participation ``p`` is given
  at zero flux and the linear inductance is fixed from it;
* ``omega0 = omega_r / sqrt((1 - p) + p c2(0)/c2)``, so ``omega0(0) = omega_r``;
* ``E_C / hbar = pi Z omega_r / R_K``;
* ``g3 = p(phi)^2 / (6 M) * (c3 / c2) * omega0 * sqrt(E_C / hbar omega0)``;
* ``g4 = p(phi)^3 / (12 M^2) * (c4 / c2) * E_C / hbar``

where ``M`` is the number of SNAILs in series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import DeviceParams, kerr_lowest_order
from .errors import SnailError
from .units import FLUX_QUANTUM, R_K, TWO_PI

_GRID_POINTS = 4001
_XTOL = 1e-14


@dataclass(frozen=True)
class SnailSpec:
    n_junctions: int
    alpha: float
    lj: float  # large-junction inductance, H
    participation: float  # at zero flux
    phi_ext: float  # units of Phi0
    resonator_impedance: float = 50.0
    resonator_frequency_scale: float = TWO_PI * 8.2e9  # omega0 at zero flux, rad/s
    n_snails: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.n_junctions < 2:
            raise ValueError(f"need at least 2 array junctions, got {self.n_junctions}")
        if not 0 < self.participation <= 1:
            raise ValueError(f"participation must be in (0, 1], got {self.participation}")
        if self.n_snails < 1:
            raise ValueError("n_snails must be >= 1")

    def at_flux(self, phi_ext: float) -> "SnailSpec":
        return SnailSpec(
            self.n_junctions,
            self.alpha,
            self.lj,
            self.participation,
            phi_ext,
            self.resonator_impedance,
            self.resonator_frequency_scale,
            self.n_snails,
        )

    @property
    def reduced_flux(self) -> float:
        """Flux folded into [-1/2, 1/2) Phi0; all coefficients depend only on this."""
        return float(self.phi_ext - np.floor(self.phi_ext + 0.5))


@dataclass(frozen=True)
class TaylorCoeffs:
    phi_min: float
    c2: float
    c3: float
    c4: float


def potential(phi, alpha: float, n: int, phi_ext_rad: float):
    return -alpha * np.cos(phi) - n * np.cos((phi_ext_rad - phi) / n)


def potential_derivative(phi, alpha: float, n: int, phi_ext_rad: float, order: int):
    """Analytic ``order``-th derivative of U/E_J (order 0..4)."""
    u = (phi_ext_rad - phi) / n
    if order == 0:
        return potential(phi, alpha, n, phi_ext_rad)
    if order == 1:
        return alpha * np.sin(phi) - np.sin(u)
    if order == 2:
        return alpha * np.cos(phi) + np.cos(u) / n
    if order == 3:
        return -alpha * np.sin(phi) + np.sin(u) / n**2
    if order == 4:
        return -alpha * np.cos(phi) - np.cos(u) / n**3
    raise ValueError(f"order must be 0..4, got {order}")


def taylor_coeffs(spec: SnailSpec) -> TaylorCoeffs:
    """Locate the potential minimum and return ``c2, c3, c4`` there.

    The global minimum over one period of the potential (2 pi n) is located on
    a grid, then the root of ``U'`` is polished with Brent's method inside the
    sign-change bracket.
    """
    a, n = spec.alpha, spec.n_junctions
    pe = TWO_PI * spec.reduced_flux
    # the array term is minimal at phi = phi_ext; one full period around it
    grid = np.linspace(pe - np.pi * n, pe + np.pi * n, _GRID_POINTS)
    values = potential(grid, a, n, pe)
    i = int(np.argmin(values))
    if i == 0 or i == len(grid) - 1:
        raise SnailError(f"no bracketed minimum for alpha={a}, n={n}, phi_ext={spec.phi_ext}")
    lo, hi = grid[i - 1], grid[i + 1]
    d_lo = potential_derivative(lo, a, n, pe, 1)
    d_hi = potential_derivative(hi, a, n, pe, 1)
    if d_lo == 0:
        phi_min = lo
    elif d_hi == 0:
        phi_min = hi
    elif d_lo < 0 < d_hi:
        phi_min = brentq(potential_derivative, lo, hi, args=(a, n, pe, 1), xtol=_XTOL, rtol=4 * np.finfo(float).eps)
    else:
        raise SnailError(f"derivative does not bracket a minimum for alpha={a}, n={n}, phi_ext={spec.phi_ext}")
    c2 = potential_derivative(phi_min, a, n, pe, 2)
    if not c2 > 0:
        raise SnailError(f"non-positive curvature c2={c2} at the minimum")
    return TaylorCoeffs(
        phi_min=float(phi_min),
        c2=float(c2),
        c3=float(potential_derivative(phi_min, a, n, pe, 3)),
        c4=float(potential_derivative(phi_min, a, n, pe, 4)),
    )


@dataclass(frozen=True)
class FluxPoint:
    phi_ext: float
    coeffs: TaylorCoeffs
    omega0: float
    participation: float
    g3: float
    g4: float
    snail_inductance: float  # H, all SNAILs in series

    @property
    def g4_star(self) -> float:
        return self.g4 - 5.0 * self.g3**2 / self.omega0

    @property
    def kerr(self) -> float:
        return kerr_lowest_order(self.g3, self.g4, self.omega0)


def flux_point(spec: SnailSpec) -> FluxPoint:
    coeffs = taylor_coeffs(spec)
    c2_zero = taylor_coeffs(spec.at_flux(0.0)).c2
    p0 = spec.participation
    ratio = p0 * c2_zero / coeffs.c2  # junction inductance relative to its zero-flux share
    omega0 = spec.resonator_frequency_scale / np.sqrt((1.0 - p0) + ratio)
    p = ratio / ((1.0 - p0) + ratio)
    m = spec.n_snails
    ec = np.pi * spec.resonator_impedance * spec.resonator_frequency_scale / R_K  # E_C/hbar, rad/s
    g3 = p**2 / (6.0 * m) * (coeffs.c3 / coeffs.c2) * omega0 * np.sqrt(ec / omega0)
    g4 = p**3 / (12.0 * m**2) * (coeffs.c4 / coeffs.c2) * ec
    return FluxPoint(
        phi_ext=spec.phi_ext,
        coeffs=coeffs,
        omega0=float(omega0),
        participation=float(p),
        g3=float(g3),
        g4=float(g4),
        snail_inductance=float(m * spec.lj / coeffs.c2),
    )


def device_from_flux(spec: SnailSpec, kappa_ext: float, kappa_int: float = 0.0) -> DeviceParams:
    """DeviceParams at the configured flux; coupling rates are supplied by the caller."""
    fp = flux_point(spec)
    return DeviceParams(omega0=fp.omega0, g3=fp.g3, g4=fp.g4, kappa_ext=kappa_ext, kappa_int=kappa_int)


def josephson_energy(lj: float) -> float:
    """E_J in joules for inductance ``lj``."""
    return (FLUX_QUANTUM / TWO_PI) ** 2 / lj


def flux_sweep(spec: SnailSpec, fluxes) -> list[FluxPoint]:
    return [flux_point(spec.at_flux(float(f))) for f in fluxes]


@dataclass(frozen=True)
class TuningBand:
    omega_max: float
    omega_min: float
    monotone: bool

    @property
    def span(self) -> float:
        return self.omega_max - self.omega_min


def tuning_band(points: list[FluxPoint]) -> TuningBand:
    """Frequency extent of a flux sweep and whether omega0 is monotone along it."""
    w = np.array([p.omega0 for p in points])
    steps = np.diff(w)
    monotone = bool(np.all(steps <= 0) or np.all(steps >= 0))
    return TuningBand(omega_max=float(w.max()), omega_min=float(w.min()), monotone=monotone)


def sign_changes(points: list[FluxPoint], attr: str = "g4_star") -> list[float]:
    """Linearly interpolated flux values where ``attr`` changes sign along a sweep."""
    flux = np.array([p.phi_ext for p in points])
    vals = np.array([getattr(p, attr) for p in points])
    out = []
    for k in range(len(vals) - 1):
        if vals[k] == 0:
            out.append(float(flux[k]))
        elif vals[k] * vals[k + 1] < 0:
            t = vals[k] / (vals[k] - vals[k + 1])
            out.append(float(flux[k] + t * (flux[k + 1] - flux[k])))
    return out


__all__ = [
    "SnailSpec",
    "TaylorCoeffs",
    "FluxPoint",
    "TuningBand",
    "taylor_coeffs",
    "flux_point",
    "device_from_flux",
    "flux_sweep",
    "tuning_band",
    "sign_changes",
    "potential",
    "potential_derivative",
    "josephson_energy",
]
