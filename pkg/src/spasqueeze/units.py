"""Physical constants and unit conversions.

All model code works in SI with angular frequencies (rad/s). The helpers here
are the only place cyclic <-> angular, dB and dBm conversions happen.
"""

from __future__ import annotations

import numpy as np
from scipy import constants as _c

# SI-exact since the 2019 redefinition; identical in CODATA 2018 and later.
HBAR = _c.hbar
H_PLANCK = _c.h
K_B = _c.k
E_CHARGE = _c.e
FLUX_QUANTUM = _c.h / (2 * _c.e)
R_K = _c.h / _c.e**2

TWO_PI = 2.0 * np.pi


def hz_to_rad(f):
    """Cyclic frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def rad_to_hz(w):
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


def db(ratio):
    """Power ratio to decibels, 10*log10."""
    return 10.0 * np.log10(ratio)


def from_db(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def variance_db(variance):
    """Quadrature variance in dB relative to the vacuum variance 1/2."""
    return 10.0 * np.log10(2.0 * np.asarray(variance, dtype=float))


def variance_from_db(value_db):
    return 0.5 * from_db(value_db)


def watt_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)


def dbm_to_watt(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)
