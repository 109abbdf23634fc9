from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from spasqueeze.core import DeviceParams, EffectiveParams, stability_discriminant

W = 2 * np.pi
ORACLES = json.loads((Path(__file__).parent / "data" / "oracles.json").read_text())


@pytest.fixture(scope="session")
def oracle():
    return ORACLES


def eff_from(delta_eff, g_eff, kappa, kerr=0.0):
    return EffectiveParams(delta_eff, g_eff, kerr, stability_discriminant(delta_eff, g_eff, kappa))


def random_stable_point(rng, lossless=False, max_fraction=0.98):
    """(device, eff, omega) with g_eff below threshold by a random margin."""
    kappa_ext = W * rng.uniform(10e6, 1e9)
    kappa_int = 0.0 if lossless else kappa_ext * rng.uniform(0.0, 0.5)
    kappa = kappa_ext + kappa_int
    delta_eff = W * rng.uniform(-500e6, 500e6)
    g = rng.uniform(0.0, max_fraction) * np.sqrt(delta_eff**2 + kappa**2 / 4)
    omega = W * rng.uniform(-500e6, 500e6)
    device = DeviceParams(W * 7e9, W * 2e6, 0.0, kappa_ext, kappa_int)
    return device, eff_from(delta_eff, g, kappa), omega


def golden_min(f, lo, hi, iters=200):
    """Plain golden-section minimum of a scalar function on [lo, hi]."""
    r = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return min((fc, c), (fd, d), (f(x), x))


def numeric_theta_min(variance, n_grid=4096):
    """Brute-force minimum of a pi-periodic variance: dense grid then golden refinement."""
    grid = np.linspace(0.0, np.pi, n_grid, endpoint=False)
    vals = variance(grid)
    k = int(np.argmin(vals))
    step = grid[1] - grid[0]
    return golden_min(lambda t: float(variance(t)), grid[k] - step, grid[k] + step)
