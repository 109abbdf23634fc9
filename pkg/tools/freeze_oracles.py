"""Regenerate tests/data/oracles.json from independent high-precision evaluations.

Nothing here imports the package: each value is recomputed from the defining
formulas with mpmath at 40 digits (SNAIL derivatives by mpmath's own
numerical differentiation, squeezing minima by root-finding on dS/dtheta).
Requires mpmath; run ``python tools/freeze_oracles.py`` from the repo root.
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
TWO_PI = 2 * mp.pi
H_EXACT = mp.mpf("6.62607015e-34")
HBAR = H_EXACT / TWO_PI
H = mp.mpf("6.62607015e-34")
KB = mp.mpf("1.380649e-23")


def scattering(delta_eff, g, kappa_ext, kappa_int, omega=0):
    k = kappa_ext + kappa_int
    m = mp.matrix([[1j * omega - 1j * delta_eff - k / 2, -1j * g], [1j * g, 1j * omega + 1j * delta_eff - k / 2]])
    r = m**-1
    s_ext = -kappa_ext * r - mp.eye(2)
    s_int = -mp.sqrt(kappa_ext * kappa_int) * r
    return s_ext, s_int


def variance(blocks, theta):
    tot = 0
    for s in blocks:
        tot += abs(s[0, 0] * mp.exp(-1j * theta) + mp.conj(s[0, 1]) * mp.exp(1j * theta)) ** 2
    return tot / 2


def min_variance(blocks):
    # coarse grid then a root of dS/dtheta
    thetas = [mp.pi * i / 720 for i in range(720)]
    best = min(thetas, key=lambda t: variance(blocks, t))
    t = mp.findroot(lambda th: mp.diff(lambda x: variance(blocks, x), th), best)
    return variance(blocks, t), t


def vdb(v):
    return 10 * mp.log10(2 * v)


def squeeze_case(kappa_hz, g3_hz, n_p, ext_fraction, eta):
    k = TWO_PI * kappa_hz
    ke = ext_fraction * k
    g = 4 * TWO_PI * g3_hz * mp.sqrt(n_p)
    s_min, _ = min_variance(scattering(0, g, ke, k - ke))
    return vdb(eta * s_min + (1 - eta) / 2)


def snail_coeffs(alpha, n, flux):
    pe = TWO_PI * flux
    u = lambda p: -alpha * mp.cos(p) - n * mp.cos((pe - p) / n)  # noqa: E731
    du = lambda p: mp.diff(u, p)  # noqa: E731
    # the unique well sits between 0 and phi_ext for a single-well SNAIL
    p0 = mp.findroot(du, pe * n / (n + 1) if flux != 0 else mp.mpf("0.01"))
    return p0, [mp.diff(u, p0, k) for k in (2, 3, 4)]


def main():
    out = {}
    out["kerr_lowest_order_hz"] = 12 * (0 - 5 * (TWO_PI * 2e6) ** 2 / (TWO_PI * mp.mpf("7.25e9"))) / TWO_PI
    k, g = TWO_PI * 340e6, TWO_PI * 100e6
    d0 = (k / 2) ** 2 - g**2
    out["gain_il_example"] = 1 + k**2 * g**2 / d0**2
    s_ext, _ = scattering(0, g, k, 0)
    out["gain_il_example_matrix"] = abs(s_ext[0, 0]) ** 2
    out["s11_off_power_ext09"] = abs(mp.mpf("0.9") * k / (k / 2) - 1) ** 2
    out["s_min_db_g10"] = vdb((mp.sqrt(10) - 3) ** 2 / 2)
    out["n900_point_lossy_eta06_db"] = squeeze_case(340e6, 2e6, 900, mp.mpf("0.8"), mp.mpf("0.6"))
    out["n900_point_lossless_db"] = squeeze_case(340e6, 2e6, 900, 1, 1)
    out["n900_point_ext09_db"] = squeeze_case(340e6, 2e6, 900, mp.mpf("0.9"), 1)
    g100 = mp.mpf(100)
    out["antisqueeze_g100"] = (mp.sqrt(g100) + mp.sqrt(g100 - 1)) ** 2
    out["antisqueeze_g10"] = (mp.sqrt(10) + 3) ** 2
    ke, w0, kk = TWO_PI * 340e6, TWO_PI * mp.mpf("7.25e9"), TWO_PI * 70e3
    iip3 = ke**2 * HBAR * w0 / kk / (mp.sqrt(10) + 1) ** 3
    out["iip3_example_w"] = iip3
    out["iip3_example_dbm"] = 10 * mp.log10(iip3 / mp.mpf("1e-3"))
    out["imd_denominator_min"] = (mp.sqrt(10) - 1) ** 3
    out["imd_denominator_max"] = (mp.sqrt(10) + 1) ** 3
    eta = mp.mpf("0.0415")
    out["reference_squeezing_db"] = 10 * mp.log10((mp.power(10, mp.mpf("-0.080") / 10) - (1 - eta)) / eta)
    f = mp.mpf("7.25e9")
    out["eta_hot_4k"] = 1 / (1 + 2 * KB * 4 / (H * f))
    out["tsys_from_eta_0415"] = (1 / eta - 1) * H * f / (2 * KB)
    out["tsys_from_noise"] = mp.mpf("5.52e-17") / (KB * mp.mpf("1e6") * 1)
    chi, kc = TWO_PI * mp.mpf("1.88e6"), TWO_PI * mp.mpf("2.12e6")
    out["drive_power_w"] = HBAR * TWO_PI * f * mp.pi * (TWO_PI * 100e6) ** 2 / (4 * mp.mpf("1e-6") * chi * kc)
    out["drive_photons"] = mp.pi / (chi * mp.mpf("1e-6"))
    gphi = 1 / mp.mpf("22e-6") - 1 / (2 * mp.mpf("18e-6"))
    out["thermal_bound_angular"] = gphi * (kc**2 + chi**2) / (kc * chi**2)
    out["thermal_bound_cyclic"] = gphi * ((kc / TWO_PI) ** 2 + (chi / TWO_PI) ** 2) / ((kc / TWO_PI) * (chi / TWO_PI) ** 2)
    out["eta_total_example"] = mp.mpf("0.85") * mp.mpf("0.494") * mp.mpf("0.0415")
    for flux in ("0.3", "0.45"):
        p0, (c2, c3, c4) = snail_coeffs(mp.mpf("0.1"), 3, mp.mpf(flux))
        out[f"snail_a01_n3_f{flux}"] = {"phi_min": p0, "c2": c2, "c3": c3, "c4": c4}
    p0, (c2, c3, c4) = snail_coeffs(mp.mpf("0.1"), 3, mp.mpf("0.5"))
    out["snail_a01_n3_f0.5"] = {"phi_min": p0, "c2": c2, "c3": c3, "c4": c4}

    def conv(v):
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        return float(v)

    path = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"
    path.write_text(json.dumps({k: conv(v) for k, v in out.items()}, indent=2, sort_keys=True) + "\n")
    print(path.read_text())


if __name__ == "__main__":
    main()
