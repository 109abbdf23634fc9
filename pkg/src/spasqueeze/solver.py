"""Pump strength for a target gain under the Kerr Stark shift, and parameter sweeps.

The Kerr coefficient is held fixed within a solve. Two retuning modes:

``fixed_delta``
    Detuning stays put, so ``Delta_eff = Delta + (8/9) K n_p`` drifts with pump.
``zero_delta_eff``
    Detuning follows the pump, ``Delta = -(8/9) K n_p``, keeping
    ``Delta_eff = 0``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .core import (
    STARK_FACTOR,
    DeviceParams,
    EffectiveParams,
    dressed_params,
    gain_il,
    s11_pump_off,
    s_obs,
)
from .errors import ModelError, UnreachableGainError
from .imd import ImdSetup, iip3_at, pumped_susceptibility
from .snail import SnailSpec, device_from_flux, flux_point
from .units import db, variance_db

RetuneMode = Literal["fixed_delta", "zero_delta_eff"]
GainReference = Literal["il", "off"]

GAIN_TOL_DB = 0.01
MAX_ITER = 200
_SCAN_POINTS = 400


@dataclass(frozen=True)
class SolveRequest:
    device: DeviceParams
    delta: float
    kerr: float
    target_gain: float
    retune_mode: RetuneMode = "fixed_delta"
    reference: GainReference = "il"

    def __post_init__(self):
        if not self.target_gain >= 1:
            raise ValueError(f"target gain must be >= 1, got {self.target_gain}")
        if self.retune_mode not in ("fixed_delta", "zero_delta_eff"):
            raise ValueError(f"unknown retune mode {self.retune_mode!r}")
        if self.reference not in ("il", "off"):
            raise ValueError(f"unknown gain reference {self.reference!r}")


@dataclass(frozen=True)
class SolveResult:
    n_p: float
    delta: float  # detuning actually used (differs from the request in zero_delta_eff mode)
    eff: EffectiveParams
    achieved_gain: float
    converged: bool
    g_max: float
    target_gain: float
    iterations: int = 0


class _GainCurve:
    """Gain as a function of ``n_p`` for one request."""

    def __init__(self, device: DeviceParams, delta: float, kerr: float, mode: RetuneMode, reference: GainReference):
        self.device = device
        self.delta = delta
        self.kerr = kerr
        self.mode = mode
        self.reference = reference
        self.g3 = device.g3
        self.kappa = device.kappa

    def detuning(self, n: float) -> float:
        if self.mode == "zero_delta_eff":
            return -STARK_FACTOR * self.kerr * n
        return self.delta

    def eff(self, n: float) -> EffectiveParams:
        return dressed_params(self.detuning(n), n, self.g3, self.kerr, self.kappa)

    def gain(self, n: float) -> float:
        e = self.eff(n)
        if not e.d0 > 0:
            return np.inf
        g = gain_il(e, self.device)
        if self.reference == "off":
            g /= abs(s11_pump_off(self.device, self.detuning(n))) ** 2
        return g

    def n_stop(self) -> float | None:
        """Smallest positive pump population where ``D0`` vanishes, if any."""
        g2 = 16.0 * self.g3**2
        if g2 == 0:
            return None
        if self.mode == "zero_delta_eff":
            return self.kappa**2 / (4.0 * g2)
        c = STARK_FACTOR * self.kerr
        a0 = self.delta**2 + self.kappa**2 / 4.0
        b = 2.0 * self.delta * c - g2
        if c == 0:
            return a0 / g2
        roots = np.roots([c * c, b, a0])
        real = [r.real for r in roots if abs(r.imag) <= 1e-12 * abs(r.real) and r.real > 0]
        return min(real) if real else None

    def search_limit(self) -> float:
        """Upper end of the pump range worth searching when the gain stays bounded."""
        g2 = 16.0 * self.g3**2
        c = STARK_FACTOR * self.kerr
        a0 = self.delta**2 + self.kappa**2 / 4.0
        b = 2.0 * self.delta * c - g2
        # peak of n / D0(n)^2, which bounds the lossless gain curve
        vertex = (-b + np.sqrt(b * b + 12.0 * c * c * a0)) / (6.0 * c * c)
        return 10.0 * max(vertex, a0 / g2)


def max_gain_point(
    device: DeviceParams,
    delta: float,
    kerr: float,
    mode: RetuneMode = "fixed_delta",
    reference: GainReference = "il",
) -> tuple[float, float]:
    """``(g_max, n_at_max)``; ``g_max = inf`` when the instability threshold is reachable."""
    curve = _GainCurve(device, delta, kerr, mode, reference)
    if device.g3 == 0:
        return curve.gain(0.0), 0.0
    stop = curve.n_stop()
    if stop is not None:
        return np.inf, stop
    hi = curve.search_limit()
    grid = np.linspace(0.0, hi, _SCAN_POINTS)
    vals = np.array([curve.gain(n) for n in grid])
    k = int(np.argmax(vals))
    if k == 0 or k == len(grid) - 1:
        return float(vals[k]), float(grid[k])
    res = minimize_scalar(lambda n: -curve.gain(n), bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden")
    if -res.fun < vals[k]:
        return float(vals[k]), float(grid[k])
    return float(-res.fun), float(res.x)


def max_gain(device: DeviceParams, delta: float, kerr: float, mode: RetuneMode = "fixed_delta") -> float:
    """Supremum of ``G_IL`` over the pump population; ``inf`` if unbounded."""
    return max_gain_point(device, delta, kerr, mode)[0]


def solve_pump_for_gain(req: SolveRequest, *, raise_unreachable: bool = True) -> SolveResult:
    """Smallest ``n_p`` whose gain equals ``req.target_gain``.

    The pump range is scanned for the first point at or above target
    (below the threshold, or up to the gain peak when Kerr caps it) and
    the crossing is refined by bisection on the dB error.

    Raises
    ------
    UnreachableGainError
        If the target exceeds the reachable maximum and ``raise_unreachable``
        is set; otherwise a non-converged result carrying ``g_max`` is returned.
    """
    curve = _GainCurve(req.device, req.delta, req.kerr, req.retune_mode, req.reference)
    target = req.target_gain
    g0 = curve.gain(0.0)
    # the unpumped gain is 1 up to rounding
    if g0 >= target * (1.0 - 1e-9):
        return SolveResult(0.0, curve.detuning(0.0), curve.eff(0.0), g0, True, max_gain_point(
            req.device, req.delta, req.kerr, req.retune_mode, req.reference)[0], target)

    g_max, n_max = max_gain_point(req.device, req.delta, req.kerr, req.retune_mode, req.reference)
    if g_max < target:
        if raise_unreachable:
            raise UnreachableGainError(target, g_max, n_max)
        return SolveResult(n_max, curve.detuning(n_max), curve.eff(n_max), g_max, False, g_max, target)

    hi = n_max
    # ordinary scan toward the pole/peak; geometric refinement near a pole where the gain diverges
    grid = np.concatenate([np.linspace(0.0, hi, _SCAN_POINTS, endpoint=False), hi * (1.0 - 0.5 ** np.arange(9, 60))])
    lo_n, hi_n = 0.0, None
    for n in grid[1:]:
        if curve.gain(n) >= target:
            hi_n = n
            break
        lo_n = n
    if hi_n is None:
        hi_n = hi

    target_db = db(target)

    def err(n):
        g = curve.gain(n)
        return np.inf if not np.isfinite(g) else db(g) - target_db

    n_sol, info = bisect(err, lo_n, hi_n, xtol=1e-15 * max(hi_n, 1.0), rtol=4 * np.finfo(float).eps,
                         maxiter=MAX_ITER, full_output=True, disp=False)
    achieved = curve.gain(n_sol)
    ok = bool(abs(db(achieved) - target_db) <= GAIN_TOL_DB)
    return SolveResult(float(n_sol), curve.detuning(n_sol), curve.eff(n_sol), float(achieved), ok, g_max, target, info.iterations)


# ----------------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepPoint:
    label: float  # grid coordinate (detuning, flux or Kerr) reported in the row
    device: DeviceParams
    delta: float
    kerr: float


def delta_grid(device: DeviceParams, deltas: Sequence[float], kerr: float) -> list[SweepPoint]:
    return [SweepPoint(float(d), device, float(d), kerr) for d in deltas]


def kerr_grid(device: DeviceParams, delta: float, kerrs: Sequence[float]) -> list[SweepPoint]:
    return [SweepPoint(float(k), device, delta, float(k)) for k in kerrs]


def flux_grid(
    spec: SnailSpec,
    fluxes: Sequence[float],
    kappa_ext: float,
    kappa_int: float = 0.0,
    delta: float = 0.0,
    kerr: float | None = None,
) -> list[SweepPoint]:
    """Sweep points across flux; Kerr defaults to the lowest-order value at each flux."""
    out = []
    for f in fluxes:
        s = spec.at_flux(float(f))
        dev = device_from_flux(s, kappa_ext, kappa_int)
        k = flux_point(s).kerr if kerr is None else kerr
        out.append(SweepPoint(float(f), dev, delta, k))
    return out


@dataclass
class SweepRow:
    label: float
    target_gain: float
    delta: float = float("nan")
    n_p: float = float("nan")
    gain_il: float = float("nan")
    delta_eff: float = float("nan")
    g_eff: float = float("nan")
    theta_g: float = float("nan")
    s_obs: float = float("nan")
    iip3: float = float("nan")
    g_max: float = float("nan")
    ok: bool = False
    error: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def s_obs_db(self) -> float:
        return float(variance_db(self.s_obs)) if np.isfinite(self.s_obs) else float("nan")


def _sweep_one(args) -> SweepRow:
    point, target, eta, mode, setup = args
    row = SweepRow(label=point.label, target_gain=target)
    try:
        res = solve_pump_for_gain(SolveRequest(point.device, point.delta, point.kerr, target, mode))
    except UnreachableGainError as exc:
        row.g_max = exc.g_max
        row.error = "unreachable"
        return row
    except (ModelError, ValueError) as exc:
        row.error = str(exc)
        return row
    row.delta = res.delta
    row.n_p = res.n_p
    row.gain_il = res.achieved_gain
    row.delta_eff = res.eff.delta_eff
    row.g_eff = res.eff.g_eff
    row.g_max = res.g_max
    try:
        row.theta_g = pumped_susceptibility(res.eff, point.device, 0.0 if setup is None else setup.offset).theta_g
        row.s_obs = s_obs(res.eff, point.device, eta)
        row.iip3 = iip3_at(point.device, res.eff, setup).iip3
    except (ModelError, ValueError) as exc:
        row.error = str(exc)
        return row
    row.ok = res.converged
    if not res.converged:
        row.error = "not converged"
    return row


def sweep(
    points: Sequence[SweepPoint],
    targets: Sequence[float],
    eta: float = 1.0,
    mode: RetuneMode = "fixed_delta",
    setup: ImdSetup | None = None,
    workers: int | None = None,
) -> list[SweepRow]:
    """Solve every (grid point, target) pair; rows come back in grid-major order.

    Failed solves are kept with ``ok=False`` and a short reason. With
    ``workers > 1`` the solves run in a process pool; the order is unchanged.
    """
    if len(points) == 0:
        raise ValueError("sweep grid is empty")
    jobs = [(p, float(t), eta, mode, setup) for p in points for t in targets]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]
