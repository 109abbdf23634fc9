"""Run configuration: schema, quantity strings and conversion to model objects.

Human-facing frequencies are cyclic (Hz, with SI prefixes such as ``"340 MHz"``);
this module is the only place they become angular rates.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from .chain import CalibrationRecord, EfficiencyChain
from .core import STARK_FACTOR, DeviceParams, PumpPoint, kerr_lowest_order
from .snail import SnailSpec
from .units import TWO_PI, dbm_to_watt

_PREFIX = {"": 1.0, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}
_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


def parse_quantity(value, unit: str) -> float:
    """Parse ``value`` into SI ``unit``; bare numbers are taken as already in that unit.

    ``"340 MHz"`` -> 3.4e8 for ``unit="Hz"``; ``"-90 dBm"`` is accepted for
    watts; ``"44 pH"``, ``"18 us"`` and ``"50 Ohm"`` work the same way.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a quantity in {unit}, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a number or quantity string in {unit}, got {value!r}")
    m = _NUMBER.match(value)
    if not m:
        raise ValueError(f"cannot parse quantity {value!r}")
    number, suffix = float(m.group(1)), m.group(2)
    if suffix == "":
        return number
    if unit == "W" and suffix == "dBm":
        return float(dbm_to_watt(number))
    aliases = {"Ohm": ("Ohm", "ohm", "Ω")}.get(unit, (unit,))
    for base in aliases:
        if suffix.endswith(base) and suffix[: -len(base)] in _PREFIX:
            return number * _PREFIX[suffix[: -len(base)]]
    raise ValueError(f"unit of {value!r} is not compatible with {unit}")


def _q(unit: str):
    return BeforeValidator(lambda v: parse_quantity(v, unit))


Hz = Annotated[float, _q("Hz")]
Seconds = Annotated[float, _q("s")]
Watts = Annotated[float, _q("W")]
Kelvin = Annotated[float, _q("K")]
Henry = Annotated[float, _q("H")]
Ohms = Annotated[float, _q("Ohm")]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DeviceConfig(_Block):
    f0: Hz
    g3: Hz
    g4: Hz = 0.0
    kappa_ext: Hz
    kappa_int: Hz = 0.0
    kerr: Hz | None = None  # K/2pi; lowest-order value from g3, g4 when omitted

    def params(self) -> DeviceParams:
        return DeviceParams.from_hz(self.f0, self.g3, self.g4, self.kappa_ext, self.kappa_int)

    def kerr_rad(self) -> float:
        if self.kerr is not None:
            return TWO_PI * self.kerr
        return kerr_lowest_order(TWO_PI * self.g3, TWO_PI * self.g4, TWO_PI * self.f0)


class PumpConfig(_Block):
    n_p: float = Field(0.0, ge=0)
    delta: Hz = 0.0  # omega0 - omega_p/2, over 2 pi
    zero_delta_eff: bool = False  # retune delta to cancel the Stark shift
    allow_above_threshold: bool = False

    def point(self, device: DeviceParams, kerr: float) -> PumpPoint:
        delta = -STARK_FACTOR * kerr * self.n_p if self.zero_delta_eff else TWO_PI * self.delta
        return PumpPoint.detuned(device, delta, self.n_p)


class ChainConfig(_Block):
    eta_cold: float = Field(1.0, ge=0, le=1)
    eta_hot: float = Field(1.0, ge=0, le=1)

    def chain(self, device: DeviceParams) -> EfficiencyChain:
        return EfficiencyChain.from_device(device, self.eta_cold, self.eta_hot)


class SolveConfig(_Block):
    target_gain_db: float = Field(20.0, ge=0)
    retune_mode: Literal["fixed_delta", "zero_delta_eff"] = "fixed_delta"
    reference: Literal["il", "off"] = "il"


class GridConfig(_Block):
    start: float
    stop: float
    points: int = Field(..., ge=1)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


class SweepConfig(_Block):
    kind: Literal["delta", "flux", "kerr"] = "delta"
    values: list[float] | None = None  # Hz for delta/kerr, Phi0 for flux
    grid: GridConfig | None = None
    targets_db: list[float] = Field(default_factory=lambda: [20.0])
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _one_grid(self):
        if (self.values is None) == (self.grid is None):
            raise ValueError("give exactly one of 'values' or 'grid'")
        if self.values is not None and len(self.values) == 0:
            raise ValueError("sweep grid is empty")
        return self

    def points(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float) if self.values is not None else self.grid.values()


class ImdConfig(_Block):
    offset: Hz = 5e6
    spacing: Hz = 1e6
    p_start: Watts = 1e-19
    p_stop: Watts = 1e-16
    points: int = Field(16, ge=4)
    n_fit: int | None = Field(None, ge=4)
    measured_iip3: Watts | None = None


class McConfig(_Block):
    shots: int = Field(1_000_000, ge=2)
    histograms: bool = True


class CalibrationConfig(_Block):
    f_s: Hz = 7.25e9
    t1: Seconds | None = None
    t2r: Seconds | None = None
    chi: Hz | None = None
    kappa_c: Hz | None = None
    f_ce: Hz | None = None
    f_cg: Hz | None = None
    f_d: Hz | None = None
    delta_theta_max: float | None = None
    ramsey_delay: Seconds | None = None
    p_meas: Watts | None = None
    p_n_meas: Watts | None = None
    bandwidth: Hz | None = None
    g_line: float | None = None
    t_sys: Kelvin | None = None
    eta_int: float = Field(1.0, ge=0, le=1)
    eta_cold: float = Field(1.0, ge=0, le=1)

    def record(self) -> CalibrationRecord:
        ang = lambda f: None if f is None else TWO_PI * f  # noqa: E731
        return CalibrationRecord(
            t1=self.t1,
            t2r=self.t2r,
            chi=ang(self.chi),
            kappa_c=ang(self.kappa_c),
            omega_ce=ang(self.f_ce),
            omega_cg=ang(self.f_cg),
            omega_d=ang(self.f_d),
            delta_theta_max=self.delta_theta_max,
            ramsey_delay=self.ramsey_delay,
            p_meas=self.p_meas,
            p_n_meas=self.p_n_meas,
            bandwidth=self.bandwidth,
            g_line=self.g_line,
            t_sys=self.t_sys,
        )


class SnailConfig(_Block):
    n_junctions: int = 3
    alpha: float = 0.05
    lj: Henry = 44e-12
    participation: float = 0.7
    impedance: Ohms = 50.0
    f_max: Hz = 8.2e9
    n_snails: int = 20
    flux: GridConfig = Field(default_factory=lambda: GridConfig(start=0.0, stop=0.5, points=51))

    def spec(self, phi_ext: float = 0.0) -> SnailSpec:
        return SnailSpec(
            n_junctions=self.n_junctions,
            alpha=self.alpha,
            lj=self.lj,
            participation=self.participation,
            phi_ext=phi_ext,
            resonator_impedance=self.impedance,
            resonator_frequency_scale=TWO_PI * self.f_max,
            n_snails=self.n_snails,
        )


class OutputConfig(_Block):
    format: Literal["csv", "json"] = "csv"
    path: str | None = None
    seed: int = Field(0, ge=0, lt=2**64)


class RunConfig(_Block):
    device: DeviceConfig | None = None
    pump: PumpConfig = Field(default_factory=PumpConfig)
    chain: ChainConfig = Field(default_factory=ChainConfig)
    solve: SolveConfig = Field(default_factory=SolveConfig)
    sweep: SweepConfig | None = None
    imd: ImdConfig = Field(default_factory=ImdConfig)
    mc: McConfig = Field(default_factory=McConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    snail: SnailConfig = Field(default_factory=SnailConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def require_device(self) -> DeviceConfig:
        if self.device is None:
            raise ValueError("this subcommand needs a 'device' block")
        return self.device


def load_config(path: str | Path | None) -> RunConfig:
    """Read a JSON or YAML file (by extension; YAML otherwise) and validate it."""
    if path is None:
        return RunConfig()
    p = Path(path)
    text = p.read_text()
    data = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    return RunConfig.model_validate(data or {})


def resolved(cfg: RunConfig) -> dict:
    """Fully defaulted config in SI units, as recorded in metadata."""
    return cfg.model_dump(mode="json")
