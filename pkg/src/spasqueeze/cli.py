"""Command-line entry point: ``spasqueeze <subcommand> --config run.yaml``.

Exit codes: 0 ok, 1 configuration error, 2 model error (instability,
unreachable gain, no solution), 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from .artifacts import emit_table, write_metadata
from .chain import (
    drive_power_from_ramsey,
    eta_hot_from_tsys,
    line_gain,
    thermal_bound_conventions,
    tsys_from_noise,
)
from .config import RunConfig, load_config, resolved
from .core import (
    effective_params,
    gain_il,
    optimal_squeeze,
    s11_pump_off,
    scattering_set,
)
from .errors import ModelError
from .heterodyne import s_meas_pipeline
from .imd import ImdSetup, iip3_at, imd_sweep_simulate, intercept_fit, kerr_from_iip3, pumped_susceptibility
from .snail import flux_sweep, sign_changes, tuning_band
from .solver import SolveRequest, SweepPoint, delta_grid, flux_grid, kerr_grid, solve_pump_for_gain, sweep
from .units import TWO_PI, db, from_db, variance_db, watt_to_dbm

OUTPUT_DIR_ENV = "SPASQUEEZE_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("spasqueeze")


class _Run:
    """Rows, extra artifacts and summary results produced by one subcommand."""

    def __init__(self, columns: list[str]):
        self.columns = columns
        self.rows: list[dict] = []
        self.results: dict = {}
        self.extra: dict[str, tuple[list[str], list[dict]]] = {}


def _hz(w: float) -> float:
    return float(w) / TWO_PI


def _operating_point(cfg: RunConfig):
    dcfg = cfg.require_device()
    device = dcfg.params()
    kerr = dcfg.kerr_rad()
    pump = cfg.pump.point(device, kerr)
    return device, kerr, pump, effective_params(device, pump, kerr)


def cmd_gain(cfg: RunConfig, seed: int) -> _Run:
    device, kerr, pump, eff = _operating_point(cfg)
    eff.require_stable()
    g = gain_il(eff, device)
    loss = abs(s11_pump_off(device, pump.delta)) ** 2
    run = _Run([])
    run.rows.append(
        {
            "n_p": pump.n_p,
            "delta_hz": _hz(pump.delta),
            "delta_eff_hz": _hz(eff.delta_eff),
            "g_eff_hz": _hz(eff.g_eff),
            "kerr_hz": _hz(kerr),
            "d0_rad2_s2": eff.d0,
            "stable": eff.stable,
            "gain_il": g,
            "gain_il_db": float(db(g)),
            "insertion_loss_db": float(db(loss)),
            "gain_db": float(db(g / loss)),
        }
    )
    return run


def cmd_squeeze(cfg: RunConfig, seed: int) -> _Run:
    device, kerr, pump, eff = _operating_point(cfg)
    if not eff.stable and not cfg.pump.allow_above_threshold:
        eff.require_stable()
    scat = scattering_set(eff, device, 0.0, check_stability=not cfg.pump.allow_above_threshold)
    rep = optimal_squeeze(scat)
    chain = cfg.chain.chain(device)
    eta = chain.eta_detection
    s_obs = eta * rep.s_min + 0.5 * (1.0 - eta)
    run = _Run([])
    run.rows.append(
        {
            "n_p": pump.n_p,
            "delta_hz": _hz(pump.delta),
            "delta_eff_hz": _hz(eff.delta_eff),
            "g_eff_hz": _hz(eff.g_eff),
            "stable": eff.stable,
            "gain_il_db": rep.g_il_db,
            "theta_min_rad": rep.theta_min,
            "s_min": rep.s_min,
            "s_min_db": rep.s_min_db,
            "anti_s_db": rep.anti_s_db,
            "eta": eta,
            "s_obs": s_obs,
            "s_obs_db": float(variance_db(s_obs)),
        }
    )
    if not eff.stable:
        log.warning("operating point is above the instability threshold; values are formal only")
    return run


def cmd_solve(cfg: RunConfig, seed: int) -> _Run:
    dcfg = cfg.require_device()
    device, kerr = dcfg.params(), dcfg.kerr_rad()
    s = cfg.solve
    res = solve_pump_for_gain(
        SolveRequest(device, TWO_PI * cfg.pump.delta, kerr, float(from_db(s.target_gain_db)), s.retune_mode, s.reference)
    )
    run = _Run([])
    run.rows.append(
        {
            "target_gain_db": s.target_gain_db,
            "n_p": res.n_p,
            "delta_hz": _hz(res.delta),
            "delta_eff_hz": _hz(res.eff.delta_eff),
            "g_eff_hz": _hz(res.eff.g_eff),
            "achieved_gain_db": float(db(res.achieved_gain)),
            "g_max_db": float(db(res.g_max)),
            "converged": res.converged,
            "iterations": res.iterations,
        }
    )
    return run


SWEEP_COLUMNS = [
    "label",
    "target_gain_db",
    "delta_hz",
    "n_p",
    "gain_il_db",
    "delta_eff_hz",
    "g_eff_hz",
    "theta_g_rad",
    "s_obs_db",
    "iip3_w",
    "g_max_db",
    "ok",
    "error",
]


def cmd_sweep(cfg: RunConfig, seed: int) -> _Run:
    if cfg.sweep is None:
        raise ValueError("the sweep subcommand needs a 'sweep' block")
    dcfg = cfg.require_device()
    device, kerr = dcfg.params(), dcfg.kerr_rad()
    sc = cfg.sweep
    grid = sc.points()
    delta = TWO_PI * cfg.pump.delta
    if sc.kind == "delta":
        points = [SweepPoint(float(g), p.device, p.delta, p.kerr) for g, p in zip(grid, delta_grid(device, TWO_PI * grid, kerr))]
    elif sc.kind == "kerr":
        points = [SweepPoint(float(g), p.device, p.delta, p.kerr) for g, p in zip(grid, kerr_grid(device, delta, TWO_PI * grid))]
    else:
        points = flux_grid(cfg.snail.spec(), grid, device.kappa_ext, device.kappa_int, delta, None if dcfg.kerr is None else TWO_PI * dcfg.kerr)
    targets = [float(from_db(t)) for t in sc.targets_db]
    rows = sweep(points, targets, cfg.chain.chain(device).eta_detection, cfg.solve.retune_mode, workers=sc.workers)
    run = _Run(SWEEP_COLUMNS)
    for r in rows:
        run.rows.append(
            {
                "label": r.label,
                "target_gain_db": float(db(r.target_gain)),
                "delta_hz": _hz(r.delta),
                "n_p": r.n_p,
                "gain_il_db": float(db(r.gain_il)),
                "delta_eff_hz": _hz(r.delta_eff),
                "g_eff_hz": _hz(r.g_eff),
                "theta_g_rad": r.theta_g,
                "s_obs_db": r.s_obs_db,
                "iip3_w": r.iip3,
                "g_max_db": float(db(r.g_max)),
                "ok": r.ok,
                "error": r.error,
            }
        )
    run.results = {"rows": len(rows), "failed": sum(not r.ok for r in rows), "label": sc.kind}
    return run


def cmd_iip3(cfg: RunConfig, seed: int) -> _Run:
    device, kerr, pump, eff = _operating_point(cfg)
    eff.require_stable()
    ic = cfg.imd
    setup = ImdSetup.centered(device, pump, TWO_PI * ic.offset, TWO_PI * ic.spacing)
    closed = iip3_at(device, eff, setup)
    powers = np.geomspace(ic.p_start, ic.p_stop, ic.points)
    sim = imd_sweep_simulate(device, eff, setup, powers)
    fit = intercept_fit(sim.p_in, sim.p_fund, sim.p_imd, ic.n_fit)
    run = _Run(["p_in_w", "p_fund_w", "p_imd_w"])
    for p, f, s in zip(sim.p_in, sim.p_fund, sim.p_imd):
        run.rows.append({"p_in_w": float(p), "p_fund_w": float(f), "p_imd_w": float(s)})
    sus = pumped_susceptibility(eff, device, setup.offset)
    run.results = {
        "iip3_closed_form_dbm": closed.iip3_dbm,
        "iip3_fit_dbm": fit.iip3_dbm,
        "theta_g_rad": closed.theta_g,
        "gain_il_db": float(db(sus.g_il)),
        "kerr_hz": _hz(kerr),
    }
    if ic.measured_iip3 is not None:
        k = kerr_from_iip3(ic.measured_iip3, device, sus.g_il, sus.theta_g, setup)
        run.results["measured_iip3_dbm"] = float(watt_to_dbm(ic.measured_iip3))
        run.results["kerr_from_measured_hz"] = _hz(k)
    return run


def cmd_mc(cfg: RunConfig, seed: int) -> _Run:
    device, kerr, pump, eff = _operating_point(cfg)
    chain = cfg.chain.chain(device)
    res = s_meas_pipeline(device, pump, chain, cfg.mc.shots, seed, kerr=kerr, histograms=cfg.mc.histograms)
    run = _Run([])
    run.rows.append(
        {
            "shots": res.shots,
            "seed": res.seed,
            "theta_min_rad": res.theta_min,
            "var_q_on": res.var_on,
            "var_q_off": res.var_off,
            "s_meas_db": res.s_meas_db,
            "s_analytic_db": res.s_analytic_db,
            "s_reference_db": res.s_reference_db,
        }
    )
    if res.histograms is not None:
        h = res.histograms
        centres = 0.5 * (h.edges[:-1] + h.edges[1:])
        cols = ["i", "q", "on", "off", "diff"]
        hist_rows = []
        diff = h.diff
        for a, i in enumerate(centres):
            for b, q in enumerate(centres):
                hist_rows.append({"i": float(i), "q": float(q), "on": float(h.on[a, b]), "off": float(h.off[a, b]), "diff": float(diff[a, b])})
        run.extra["hist"] = (cols, hist_rows)
    return run


def cmd_calibrate(cfg: RunConfig, seed: int) -> _Run:
    cc = cfg.calibration
    rec = cc.record()
    row: dict = {}
    t_sys = rec.t_sys
    if t_sys is None and rec.p_n_meas is not None and rec.g_line is not None and rec.bandwidth is not None:
        t_sys = tsys_from_noise(rec.p_n_meas, rec.g_line, rec.bandwidth)
    if rec.delta_theta_max is not None:
        drive = drive_power_from_ramsey(rec)
        row["p_d_w"] = drive.power
        row["n_photons"] = drive.n_photons
        if rec.p_meas is not None:
            row["g_line"] = line_gain(rec.p_meas, drive.power)
            row["g_line_db"] = float(db(row["g_line"]))
    if t_sys is not None:
        eta_hot = eta_hot_from_tsys(t_sys, cc.f_s)
        row["t_sys_k"] = t_sys
        row["eta_hot"] = eta_hot
        row["eta_total"] = cc.eta_int * cc.eta_cold * eta_hot
    if None not in (rec.t1, rec.t2r, rec.kappa_c, rec.chi):
        bounds = thermal_bound_conventions(rec.t1, rec.t2r, rec.kappa_c, rec.chi)
        row["n_th_bound_angular"] = bounds["angular"]
        row["n_th_bound_cyclic"] = bounds["cyclic"]
    if not row:
        raise ValueError("calibration block has too few fields to derive anything")
    run = _Run([])
    run.rows.append(row)
    return run


def cmd_snail(cfg: RunConfig, seed: int) -> _Run:
    sc = cfg.snail
    points = flux_sweep(sc.spec(), sc.flux.values())
    run = _Run([])
    for p in points:
        run.rows.append(
            {
                "phi_ext": p.phi_ext,
                "phi_min_rad": p.coeffs.phi_min,
                "c2": p.coeffs.c2,
                "c3": p.coeffs.c3,
                "c4": p.coeffs.c4,
                "participation": p.participation,
                "f0_hz": _hz(p.omega0),
                "g3_hz": _hz(p.g3),
                "g4_hz": _hz(p.g4),
                "g4_star_hz": _hz(p.g4_star),
                "kerr_hz": _hz(p.kerr),
            }
        )
    band = tuning_band(points)
    run.results = {
        "f_max_hz": _hz(band.omega_max),
        "f_min_hz": _hz(band.omega_min),
        "tuning_range_hz": _hz(band.span),
        "monotone": band.monotone,
        "g4_star_zero_flux": sign_changes(points, "g4_star"),
    }
    return run


COMMANDS = {
    "gain": cmd_gain,
    "squeeze": cmd_squeeze,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "iip3": cmd_iip3,
    "mc": cmd_mc,
    "calibrate": cmd_calibrate,
    "snail": cmd_snail,
}


def _output_path(cfg: RunConfig, sub: str, fmt: str, out: str | None) -> Path:
    raw = out or cfg.output.path or f"{sub}.{fmt}"
    p = Path(raw)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir and not p.is_absolute():
        p = Path(env_dir) / p
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spasqueeze", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON or YAML run configuration")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides output.seed)")
        p.add_argument("--out", help="data artifact path (overrides output.path)")
        p.add_argument("--format", choices=["csv", "json"], help="table format (overrides output.format)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ValueError("seed must be an unsigned 64-bit integer")
            cfg.output.seed = args.seed
        if args.format is not None:
            cfg.output.format = args.format
        elif "format" not in cfg.output.model_fields_set:
            # an unset format follows the artifact suffix
            suffix = Path(args.out or cfg.output.path or "").suffix.lower().lstrip(".")
            if suffix in ("csv", "json"):
                cfg.output.format = suffix
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    except (ValidationError, ValueError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG

    seed, fmt = cfg.output.seed, cfg.output.format
    try:
        result = COMMANDS[args.subcommand](cfg, seed)
    except ModelError as exc:
        log.error("model error: %s", exc)
        return EXIT_MODEL
    except ValueError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG

    try:
        path = _output_path(cfg, args.subcommand, fmt, args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = result.columns or (list(result.rows[0]) if result.rows else [])
        emit_table(result.rows, fmt, path, columns)
        artifacts = [path.name]
        for tag, (cols, rows) in result.extra.items():
            extra_path = path.with_name(f"{path.stem}.{tag}{path.suffix}")
            emit_table(rows, fmt, extra_path, cols)
            artifacts.append(extra_path.name)
        write_metadata(
            path,
            subcommand=args.subcommand,
            version=__version__,
            seed=seed,
            resolved_config=resolved(cfg),
            results=result.results,
            artifacts=artifacts,
        )
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_IO
    log.info("wrote %s", path)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
