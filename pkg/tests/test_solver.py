from __future__ import annotations

import numpy as np
import pytest
from conftest import W
from hypothesis import given, settings
from hypothesis import strategies as st

from spasqueeze.core import DeviceParams, dressed_params, gain_il, s11_pump_off, s_obs
from spasqueeze.errors import UnreachableGainError
from spasqueeze.solver import (
    SolveRequest,
    delta_grid,
    flux_grid,
    kerr_grid,
    max_gain,
    max_gain_point,
    solve_pump_for_gain,
    sweep,
)
from spasqueeze.snail import SnailSpec
from spasqueeze.units import db, from_db, variance_db

KAPPA = W * 340e6
LOSSLESS = DeviceParams(W * 7e9, W * 2e6, 0.0, KAPPA, 0.0)
LOSSY = DeviceParams.from_total(W * 7e9, W * 2e6, 0.0, KAPPA, 0.8)


def test_recovers_g_eff_from_gain_example(oracle):
    res = solve_pump_for_gain(SolveRequest(LOSSLESS, 0.0, 0.0, oracle["gain_il_example"]))
    assert res.converged
    assert res.eff.g_eff / W == pytest.approx(100e6, rel=1e-8)
    assert res.n_p == pytest.approx((100e6 / 8e6) ** 2, rel=1e-8)


def test_unit_target_needs_no_pump():
    res = solve_pump_for_gain(SolveRequest(LOSSLESS, W * 30e6, W * 50e3, 1.0))
    assert res.n_p == 0.0
    assert res.converged


def test_target_below_one_rejected():
    with pytest.raises(ValueError):
        SolveRequest(LOSSLESS, 0.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        SolveRequest(LOSSLESS, 0.0, 0.0, 10.0, retune_mode="other")


def test_large_kerr_at_zero_detuning_is_unreachable():
    req = SolveRequest(LOSSLESS, 0.0, W * 1e6, from_db(20.0))
    with pytest.raises(UnreachableGainError) as info:
        solve_pump_for_gain(req)
    assert 1.0 < info.value.g_max < from_db(20.0)
    res = solve_pump_for_gain(req, raise_unreachable=False)
    assert not res.converged
    assert res.g_max == pytest.approx(info.value.g_max)
    assert res.achieved_gain == pytest.approx(res.g_max, rel=1e-9)


def test_max_gain_sentinels():
    assert max_gain(LOSSLESS, 0.0, 0.0) == np.inf
    assert np.isfinite(max_gain(LOSSLESS, 0.0, W * 500e3))


def test_max_gain_decreases_with_kerr():
    kerrs = W * np.array([250e3, 300e3, 500e3, 1e6, 3e6])
    g = [max_gain(LOSSLESS, 0.0, k) for k in kerrs]
    assert all(a > b for a, b in zip(g, g[1:]))
    # negative Kerr of the same size gives the same ceiling at zero detuning
    assert max_gain(LOSSLESS, 0.0, -kerrs[2]) == pytest.approx(g[2], rel=1e-9)


def test_max_gain_agrees_with_dense_scan():
    kerr = W * 400e3
    g_max, n_at = max_gain_point(LOSSLESS, 0.0, kerr)
    n = np.linspace(0, 4 * n_at, 40001)
    scan = np.array([gain_il(dressed_params(0.0, x, LOSSLESS.g3, kerr, KAPPA), LOSSLESS) for x in n])
    assert g_max >= scan.max() * (1 - 1e-12)
    assert g_max == pytest.approx(scan.max(), rel=1e-6)


def test_zero_delta_eff_keeps_resonance():
    res = solve_pump_for_gain(SolveRequest(LOSSY, 0.0, W * 70e3, from_db(20.0), "zero_delta_eff"))
    assert res.converged
    assert res.eff.delta_eff == pytest.approx(0.0, abs=1e-6)
    assert res.delta == pytest.approx(-8 / 9 * W * 70e3 * res.n_p)


def test_off_reference_includes_pump_off_reflection():
    req = SolveRequest(LOSSY, W * 20e6, 0.0, from_db(15.0), reference="off")
    res = solve_pump_for_gain(req)
    g = gain_il(res.eff, LOSSY) / abs(s11_pump_off(LOSSY, res.delta)) ** 2
    assert db(g) == pytest.approx(15.0, abs=0.01)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-2e6, 2e6),
    st.floats(-100e6, 100e6),
    st.floats(1.5, 25.0),
    st.floats(0.7, 1.0),
    st.sampled_from(["fixed_delta", "zero_delta_eff"]),
)
def test_round_trip_within_tolerance(kerr_hz, delta_hz, target_db, frac, mode):
    dev = DeviceParams.from_total(W * 7e9, W * 2e6, 0.0, KAPPA, frac)
    req = SolveRequest(dev, W * delta_hz, W * kerr_hz, from_db(target_db), mode)
    try:
        res = solve_pump_for_gain(req)
    except UnreachableGainError as exc:
        assert exc.g_max < from_db(target_db)
        return
    assert res.converged
    assert res.n_p >= 0
    assert db(gain_il(res.eff, dev)) == pytest.approx(target_db, abs=0.01)
    assert res.eff.stable


def test_kerr_does_not_change_squeezing_at_fixed_gain():
    vals = []
    for k in (1e3, 10e3, 70e3, 300e3, 1000e3):
        res = solve_pump_for_gain(SolveRequest(LOSSY, 0.0, W * k, from_db(20.0), "zero_delta_eff"))
        vals.append(variance_db(s_obs(res.eff, LOSSY, 0.6)))
    assert np.ptp(vals) < 1e-6


def test_detuning_does_not_change_lossless_squeezing():
    vals = []
    for d in np.linspace(-100e6, 100e6, 21):
        res = solve_pump_for_gain(SolveRequest(LOSSLESS, W * d, W * 70e3, from_db(20.0)))
        vals.append(variance_db(s_obs(res.eff, LOSSLESS, 0.6)))
    assert np.ptp(vals) < 1e-6


def test_sweep_cardinality_and_order():
    pts = delta_grid(LOSSY, W * np.array([-20e6, 0.0, 20e6]), W * 70e3)
    rows = sweep(pts, [from_db(10.0), from_db(15.0)], eta=0.6)
    assert len(rows) == 6
    assert [r.label for r in rows] == [p.label for p in pts for _ in range(2)]
    assert all(r.ok for r in rows)
    assert all(db(r.gain_il) == pytest.approx(db(r.target_gain), abs=0.01) for r in rows)


def test_sweep_flags_failures_without_dropping():
    pts = kerr_grid(LOSSLESS, 0.0, W * np.array([70e3, 1e6]))
    rows = sweep(pts, [from_db(20.0)])
    assert len(rows) == 2
    assert rows[0].ok and not rows[1].ok
    assert rows[1].error == "unreachable"
    assert np.isfinite(rows[1].g_max) and np.isnan(rows[1].n_p)


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError):
        sweep([], [10.0])


def test_parallel_sweep_matches_serial():
    pts = delta_grid(LOSSY, W * np.linspace(-50e6, 50e6, 5), W * 70e3)
    targets = [from_db(12.0), from_db(18.0)]
    serial = sweep(pts, targets, eta=0.6)
    parallel = sweep(pts, targets, eta=0.6, workers=2)
    assert [(r.label, r.n_p, r.s_obs, r.iip3) for r in serial] == [(r.label, r.n_p, r.s_obs, r.iip3) for r in parallel]


def test_iip3_spread_over_detuning_shrinks_with_gain():
    pts = delta_grid(LOSSLESS, W * np.linspace(-100e6, 100e6, 11), W * 70e3)
    spreads = []
    for g in (10.0, 15.0, 20.0):
        rows = sweep(pts, [from_db(g)])
        iip3 = db(np.array([r.iip3 for r in rows]))
        spreads.append(np.ptp(iip3))
    assert spreads[0] > spreads[1] > spreads[2]


def test_flux_grid_sweep_runs():
    spec = SnailSpec(3, 0.05, 44e-12, 0.7, 0.0, n_snails=20)
    pts = flux_grid(spec, [0.2, 0.3], kappa_ext=KAPPA)
    rows = sweep(pts, [from_db(10.0)])
    assert [r.label for r in rows] == [0.2, 0.3]
    # weak g3 near zero flux leaves the target out of reach; that row is flagged, not dropped
    assert rows[0].error == "unreachable" and rows[0].g_max < 10.0
    assert rows[1].ok
