from __future__ import annotations

import numpy as np
import pytest
from conftest import W, random_stable_point

from spasqueeze.chain import EfficiencyChain
from spasqueeze.core import DeviceParams, PumpPoint, effective_params, optimal_squeeze, scattering_set, squeeze_variance
from spasqueeze.heterodyne import (
    QuadCovariance,
    cholesky_2x2,
    fit_gaussian,
    iq_histograms,
    output_covariance,
    rotation,
    s_meas_pipeline,
    sample_iq,
    settling_curve,
    standard_normals,
)
from spasqueeze.units import variance_db

KAPPA = W * 340e6
LOSSLESS = DeviceParams(W * 7e9, W * 2e6, 0.0, KAPPA, 0.0)
LOSSY = DeviceParams.from_total(W * 7e9, W * 2e6, 0.0, KAPPA, 0.9)


def pump_for(device, g_eff_hz, delta_hz=0.0):
    return PumpPoint.detuned(device, W * delta_hz, (g_eff_hz / (4 * device.g3 / W)) ** 2)


def test_vacuum_and_validation():
    v = QuadCovariance.vacuum()
    assert v.det == 0.25 and v.physical
    with pytest.raises(ValueError):
        QuadCovariance(0.5, 0.5, 0.6)
    with pytest.raises(ValueError):
        v.admix(1.5)


def test_pump_off_covariance_is_vacuum():
    dev = LOSSY
    eff = effective_params(dev, PumpPoint.detuned(dev, W * 30e6, 0.0), 0.0)
    cov = output_covariance(scattering_set(eff, dev), 0.4)
    np.testing.assert_allclose([cov.vxx, cov.vyy, cov.vxy], [0.5, 0.5, 0.0], atol=1e-14)


def test_lossless_aligned_covariance_is_pure_and_diagonal():
    eff = effective_params(LOSSLESS, pump_for(LOSSLESS, 120e6, 40e6), 0.0)
    scat = scattering_set(eff, LOSSLESS)
    rep = optimal_squeeze(scat)
    cov = output_covariance(scat).aligned(rep.theta_min)
    # I carries the amplified quadrature, Q the squeezed one
    assert cov.vyy == pytest.approx(rep.s_min, rel=1e-9)
    assert cov.vxx == pytest.approx(rep.anti_s, rel=1e-12)
    assert abs(cov.vxy) < 1e-10 * cov.vxx
    assert cov.det == pytest.approx(0.25, abs=1e-10)


def test_quadratic_form_matches_direct_variance():
    rng = np.random.default_rng(11)
    for _ in range(100):
        dev, eff, _ = random_stable_point(rng)
        scat = scattering_set(eff, dev)
        cov = output_covariance(scat)
        th = rng.uniform(0, 2 * np.pi, 8)
        np.testing.assert_allclose(cov.variance(th), squeeze_variance(scat, th), rtol=1e-12, atol=1e-12)


def test_rotation_is_proper():
    r = rotation(0.37)
    np.testing.assert_allclose(r @ r.T, np.eye(2), atol=1e-15)
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_admix_matches_beam_splitter():
    cov = QuadCovariance(3.0, 0.1, 0.2)
    out = cov.admix(0.3)
    np.testing.assert_allclose(out.matrix, 0.3 * cov.matrix + 0.35 * np.eye(2), atol=1e-15)


def test_cholesky_handles_singular_covariances():
    for cov in (QuadCovariance(1.0, 0.0, 0.0), QuadCovariance(0.0, 2.0, 0.0), QuadCovariance(1.0, 4.0, 2.0)):
        l = cholesky_2x2(cov)
        np.testing.assert_allclose(l @ l.T, cov.matrix, atol=1e-14)


def test_degenerate_axis_gives_collinear_samples():
    ens = sample_iq(QuadCovariance(1.0, 4.0, 2.0), 1000, seed=3)
    x = ens.samples
    assert np.allclose(x[:, 1], 2.0 * x[:, 0], atol=1e-12)
    assert fit_gaussian(ens).degenerate


def test_identical_points_have_zero_covariance():
    fit = fit_gaussian(np.ones((5, 2)))
    assert fit.cov.vxx == fit.cov.vyy == fit.cov.vxy == 0.0
    with pytest.raises(ValueError):
        fit_gaussian(np.ones((1, 2)))


def test_determinism_and_partitioning():
    a = standard_normals(1234, 5000)
    assert np.array_equal(a, standard_normals(1234, 5000))
    parts = np.vstack([standard_normals(1234, 1700), standard_normals(1234, 2000, start=1700),
                       standard_normals(1234, 1300, start=3700)])
    assert np.array_equal(a, parts)
    assert not np.array_equal(a, standard_normals(1234, 5000, stream=1))
    assert not np.array_equal(a, standard_normals(1235, 5000))


def test_vacuum_sample_variance():
    shots = 10**6
    fit = fit_gaussian(sample_iq(QuadCovariance.vacuum(), shots, seed=99))
    tol = 3 * np.sqrt(2 / shots) * 0.5
    assert abs(fit.cov.vxx - 0.5) < tol and abs(fit.cov.vyy - 0.5) < tol
    assert abs(fit.cov.vxy) < tol
    assert np.all(np.abs(fit.mean) < 3 * np.sqrt(0.5 / shots))


def test_fit_round_trip():
    cov = QuadCovariance(4.0, 0.08, -0.3)
    shots = 200_000
    fit = fit_gaussian(sample_iq(cov, shots, seed=5))
    # standard error of a sample covariance entry: sqrt((V_ii V_jj + V_ij^2) / n)
    m = cov.matrix
    se = np.sqrt((np.outer(np.diag(m), np.diag(m)) + m**2) / shots)
    assert np.all(np.abs(fit.cov.matrix - m) < 5 * se)


def test_fitted_purity_not_significantly_below_bound():
    eff = effective_params(LOSSLESS, pump_for(LOSSLESS, 140e6), 0.0)
    scat = scattering_set(eff, LOSSLESS)
    cov = output_covariance(scat).aligned(optimal_squeeze(scat).theta_min)
    shots = 200_000
    for seed in range(5):
        det = fit_gaussian(sample_iq(cov, shots, seed)).cov.det
        # diagonal frame: rel. error of det ~ sqrt(2/n) per axis, two axes
        assert det > 0.25 * (1 - 5 * np.sqrt(4 / shots))


def test_pump_off_measures_zero_db():
    pump = PumpPoint.detuned(LOSSY, 0.0, 0.0)
    chain = EfficiencyChain.from_device(LOSSY, 0.8, 0.7)
    shots = 10**5
    res = s_meas_pipeline(LOSSY, pump, chain, shots, seed=17, histograms=False)
    sigma_db = 10 / np.log(10) * np.sqrt(4 / shots)
    assert abs(res.s_meas_db) < 4 * sigma_db
    assert res.s_analytic_db == pytest.approx(0.0, abs=1e-12)
    assert res.histograms is None


def test_lossless_ideal_chain_limit():
    pump = pump_for(LOSSLESS, 150e6)
    chain = EfficiencyChain(1.0, 1.0, 1.0)
    res = s_meas_pipeline(LOSSLESS, pump, chain, 10**6, seed=2, histograms=False)
    s_min = optimal_squeeze(scattering_set(effective_params(LOSSLESS, pump, 0.0), LOSSLESS)).s_min
    assert res.s_analytic_db == pytest.approx(variance_db(s_min), abs=1e-9)
    assert res.s_meas_db == pytest.approx(res.s_analytic_db, abs=0.05)
    assert res.s_reference_db == pytest.approx(res.s_meas_db, abs=1e-12)


@pytest.mark.parametrize("g_eff_hz,seed", [(60e6, 101), (120e6, 202), (150e6, 303)])
def test_monte_carlo_matches_analytic(g_eff_hz, seed):
    pump = pump_for(LOSSY, g_eff_hz)
    chain = EfficiencyChain.from_device(LOSSY, 0.8, 0.7)
    res = s_meas_pipeline(LOSSY, pump, chain, 10**6, seed, histograms=False)
    assert res.s_meas_db == pytest.approx(res.s_analytic_db, abs=0.05)


def test_chain_must_agree_with_device():
    with pytest.raises(ValueError):
        s_meas_pipeline(LOSSY, pump_for(LOSSY, 50e6), EfficiencyChain(1.0, 1.0, 1.0), 100, seed=0)


def test_error_shrinks_as_inverse_root_shots():
    pump = pump_for(LOSSY, 120e6)
    chain = EfficiencyChain.from_device(LOSSY, 0.8, 0.7)
    ladder = [10**3, 10**4, 10**5]
    rms = []
    for shots in ladder:
        errs = [s_meas_pipeline(LOSSY, pump, chain, shots, seed, histograms=False) for seed in range(40)]
        rms.append(np.sqrt(np.mean([(r.s_meas_db - r.s_analytic_db) ** 2 for r in errs])))
    slope = np.polyfit(np.log10(ladder), np.log10(rms), 1)[0]
    assert -0.65 < slope < -0.35


def test_settling_of_variance_ratio():
    pump = pump_for(LOSSY, 120e6)
    chain = EfficiencyChain.from_device(LOSSY, 0.8, 0.7)
    shots = 10**6
    eff = effective_params(LOSSY, pump, 0.0)
    scat = scattering_set(eff, LOSSY)
    cov = output_covariance(scat, chain.eta_detection).aligned(optimal_squeeze(scat).theta_min)
    on = sample_iq(cov, shots, 8, 0).samples
    off = sample_iq(QuadCovariance.vacuum(), shots, 8, 1).samples
    fractions = np.array([0.65, 0.75, 0.85, 1.0])
    curve = settling_curve(on, off, fractions)
    # the subset estimate differs from the full one by ~ sqrt(4 (1/n_f - 1/N)) in relative terms
    allowed = 5 * np.sqrt(4 * (1 / (fractions * shots) - 1 / shots)) + 1e-15
    assert np.all(np.abs(curve / curve[-1] - 1) <= allowed)


def test_histogram_signature():
    res = s_meas_pipeline(LOSSLESS, pump_for(LOSSLESS, 100e6), EfficiencyChain(1.0, 1.0, 1.0), 10**6, seed=4)
    h = res.histograms
    assert h.on.shape == (101, 101)
    assert h.on.sum() == pytest.approx(1.0, abs=1e-3)
    centres = 0.5 * (h.edges[1:] + h.edges[:-1])
    sigma_q = np.sqrt(res.cov_on.vyy)
    sigma_i = np.sqrt(res.cov_on.vxx)
    mid = np.abs(centres) < 0.5 * sigma_q
    big_i = np.abs(centres) > 1.5
    big_q = (np.abs(centres) > 1.2) & (np.abs(centres) < 2.5)
    # histogram2d: axis 0 is I, axis 1 is Q
    assert h.diff[np.ix_(big_i, mid)].sum() > 0  # wide I tails appear with the pump on
    assert h.diff[np.ix_(mid, big_q)].sum() < 0  # Q tails shrink
    assert sigma_i > 1 > sigma_q


def test_histogram_binning():
    on = np.zeros((10, 2))
    h = iq_histograms(on, on, 1.0)
    assert len(h.edges) == 102
    assert h.edges[0] == -6.0 and h.edges[-1] == 6.0
    assert np.all(h.diff == 0)
