"""Monte-Carlo heterodyne oracle: sample the output quadratures, fit, and estimate S_meas.

Randomness comes from a Philox counter-based generator keyed by
``(seed, stream)``. Shot ``i`` always consumes counter block ``start + i``,
so any partition of a run into shot ranges reproduces the serial samples
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import EfficiencyChain, infer_reference_squeezing
from .core import (
    DeviceParams,
    PumpPoint,
    ScatteringSet,
    effective_params,
    optimal_squeeze,
    s_obs,
    scattering_set,
    squeeze_variance,
)
from .errors import NoSolutionError
from .units import TWO_PI, variance_db

STREAM_ON = 0
STREAM_OFF = 1
HIST_BINS = 101
HIST_SPAN_SIGMA = 6.0
_PSD_TOL = 1e-12


@dataclass(frozen=True)
class QuadCovariance:
    vxx: float
    vyy: float
    vxy: float

    def __post_init__(self):
        if self.vxx < -_PSD_TOL or self.vyy < -_PSD_TOL or self.det < -_PSD_TOL:
            raise ValueError(f"covariance is not positive semidefinite: {self}")

    @classmethod
    def vacuum(cls) -> "QuadCovariance":
        return cls(0.5, 0.5, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.vxx, self.vxy], [self.vxy, self.vyy]])

    @property
    def det(self) -> float:
        return self.vxx * self.vyy - self.vxy**2

    @property
    def physical(self) -> bool:
        """Heisenberg bound ``det >= 1/4`` (to 1e-10)."""
        return self.det >= 0.25 - 1e-10

    def variance(self, theta):
        """Variance of ``X cos(theta) + Y sin(theta)``."""
        c, s = np.cos(theta), np.sin(theta)
        return self.vxx * c * c + self.vyy * s * s + 2.0 * self.vxy * s * c

    def admix(self, eta: float) -> "QuadCovariance":
        """Beam splitter of transmission ``eta`` with vacuum in the other port."""
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
        v = 0.5 * (1.0 - eta)
        return QuadCovariance(eta * self.vxx + v, eta * self.vyy + v, eta * self.vxy)

    def aligned(self, theta_min: float) -> "QuadCovariance":
        """Covariance in the frame whose Q axis is ``theta_min`` and I axis ``theta_min - pi/2``."""
        r = rotation(theta_min)
        m = r @ self.matrix @ r.T
        return QuadCovariance(float(m[0, 0]), float(m[1, 1]), float(m[0, 1]))


def rotation(theta_min: float) -> np.ndarray:
    """Proper rotation taking ``(X, Y)`` to ``(I, Q)`` with ``Q = X_theta_min``."""
    c, s = np.cos(theta_min), np.sin(theta_min)
    return np.array([[s, -c], [c, s]])


def output_covariance(scat: ScatteringSet, eta: float = 1.0) -> QuadCovariance:
    """Zero-frequency output covariance, then a beam-splitter chain of efficiency ``eta``."""
    if scat.omega != 0.0:
        raise ValueError("output covariance is built from the zero-frequency scattering set")
    vxx = squeeze_variance(scat, 0.0)
    vyy = squeeze_variance(scat, np.pi / 2.0)
    vxy = squeeze_variance(scat, np.pi / 4.0) - 0.5 * (vxx + vyy)
    return QuadCovariance(vxx, vyy, vxy).admix(eta)


def cholesky_2x2(cov: QuadCovariance) -> np.ndarray:
    """Lower factor ``L`` with ``L L^T = V``; handles singular (rank-1 or zero) covariances."""
    vxx = max(cov.vxx, 0.0)
    if vxx > 0:
        l11 = np.sqrt(vxx)
        l21 = cov.vxy / l11
        l22 = np.sqrt(max(cov.vyy - l21 * l21, 0.0))
    else:
        l11, l21, l22 = 0.0, 0.0, np.sqrt(max(cov.vyy, 0.0))
    return np.array([[l11, 0.0], [l21, l22]])


def standard_normals(seed: int, shots: int, stream: int = 0, start: int = 0) -> np.ndarray:
    """``(shots, 2)`` independent N(0,1) draws; shot ``i`` depends only on ``(seed, stream, start + i)``."""
    if shots < 0 or start < 0:
        raise ValueError("shots and start must be non-negative")
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    counter = np.array([start, 0, 0, 0], dtype=np.uint64)
    bits = np.random.Philox(key=key, counter=counter)
    words = bits.random_raw(4 * shots).reshape(shots, 4)
    scale = 2.0**-53
    u1 = 1.0 - (words[:, 0] >> np.uint64(11)).astype(float) * scale  # (0, 1]
    u2 = (words[:, 1] >> np.uint64(11)).astype(float) * scale
    r = np.sqrt(-2.0 * np.log(u1))
    return np.column_stack([r * np.cos(TWO_PI * u2), r * np.sin(TWO_PI * u2)])


@dataclass(frozen=True)
class IQEnsemble:
    seed: int
    shots: int
    samples: np.ndarray  # (shots, 2) columns I, Q
    stream: int = 0
    start: int = 0


def sample_iq(cov: QuadCovariance, shots: int, seed: int, stream: int = 0, start: int = 0) -> IQEnsemble:
    z = standard_normals(seed, shots, stream, start)
    samples = z @ cholesky_2x2(cov).T
    return IQEnsemble(seed=seed, shots=shots, samples=samples, stream=stream, start=start)


@dataclass(frozen=True)
class GaussianFit:
    mean: np.ndarray
    cov: QuadCovariance
    degenerate: bool


def fit_gaussian(ens: IQEnsemble | np.ndarray) -> GaussianFit:
    """Sample mean and unbiased (``shots - 1``) covariance of an IQ ensemble."""
    x = ens.samples if isinstance(ens, IQEnsemble) else np.asarray(ens, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2 or x.shape[0] < 2:
        raise ValueError("need at least 2 shots of (I, Q) pairs")
    m = np.cov(x, rowvar=False, ddof=1)
    cov = QuadCovariance(float(m[0, 0]), float(m[1, 1]), float(m[0, 1]))
    scale = max(cov.vxx, cov.vyy, np.finfo(float).tiny)
    return GaussianFit(mean=x.mean(axis=0), cov=cov, degenerate=bool(cov.det <= 1e-12 * scale * scale))


def settling_curve(on: np.ndarray, off: np.ndarray, fractions) -> np.ndarray:
    """Running Q-variance ratio on/off using the first ``fraction`` of shots of each ensemble."""
    out = []
    for f in fractions:
        n_on = max(int(round(f * len(on))), 2)
        n_off = max(int(round(f * len(off))), 2)
        out.append(np.var(on[:n_on, 1], ddof=1) / np.var(off[:n_off, 1], ddof=1))
    return np.array(out)


@dataclass(frozen=True)
class Histograms:
    edges: np.ndarray  # shared bin edges for I and Q
    on: np.ndarray
    off: np.ndarray

    @property
    def diff(self) -> np.ndarray:
        return self.on - self.off


def iq_histograms(on: np.ndarray, off: np.ndarray, sigma: float) -> Histograms:
    """Normalized 2-D histograms (``HIST_BINS`` square bins over +-6 sigma)."""
    edges = np.linspace(-HIST_SPAN_SIGMA * sigma, HIST_SPAN_SIGMA * sigma, HIST_BINS + 1)
    h_on, _, _ = np.histogram2d(on[:, 0], on[:, 1], bins=[edges, edges])
    h_off, _, _ = np.histogram2d(off[:, 0], off[:, 1], bins=[edges, edges])
    return Histograms(edges=edges, on=h_on / len(on), off=h_off / len(off))


@dataclass(frozen=True)
class PipelineResult:
    s_meas_db: float
    s_reference_db: float  # inferred before the warm chain
    s_analytic_db: float  # closed-form expectation for s_meas
    var_on: float
    var_off: float
    theta_min: float
    cov_on: QuadCovariance
    histograms: Histograms | None
    seed: int
    shots: int


def s_meas_pipeline(
    device: DeviceParams,
    pump: PumpPoint,
    chain: EfficiencyChain,
    shots: int,
    seed: int,
    kerr: float = 0.0,
    histograms: bool = True,
) -> PipelineResult:
    """Simulate interleaved pump-on/pump-off acquisitions and compute S_meas.

    Device loss enters through ``kappa_int`` in the scattering blocks, so
    ``chain.eta_int`` must agree with the device; cold and warm efficiencies
    are applied as beam splitters on the output covariance. Samples are
    rotated so the squeezed axis lies along Q.
    """
    if abs(chain.eta_int - device.eta_int) > 1e-9:
        raise ValueError(f"chain eta_int={chain.eta_int} disagrees with device coupling {device.eta_int}")
    eff = effective_params(device, pump, kerr)
    scat = scattering_set(eff, device, 0.0)
    theta_min = optimal_squeeze(scat).theta_min
    eta = chain.eta_detection
    cov_on = output_covariance(scat, eta).aligned(theta_min)
    cov_off = QuadCovariance.vacuum()
    on = sample_iq(cov_on, shots, seed, STREAM_ON).samples
    off = sample_iq(cov_off, shots, seed, STREAM_OFF).samples
    var_on = float(np.var(on[:, 1], ddof=1))
    var_off = float(np.var(off[:, 1], ddof=1))
    s_meas = float(10.0 * np.log10(var_on / var_off))
    try:
        s_ref = float(infer_reference_squeezing(s_meas, chain.eta_hot))
    except (NoSolutionError, ValueError):
        s_ref = float("nan")
    hist = iq_histograms(on, off, np.sqrt(max(cov_on.vxx, cov_on.vyy))) if histograms else None
    return PipelineResult(
        s_meas_db=s_meas,
        s_reference_db=s_ref,
        s_analytic_db=float(variance_db(s_obs(eff, device, eta))),
        var_on=var_on,
        var_off=var_off,
        theta_min=theta_min,
        cov_on=cov_on,
        histograms=hist,
        seed=seed,
        shots=shots,
    )
