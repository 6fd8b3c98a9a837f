"""Coherence-time extraction from simulated signals.

Damped-sinusoid fitting (weighted nonlinear least squares), oscillation
envelope extraction from interpolated extrema, and detuning-scan aggregation
with golden-section peak refinement.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .errors import FitError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CoherenceEstimate:
    """Damped-sinusoid fit result A sin(w t + phi) exp(-(t/T2)^p) + c."""

    amplitude: float
    omega: float
    phase: float
    t2: float
    offset: float
    errors: dict = field(default_factory=dict)
    residual_rms: float = 0.0
    envelope_only: bool = False
    stretch: float = 1.0


def _as_arrays(signal, stderr):
    if hasattr(signal, "taus"):
        return (np.asarray(signal.taus, float), np.asarray(signal.mean, float),
                np.asarray(signal.stderr, float))
    taus, values = signal
    err = None if stderr is None else np.asarray(stderr, float)
    return np.asarray(taus, float), np.asarray(values, float), err


def _fft_peak(taus, values):
    """Dominant FFT component with at least two periods inside the window."""
    dt = np.median(np.diff(taus))
    spec = np.fft.rfft((values - values.mean()) * np.hanning(values.size))
    freqs = np.fft.rfftfreq(values.size, dt)
    mag = np.abs(spec)
    mag[:min(3, mag.size)] = 0.0
    i = int(np.argmax(mag))
    if 0 < i < mag.size - 1 and mag[i - 1] - 2 * mag[i] + mag[i + 1] < 0:
        shift = 0.5 * (mag[i - 1] - mag[i + 1]) / (mag[i - 1] - 2 * mag[i] + mag[i + 1])
        return 2 * math.pi * (freqs[i] + shift * (freqs[1] - freqs[0])), mag[i]
    return 2 * math.pi * freqs[i], mag[i]


def _model(t, a, omega, phi, t2, c, p):
    return a * np.sin(omega * t + phi) * np.exp(-((t / t2) ** p)) + c


def fit_damped_sinusoid(signal, stderr=None, fit_stretch: bool = False,
                        envelope_only: bool = False) -> CoherenceEstimate:
    """Weighted least-squares fit of A sin(wt + phi) e^{-(t/T2)^p} + c.

    Accepts an EnsembleResult or a (taus, values) pair.  The frequency is
    seeded from the dominant FFT bin, T2 from a log-envelope regression, and
    the stretch exponent p stays fixed at 1 unless fit_stretch is set.
    Degenerate (flat) signals return the envelope-only branch with omega = 0
    and an infinite T2.
    """
    taus, values, err = _as_arrays(signal, stderr)
    if taus.size < 20:
        raise FitError("need at least 20 samples to fit")
    span = values.max() - values.min()
    omega0, _ = _fft_peak(taus, values)

    if span < 1e-12:
        return CoherenceEstimate(amplitude=0.0, omega=0.0, phase=0.0,
                                 t2=math.inf, offset=float(values.mean()),
                                 envelope_only=True)

    if envelope_only or omega0 == 0.0:
        return _fit_envelope_branch(taus, values, err)

    # initial T2 from log-linear regression of block maxima of |signal - mean|
    dev = np.abs(values - values.mean())
    nblk = max(8, values.size // 64)
    edges = np.linspace(0, values.size, nblk + 1, dtype=int)
    bt, bv = [], []
    for i in range(nblk):
        seg = slice(edges[i], edges[i + 1])
        if edges[i + 1] > edges[i]:
            j = edges[i] + int(np.argmax(dev[seg]))
            bt.append(taus[j])
            bv.append(dev[j])
    bt = np.array(bt)
    bv = np.maximum(np.array(bv), 1e-12)
    slope = np.polyfit(bt, np.log(bv), 1)[0]
    t2_0 = -1.0 / slope if slope < 0 else taus[-1] * 2.0
    a0 = span / 2.0
    p0 = [a0, omega0, 0.5, t2_0, float(values.mean())]
    bounds = ([0.0, 0.0, -2 * math.pi, taus[1] * 0.1, -1.0],
              [2.0, np.inf, 2 * math.pi, np.inf, 2.0])
    if fit_stretch:
        p0.append(1.0)
        bounds[0].append(0.3)
        bounds[1].append(3.0)

    def model(t, *params):
        if fit_stretch:
            a, omega, phi, t2, c, p = params
        else:
            a, omega, phi, t2, c = params
            p = 1.0
        return _model(t, a, omega, phi, t2, c, p)

    sigma = _weights(err)
    try:
        popt, pcov = curve_fit(model, taus, values, p0=p0, bounds=bounds,
                               sigma=sigma, absolute_sigma=sigma is not None,
                               xtol=1e-8, maxfev=200 * (len(p0) + 1))
    except RuntimeError as exc:
        raise FitError(f"damped-sinusoid fit did not converge: {exc}") from exc
    perr = np.sqrt(np.abs(np.diag(pcov)))
    resid = values - model(taus, *popt)
    names = ["amplitude", "omega", "phase", "t2", "offset"]
    if fit_stretch:
        names.append("stretch")
    return CoherenceEstimate(
        amplitude=float(popt[0]), omega=float(popt[1]), phase=float(popt[2]),
        t2=float(popt[3]), offset=float(popt[4]),
        errors={n: float(e) for n, e in zip(names, perr)},
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        envelope_only=False,
        stretch=float(popt[5]) if fit_stretch else 1.0)


def _weights(err):
    """Fit weights from ensemble standard errors, floored so that a few
    near-noiseless points (e.g. tau = 0) cannot dominate the fit."""
    if err is None:
        return None
    positive = err[err > 0]
    if positive.size == 0:
        return None
    return np.maximum(err, 0.1 * float(np.median(positive)))


def _fit_envelope_branch(taus, values, err) -> CoherenceEstimate:
    """Exponential-envelope fit A e^{-t/T2} + c for non-oscillatory signals."""
    def model(t, a, t2, c):
        return a * np.exp(-t / t2) + c

    a0 = values[0] - values[-1]
    c0 = values[-1]
    t2_0 = max(taus[-1] / 2.0, taus[1])
    sigma = _weights(err)
    try:
        popt, pcov = curve_fit(model, taus, values, p0=[a0, t2_0, c0],
                               sigma=sigma, absolute_sigma=sigma is not None,
                               xtol=1e-8, maxfev=1200)
    except RuntimeError:
        return CoherenceEstimate(amplitude=0.0, omega=0.0, phase=0.0,
                                 t2=math.inf, offset=float(values.mean()),
                                 envelope_only=True)
    perr = np.sqrt(np.abs(np.diag(pcov)))
    t2 = float(popt[1])
    if abs(popt[0]) < 3.0 * perr[0]:
        t2 = math.inf  # amplitude consistent with a constant signal
    resid = values - model(taus, *popt)
    return CoherenceEstimate(amplitude=float(popt[0]), omega=0.0, phase=0.0,
                             t2=t2, offset=float(popt[2]),
                             errors={"amplitude": float(perr[0]),
                                     "t2": float(perr[1]),
                                     "offset": float(perr[2])},
                             residual_rms=float(np.sqrt(np.mean(resid ** 2))),
                             envelope_only=True)


@dataclass(frozen=True)
class EnvelopeEstimate:
    """Upper-envelope samples and the exponential decay constant of the
    oscillation amplitude (half the peak-to-trough excursion)."""

    times: np.ndarray
    upper: np.ndarray
    time_constant: float
    time_constant_err: float


def _refine_extrema(taus, values, idx):
    """3-point parabolic refinement of extremum positions and heights."""
    t_ref, v_ref = [], []
    for i in idx:
        if 0 < i < values.size - 1:
            y0, y1, y2 = values[i - 1], values[i], values[i + 1]
            denom = y0 - 2 * y1 + y2
            if denom != 0.0:
                s = 0.5 * (y0 - y2) / denom
                s = float(np.clip(s, -0.5, 0.5))
                t_ref.append(taus[i] + s * (taus[min(i + 1, values.size - 1)] - taus[i]))
                v_ref.append(y1 - 0.25 * (y0 - y2) * s)
                continue
        t_ref.append(taus[i])
        v_ref.append(values[i])
    return np.array(t_ref), np.array(v_ref)


def extract_envelope(signal, stderr=None, min_extrema: int = 5) -> EnvelopeEstimate:
    """Envelope of an oscillatory signal from its interpolated extrema.

    The oscillation amplitude (upper minus interpolated lower envelope,
    halved) removes any constant baseline; its exponential time constant
    comes from a log-linear regression.  Returns an infinite time constant
    when the slope is consistent with zero.
    """
    taus, values, _ = _as_arrays(signal, stderr)
    top, _ = find_peaks(values)
    bot, _ = find_peaks(-values)
    # windowed grids have sampling gaps; extrema abutting a gap are artifacts
    gap = 3.0 * np.median(np.diff(taus))
    top = np.array([i for i in top
                    if taus[i] - taus[i - 1] < gap and taus[i + 1] - taus[i] < gap],
                   dtype=int)
    bot = np.array([i for i in bot
                    if taus[i] - taus[i - 1] < gap and taus[i + 1] - taus[i] < gap],
                   dtype=int)
    if top.size < min_extrema or bot.size < min_extrema:
        raise FitError(f"need at least {min_extrema} extrema of each kind, "
                       f"found {top.size} maxima / {bot.size} minima")
    t_up, v_up = _refine_extrema(taus, values, top)
    t_lo, v_lo = _refine_extrema(taus, values, bot)
    lower_interp = np.interp(t_up, t_lo, v_lo)
    amp = (v_up - lower_interp) / 2.0
    good = amp > 0
    if good.sum() < min_extrema:
        raise FitError("too few positive-amplitude extrema for a log fit")
    x = t_up[good]
    y = np.log(amp[good])
    n = x.size
    coeff, cov = np.polyfit(x, y, 1, cov=True)
    slope = coeff[0]
    slope_err = math.sqrt(max(cov[0, 0], 0.0)) if n > 2 else math.inf
    if slope >= 0 or abs(slope) <= slope_err:
        tc, tc_err = math.inf, math.inf
    else:
        tc = -1.0 / slope
        tc_err = slope_err / slope ** 2
    return EnvelopeEstimate(times=t_up, upper=v_up, time_constant=tc,
                            time_constant_err=tc_err)


def fid_decay_time(signal, stderr=None, baseline: float = 0.5) -> float:
    """1/e crossing time of the free-induction envelope (S - baseline)/(S0 - baseline)."""
    taus, values, _ = _as_arrays(signal, stderr)
    env = (values - baseline) / (values[0] - baseline)
    target = 1.0 / math.e
    below = np.nonzero(env < target)[0]
    if below.size == 0:
        return math.inf
    i = below[0]
    if i == 0:
        return float(taus[0])
    frac = (env[i - 1] - target) / (env[i - 1] - env[i])
    return float(taus[i - 1] + frac * (taus[i] - taus[i - 1]))


@dataclass(frozen=True)
class ScanCurve:
    """Coherence time versus detuning with peak characterization."""

    deltas: np.ndarray
    t2: np.ndarray
    t2_err: np.ndarray
    peak_delta: float
    peak_t2: float
    fwhm: float
    peak_on_boundary: bool


def _golden_max(f, a, b, iterations: int = 60):
    """Golden-section maximum of f on [a, b]."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        if abs(b - a) < 1e-12 * max(abs(a), abs(b), 1.0):
            break
    return (x1, f1) if f1 >= f2 else (x2, f2)


def scan_detunings(deltas, evaluator, errors=None, workers: int | None = None) -> ScanCurve:
    """Evaluate T2(delta) on a grid and characterize the peak.

    The peak is refined by a golden-section search between the grid
    neighbors of the maximum; the FWHM comes from linear interpolation of
    the half-height crossings.  A maximum on the grid boundary is flagged.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size < 10:
        raise FitError("detuning grid needs at least 10 points")
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            t2 = np.array(list(pool.map(evaluator, deltas)))
    else:
        t2 = np.array([evaluator(d) for d in deltas])
    t2_err = (np.zeros_like(t2) if errors is None
              else np.asarray(errors, dtype=float))
    i = int(np.argmax(t2))
    boundary = i == 0 or i == deltas.size - 1
    if boundary:
        peak_delta, peak_t2 = float(deltas[i]), float(t2[i])
    else:
        peak_delta, peak_t2 = _golden_max(evaluator, deltas[i - 1], deltas[i + 1])
        peak_delta = float(peak_delta)
        peak_t2 = float(max(peak_t2, t2[i]))

    half = peak_t2 / 2.0
    left = right = math.nan
    for j in range(i, 0, -1):
        if t2[j - 1] < half <= t2[j]:
            frac = (t2[j] - half) / (t2[j] - t2[j - 1])
            left = deltas[j] - frac * (deltas[j] - deltas[j - 1])
            break
    for j in range(i, deltas.size - 1):
        if t2[j + 1] < half <= t2[j]:
            frac = (t2[j] - half) / (t2[j] - t2[j + 1])
            right = deltas[j] + frac * (deltas[j + 1] - deltas[j])
            break
    fwhm = right - left if np.isfinite(left) and np.isfinite(right) else math.nan
    return ScanCurve(deltas=deltas, t2=t2, t2_err=t2_err, peak_delta=peak_delta,
                     peak_t2=peak_t2, fwhm=float(fwhm), peak_on_boundary=boundary)
