"""Reproducible noise generation and its averaged dephasing envelopes.

Magnetic noise is a stationary Ornstein-Uhlenbeck process sampled with the
exact discretization (valid for any step); drive noise is a quasi-static
per-shot deviation pair.  Every realization is a pure function of
(parameters, master seed, shot index): per-shot streams come from a
counter-based Philox generator keyed by (seed, shot), so trial order and
parallel scheduling never change results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import CalibrationError, ConfigError

RNG_ID = "numpy.random.Philox4x64-10, key=(master_seed, shot_index)"

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class OUParams:
    """Stationary Ornstein-Uhlenbeck magnetic noise: std sigma (rad/s),
    correlation time tau_c (s)."""

    sigma: float
    tau_c: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if not self.tau_c > 0:
            raise ConfigError("tau_c must be positive")


@dataclass(frozen=True)
class DriveNoiseParams:
    """Quasi-static relative drive deviations.

    mode 'correlated' draws one number for both tone pairs, 'independent'
    draws two, 'imbalanced' draws one and splits it along the direction
    (1, ratio) with joint rms delta_rms.  resample_per_shot keeps the pair
    constant within a shot and redraws it for the next one.
    """

    delta_rms: float = 0.005
    mode: str = "correlated"
    ratio: float = 1.0
    resample_per_shot: bool = True

    def __post_init__(self):
        if self.delta_rms < 0:
            raise ConfigError("delta_rms must be nonnegative")
        if self.mode not in ("correlated", "independent", "imbalanced"):
            raise ConfigError(f"unknown drive-noise mode {self.mode!r}")
        if not self.ratio > 0:
            raise ConfigError("imbalance ratio must be positive")


@dataclass(frozen=True)
class NoiseRealization:
    """One magnetic trajectory plus the shot's drive deviation pair."""

    delta_b_path: np.ndarray
    delta1: float
    delta2: float
    seed: int
    shot: int


_DRIVE_STREAM_SALT = 0x9E3779B97F4A7C15  # decouples drive draws from magnetic ones


def trial_generator(seed: int, shot: int, salt: int = 0) -> np.random.Generator:
    """Counter-based per-shot stream; identical (seed, shot, salt) => identical draws."""
    key = [np.uint64((seed ^ salt) & 0xFFFFFFFFFFFFFFFF), np.uint64(shot)]
    return np.random.Generator(np.random.Philox(key=key))


def _ou_from_normals(sigma: float, tau_c: float, dt: float, xi: np.ndarray) -> np.ndarray:
    """Exact OU discretization driven by standard normals; xi[0] seeds x0."""
    n = xi.shape[0]
    path = np.empty(n)
    decay = math.exp(-dt / tau_c)
    amp = math.sqrt(1.0 - decay * decay)
    x = xi[0]
    path[0] = x
    for k in range(1, n):
        x = x * decay + amp * xi[k]
        path[k] = x
    return sigma * path


try:
    from numba import njit as _njit
    _ou_from_normals = _njit(cache=True, nogil=True)(_ou_from_normals)
except ImportError:  # pragma: no cover
    pass


def ou_sample(params: OUParams, dt: float, n: int, seed: int, shot: int = 0) -> np.ndarray:
    """Sample n points of the stationary OU process on a uniform grid.

    x0 ~ N(0, sigma^2); x_{k+1} = x_k e^{-dt/tau_c}
    + sigma sqrt(1 - e^{-2 dt/tau_c}) xi_k.
    """
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if n < 1:
        raise ConfigError("need at least one sample")
    xi = trial_generator(seed, shot).standard_normal(n)
    return _ou_from_normals(params.sigma, params.tau_c, dt, xi)


def draw_drive_deviation(params: DriveNoiseParams, seed: int, shot: int):
    """Per-shot (delta1, delta2) according to the correlation mode.

    Drawn from a stream independent of the magnetic one; with
    resample_per_shot off, every shot reuses the shot-0 pair.
    """
    if not params.resample_per_shot:
        shot = 0
    rng = trial_generator(seed, shot, salt=_DRIVE_STREAM_SALT)
    return _drive_pair(params, rng)


def _drive_pair(params: DriveNoiseParams, rng: np.random.Generator):
    if params.delta_rms == 0.0:
        return 0.0, 0.0
    if params.mode == "correlated":
        d = params.delta_rms * rng.standard_normal()
        return float(d), float(d)
    if params.mode == "independent":
        d1, d2 = params.delta_rms * rng.standard_normal(2)
        return float(d1), float(d2)
    base = params.delta_rms / math.sqrt(1.0 + params.ratio ** 2) * rng.standard_normal()
    return float(base), float(params.ratio * base)


def make_realization(ou: OUParams, drive: DriveNoiseParams, dt: float, n: int,
                     seed: int, shot: int) -> NoiseRealization:
    """Draw the shot's full noise realization from its private streams.

    The drive pair and the magnetic normals come from independent
    counter-based streams keyed by (seed, shot), so a realization is
    bit-identical for a given (seed, shot) regardless of scheduling.
    """
    d1, d2 = draw_drive_deviation(drive, seed, shot)
    xi = trial_generator(seed, shot).standard_normal(n)
    path = _ou_from_normals(ou.sigma, ou.tau_c, dt, xi)
    return NoiseRealization(delta_b_path=path, delta1=d1, delta2=d2, seed=seed, shot=shot)


def quasi_static_sigma(t2_star: float, s_weight: float = 1.0) -> float:
    """Quasi-static estimate: <cos(delta_b t)> = e^{-(sigma s t)^2/2} crosses
    1/e at t2_star for sigma = sqrt(2)/(s * t2_star)."""
    return SQRT2 / (s_weight * t2_star)


def _fid_crossing_time(sigma: float, phases: np.ndarray, dt: float) -> float:
    """First 1/e crossing of the ensemble FID envelope mean(cos(sigma*phase))."""
    env = np.cos(sigma * phases).mean(axis=0)
    target = 1.0 / math.e
    below = np.nonzero(env < target)[0]
    if below.size == 0:
        return math.inf
    i = below[0]
    if i == 0:
        return 0.0
    t0 = (i - 1) * dt
    frac = (env[i - 1] - target) / (env[i - 1] - env[i])
    return t0 + frac * dt


def calibrate_sigma(t2_star: float, tau_c: float, trials: int = 4000,
                    seed: int = 715, tol: float = 0.05, max_iter: int = 40,
                    s_weight: float = 1.0) -> float:
    """Bisect sigma until the simulated bare-qubit FID crosses 1/e at t2_star.

    The probed transition accumulates phase s_weight * integral(delta_b dt)
    (s_weight = 1 for 0 <-> +-1 under delta_b S_z).  The same noise draws are
    reused for every sigma (the OU path is linear in sigma), which makes the
    bisection deterministic and monotone.
    """
    if not (t2_star > 0 and tau_c > 0):
        raise ConfigError("calibration targets must be positive")
    dt = min(t2_star / 120.0, tau_c / 40.0)
    n = int(round(3.0 * t2_star / dt)) + 1
    rng = trial_generator(seed, 0)
    xi = rng.standard_normal((trials, n))
    decay = math.exp(-dt / tau_c)
    amp = math.sqrt(1.0 - decay * decay)
    unit = np.empty_like(xi)
    unit[:, 0] = xi[:, 0]
    for k in range(1, n):
        unit[:, k] = unit[:, k - 1] * decay + amp * xi[:, k]
    phases = np.cumsum(unit, axis=1) * dt * s_weight

    sigma0 = quasi_static_sigma(t2_star, s_weight)
    lo, hi = sigma0 / 4.0, sigma0 * 4.0
    # larger sigma -> earlier crossing; ensure the bracket straddles the target
    for _ in range(8):
        if _fid_crossing_time(lo, phases, dt) >= t2_star:
            break
        lo /= 2.0
    for _ in range(8):
        if _fid_crossing_time(hi, phases, dt) <= t2_star:
            break
        hi *= 2.0
    sigma = sigma0
    for _ in range(max_iter):
        sigma = 0.5 * (lo + hi)
        t_cross = _fid_crossing_time(sigma, phases, dt)
        if abs(t_cross - t2_star) <= tol * t2_star:
            return sigma
        if t_cross > t2_star:
            lo = sigma
        else:
            hi = sigma
    raise CalibrationError(f"sigma bisection did not reach {tol:.0%} of the "
                           f"target after {max_iter} steps (last sigma {sigma:.4e})")


def ou_squared_envelope(eta: float, sigma: float, tau_c: float, t):
    """|E[exp(i eta int_0^t X(s)^2 ds)]| for stationary OU X.

    Closed form for the quadratic functional of a Gaussian process; covers
    the quasi-static and motionally narrowed regimes and everything between.
    """
    t = np.asarray(t, dtype=float)
    if eta == 0.0 or sigma == 0.0:
        return np.ones_like(t)
    th = 1.0 / tau_c
    lam = -1j * eta
    gam = np.sqrt(th * th + 4.0 * lam * sigma * sigma * th + 0j)
    if gam.real < 0:
        gam = -gam
    kk = (th * th + gam * gam) / (2.0 * th * gam)
    z = gam * t
    logbr = z + np.log((1.0 + kk) / 2.0) + np.log1p((1.0 - kk) / (1.0 + kk) * np.exp(-2.0 * z))
    return np.exp(th * t / 2.0 - logbr.real / 2.0)


_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(151)


def quartic_dephasing_envelope(eta4: float, sigma: float, t):
    """|E[exp(i eta4 X^4 t)]| for quasi-static Gaussian X ~ N(0, sigma^2)."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if eta4 == 0.0 or sigma == 0.0:
        out = np.ones_like(t_arr)
    else:
        x = _GH_NODES * SQRT2 * sigma
        w = _GH_WEIGHTS / math.sqrt(math.pi)
        ph = np.exp(1j * eta4 * np.outer(t_arr, x ** 4))
        out = np.abs(ph @ w)
    return out if np.ndim(t) else float(out[0])


def one_over_e_time(envelope, t_max: float) -> float:
    """First time a decreasing envelope callable reaches 1/e; inf if it never does."""
    target = 1.0 / math.e
    if envelope(t_max) > target:
        return math.inf
    lo = t_max * 1e-12
    return float(brentq(lambda t: envelope(t) - target, lo, t_max, rtol=1e-10))
