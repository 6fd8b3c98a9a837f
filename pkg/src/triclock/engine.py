"""Stochastic Schrodinger integration and the Monte Carlo measurement protocols.

Trials are independent work units with counter-based per-trial noise streams;
the ensemble is aggregated in fixed trial order, so results are bit-identical
for any worker count.  Within a trial, one noise realization covers the whole
evolution-time grid: the free-evolution prefix is shared and per-tau readout
pulses act on state snapshots, which leaves ensemble means unchanged and
saves an order of magnitude in work over independent shots per tau.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .drive import DriveConfig, coupling_sign
from .errors import ConfigError, ResolutionError
from .linalg import require_hermitian
from .noise import (RNG_ID, DriveNoiseParams, OUParams, make_realization)
from .spectrum import doubly_dressed_spectrum

SQRT2 = math.sqrt(2.0)
STEPS_PER_PERIOD = 20          # integrator resolution: dt <= 1/(20 f_max)
LAB_FRAME_MAX_DURATION = 2e-6  # guard against infeasible lab-frame step counts
NORM_TOL = 1e-9

VARIANTS = ("fid_bare", "rabi_bare", "dressed_ramsey", "survival_probe")


@dataclass(frozen=True)
class ProtocolSpec:
    """One measurement protocol: variant, evolution-time grid, frame."""

    variant: str
    taus: np.ndarray
    frame: str = "rotating"
    transition: str = "minus"   # probed bare transition for fid/rabi
    dt: float | None = None     # integrator step override

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown protocol variant {self.variant!r}")
        taus = np.asarray(self.taus, dtype=float)
        if taus.ndim != 1 or taus.size < 1:
            raise ConfigError("tau grid must be a nonempty 1-d array")
        if np.any(np.diff(taus) <= 0):
            raise ConfigError("tau grid must be strictly increasing")
        if taus[0] < 0:
            raise ConfigError("tau values must be nonnegative")
        object.__setattr__(self, "taus", taus)
        if self.frame not in ("rotating", "lab"):
            raise ConfigError(f"unknown frame {self.frame!r}")
        if self.frame == "lab" and taus[-1] > LAB_FRAME_MAX_DURATION:
            raise ConfigError("lab-frame protocols are restricted to <= 2 us")
        if self.transition not in ("minus", "plus"):
            raise ConfigError("transition must be 'minus' or 'plus'")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt override must be positive")


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble-averaged protocol signal with standard errors."""

    taus: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    trials: int
    seed: int
    dt: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.mean < -1e-9) or np.any(self.mean > 1.0 + 1e-9):
            raise ValueError("ensemble signal out of the [0, 1] population range")


def pulse_duration(cfg: DriveConfig) -> float:
    """Nominal pi/2 pulse time on the 0 <-> D transition.

    The coupling omega_d flips population as sin^2(omega_d t): a quarter of
    the population period.
    """
    return math.pi / (4.0 * cfg.omega_d)


def default_timestep(cfg: DriveConfig, variant: str, ou: OUParams) -> float:
    """Step satisfying dt <= 1/(20 f_max) for the protocol's fastest scale."""
    if variant == "fid_bare":
        f_noise = 5.0 * ou.sigma / (2 * math.pi)
        f_max = max(f_noise, 1.0 / ou.tau_c)
        return min(1.0 / (STEPS_PER_PERIOD * f_max), ou.tau_c / 50.0)
    if variant == "rabi_bare":
        f_max = max(2.0 * cfg.rabi1, 2.0 * cfg.rabi2, 5.0 * ou.sigma) / (2 * math.pi)
        return 1.0 / (STEPS_PER_PERIOD * f_max)
    spec = doubly_dressed_spectrum(cfg)
    gaps = [abs(spec.energies[i] - spec.energies[j])
            for i in range(3) for j in range(i + 1, 3)]
    f_max = max(abs(cfg.delta), abs(cfg.delta - cfg.delta0), cfg.omega_d,
                cfg.omega_b, *gaps) / (2 * math.pi)
    return 1.0 / (STEPS_PER_PERIOD * f_max)


def evolve(h_of_t, psi0, dt: float, total: float, f_max: float | None = None,
           record: bool = False):
    """Midpoint-exponential integration of a time-dependent Hamiltonian.

    psi <- exp(-i h(t + dt/2) dt) psi; global error O(dt^2), norm preserved
    exactly per step.  When f_max (Hz) is given, enforces the resolution
    bound dt <= 1/(20 f_max).
    """
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if f_max is not None and dt > 1.0 / (STEPS_PER_PERIOD * f_max):
        raise ResolutionError(
            f"dt = {dt:.3e} s does not resolve f_max = {f_max:.3e} Hz "
            f"(need dt <= {1.0 / (STEPS_PER_PERIOD * f_max):.3e} s)")
    from ._eig3 import eigh3
    psi = np.asarray(psi0, dtype=np.complex128).copy()
    n = int(round(total / dt))
    w = np.empty(3)
    v = np.empty((3, 3), dtype=np.complex128)
    traj = np.empty((n + 1, 3), dtype=np.complex128) if record else None
    if record:
        traj[0] = psi
    for k in range(n):
        h = require_hermitian(h_of_t((k + 0.5) * dt))
        eigh3(h, w, v)
        c = v.conj().T @ psi
        psi = v @ (np.exp(-1j * w * dt) * c)
        if record:
            traj[k + 1] = psi
    if record:
        return psi, traj
    return psi


def uniform_tau_grid(tau_max: float, n_points: int, dt: float) -> np.ndarray:
    """Uniform grid of exact integrator-step multiples covering [0, ~tau_max].

    Sampling the protocol on exact multiples keeps the recorded grid strictly
    uniform (no snapping jitter), which FFT-based analysis requires.
    """
    if n_points < 2:
        raise ConfigError("need at least two grid points")
    stride = max(1, int(round(tau_max / (n_points - 1) / dt)))
    return np.arange(n_points, dtype=float) * (stride * dt)


def windowed_tau_grid(tau_max: float, n_windows: int, window_span: float,
                      points_per_window: int) -> np.ndarray:
    """Dense sampling windows spread over [0, tau_max].

    Long protocols whose oscillation must stay resolved for envelope
    extraction use bursts of dense samples instead of a uniform grid; window
    starts are spaced evenly with the last window ending at tau_max.
    """
    if n_windows < 1 or points_per_window < 2:
        raise ConfigError("need at least one window of at least two points")
    if not 0 < window_span * n_windows <= tau_max:
        raise ConfigError("windows must fit inside [0, tau_max]")
    starts = np.linspace(0.0, tau_max - window_span, n_windows)
    local = np.linspace(0.0, window_span, points_per_window)
    return (starts[:, None] + local[None, :]).ravel()


def _snap_tau_grid(taus: np.ndarray, dt: float) -> np.ndarray:
    steps = np.rint(taus / dt).astype(np.int64)
    if np.any(np.diff(steps) <= 0):
        raise ConfigError("tau grid collapses at this integrator step; "
                          "refine dt or coarsen the grid")
    return steps


def _survival_initial_state(cfg: DriveConfig) -> np.ndarray:
    spec = doubly_dressed_spectrum(cfg)
    psi = (spec.vectors[:, 1] + spec.vectors[:, 2]) / SQRT2
    return psi.astype(np.complex128)


def run_protocol(spec: ProtocolSpec, cfg: DriveConfig, ou: OUParams,
                 drive_noise: DriveNoiseParams, trials: int, seed: int,
                 workers: int | None = None) -> EnsembleResult:
    """Monte Carlo ensemble of a measurement protocol.

    Per trial: draw the noise realization from its (seed, trial) stream, run
    the protocol kernel over the full tau grid, and average across trials
    with standard errors.  Bit-identical for fixed seed regardless of
    worker count.
    """
    if trials < 1:
        raise ConfigError("need at least one trial")
    dt = spec.dt if spec.dt is not None else default_timestep(cfg, spec.variant, ou)
    if spec.taus.size > 1:
        dt = min(dt, float(np.min(np.diff(spec.taus))) / 2.0)  # resolve the grid too
    tau_steps = _snap_tau_grid(spec.taus, dt)
    taus = tau_steps * dt
    sign = coupling_sign(cfg)

    if spec.variant == "dressed_ramsey":
        n_path = int(tau_steps[-1]) + 1
        t_pulse = pulse_duration(cfg)

        def job(trial):
            real = make_realization(ou, drive_noise, dt, n_path, seed, trial)
            out = np.empty(tau_steps.size)
            defect = _kernels.ramsey_trial(
                cfg.omega_d, cfg.omega_b, cfg.delta, cfg.delta0, sign,
                real.delta1, real.delta2, real.delta_b_path, dt, tau_steps,
                t_pulse, out)
            return out, defect

    elif spec.variant == "survival_probe":
        n_path = int(tau_steps[-1]) + 1
        psi0 = _survival_initial_state(cfg)

        def job(trial):
            real = make_realization(ou, drive_noise, dt, n_path, seed, trial)
            out = np.empty(tau_steps.size)
            defect = _kernels.survival_trial(
                cfg.omega_d, cfg.omega_b, cfg.delta, cfg.delta0, sign,
                real.delta1, real.delta2, real.delta_b_path, dt, tau_steps,
                psi0, out)
            return out, defect

    elif spec.variant == "fid_bare":
        n_path = int(tau_steps[-1]) + 1

        def job(trial):
            real = make_realization(ou, drive_noise, dt, n_path, seed, trial)
            out = np.empty(tau_steps.size)
            defect = _kernels.fid_trial(real.delta_b_path, dt, tau_steps, 1.0, out)
            return out, defect

    elif spec.variant == "rabi_bare":
        n_path = int(tau_steps[-1]) + 1
        db_sign = -1.0 if spec.transition == "minus" else 1.0
        rabi = cfg.rabi1 if spec.transition == "minus" else cfg.rabi2

        def job(trial):
            real = make_realization(ou, drive_noise, dt, n_path, seed, trial)
            d_drive = real.delta1 if spec.transition == "minus" else real.delta2
            out = np.empty(tau_steps.size)
            defect = _kernels.rabi_trial(rabi, d_drive, real.delta_b_path, dt,
                                         tau_steps, db_sign, out)
            return out, defect

    else:  # pragma: no cover - guarded by ProtocolSpec
        raise ConfigError(f"unhandled variant {spec.variant!r}")

    n_workers = workers or min(trials, os.cpu_count() or 1)
    sums = np.zeros(tau_steps.size)
    sumsq = np.zeros(tau_steps.size)
    worst_defect = 0.0
    # accumulate in fixed trial order, in bounded batches, so the result is
    # bit-identical for any worker count and memory stays per-batch
    batch = max(1, 4 * n_workers)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for start in range(0, trials, batch):
                stop = min(start + batch, trials)
                for out, defect in pool.map(job, range(start, stop)):
                    sums += out
                    sumsq += out * out
                    worst_defect = max(worst_defect, defect)
    else:
        for trial in range(trials):
            out, defect = job(trial)
            sums += out
            sumsq += out * out
            worst_defect = max(worst_defect, defect)

    if worst_defect > NORM_TOL:
        raise RuntimeError(f"norm conservation violated: defect {worst_defect:.3e}")
    mean = sums / trials
    if trials > 1:
        var = np.maximum(sumsq - trials * mean * mean, 0.0) / (trials - 1)
        stderr = np.sqrt(var / trials)
    else:
        stderr = np.zeros_like(mean)
    meta = {
        "variant": spec.variant,
        "rng": RNG_ID,
        "numpy": np.__version__,
        "norm_defect": worst_defect,
        "workers_independent": True,
    }
    return EnsembleResult(taus=taus, mean=mean, stderr=stderr, trials=trials,
                          seed=seed, dt=dt, meta=meta)


def dressed_ramsey_shot(cfg: DriveConfig, realization, tau: float,
                        dt: float | None = None) -> float:
    """Population of |0> after pulse - free evolution for tau - pulse."""
    if dt is None:
        dt = default_timestep(cfg, "dressed_ramsey",
                              OUParams(sigma=1.0, tau_c=1.0))
    steps = np.array([int(round(tau / dt))], dtype=np.int64)
    path = np.asarray(realization.delta_b_path, dtype=float)
    if path.size < steps[0] + 1:
        raise ConfigError("realization path shorter than the requested tau")
    out = np.empty(1)
    _kernels.ramsey_trial(cfg.omega_d, cfg.omega_b, cfg.delta, cfg.delta0,
                          coupling_sign(cfg), realization.delta1,
                          realization.delta2, path, dt, steps,
                          pulse_duration(cfg), out)
    return float(out[0])


def survival_shot(cfg: DriveConfig, realization, tau: float,
                  dt: float | None = None) -> float:
    """Survival probability of (|B~> + |d~>)/sqrt(2) after tau."""
    if dt is None:
        dt = default_timestep(cfg, "survival_probe",
                              OUParams(sigma=1.0, tau_c=1.0))
    steps = np.array([int(round(tau / dt))], dtype=np.int64)
    path = np.asarray(realization.delta_b_path, dtype=float)
    if path.size < steps[0] + 1:
        raise ConfigError("realization path shorter than the requested tau")
    out = np.empty(1)
    _kernels.survival_trial(cfg.omega_d, cfg.omega_b, cfg.delta, cfg.delta0,
                            coupling_sign(cfg), realization.delta1,
                            realization.delta2, path, dt, steps,
                            _survival_initial_state(cfg), out)
    return float(out[0])


def lab_frame_populations(cfg: DriveConfig, duration: float, dt: float,
                          noise=None, record_every: int = 1) -> tuple:
    """Bare-state populations from |0> under the four-tone lab Hamiltonian.

    Validation path for the rotating-wave approximation; noise may be a
    NoiseSample held static over the window.
    """
    if duration > LAB_FRAME_MAX_DURATION:
        raise ConfigError("lab-frame validation windows are restricted to <= 2 us")
    f_max = (max(cfg.omega1, cfg.omega2) + abs(cfg.delta)) / (2 * math.pi)
    if dt > 1.0 / (STEPS_PER_PERIOD * f_max):
        raise ResolutionError("dt does not resolve the carrier frequencies")
    from .drive import NoiseSample, ZERO_NOISE
    noise = noise if noise is not None else ZERO_NOISE
    n = int(round(duration / dt))
    db_path = np.full(n, noise.delta_b)
    s1, s2 = (-1.0, 1.0) if cfg.resonant_phase_pi else (1.0, -1.0)
    n_rec = (n - 1) // record_every + 1
    pops = np.empty((n_rec, 3))
    _kernels.lab_trial(cfg.rabi1, cfg.rabi2, cfg.delta, cfg.delta0,
                       cfg.omega1, cfg.omega2, s1, s2, noise.delta1,
                       noise.delta2, db_path, dt, record_every, pops)
    times = np.arange(n_rec) * record_every * dt
    return times, pops
