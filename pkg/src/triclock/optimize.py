"""Clock-transition conditions and predicted coherence limits.

Basic scheme: one constraint (equal first-order drive susceptibilities of the
robust pair) solved for the two-photon detuning by bracketed root finding.
Improved scheme: that constraint plus equality of the second-order magnetic
coefficients b = c, solved for (delta, delta0) by a damped 2-d Newton
iteration with a finite-difference Jacobian.

The predicted coherence limits combine, by reciprocal rate addition:
second-order drive noise sqrt(2)/(|h2| delta^2); the second-order magnetic
dephasing of the dressed-basis gap averaged exactly over the
Ornstein-Uhlenbeck statistics; and for the improved scheme the quartic
magnetic term and the amplitude-mixing limit (unprotected drive-noise time
divided by the mixing fraction).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .drive import DriveConfig
from .errors import LabelingError, SolverError
from .noise import (DriveNoiseParams, OUParams, one_over_e_time,
                    ou_squared_envelope, quartic_dephasing_envelope)
from .spectrum import (amplitude_mixing, drive_susceptibility,
                       magnetic_gap_expansion, magnetic_second_order,
                       second_order_drive_gap)

SQRT2 = math.sqrt(2.0)
RESIDUAL_TOL = 1e-8
CROSSING_GUARD = 1.01  # exclude |delta| <= guard * omega_d from brackets


@dataclass(frozen=True)
class ClockSolution:
    """Solved operating point with constraint residuals and a predicted T2."""

    scheme: str
    delta: float
    delta0: float
    residuals: tuple            # normalized (f1/omega_d, f2*omega_d)
    predicted_t2: float
    iterations: int
    pair: tuple = ("B~", "d~")
    trace: list = field(default_factory=list)


def _pair_gap_sensitivity(cfg: DriveConfig, direction, pair) -> float:
    sus = drive_susceptibility(cfg, direction)
    return sus.pair_difference(pair)


def optimize_basic(cfg: DriveConfig, direction=(1.0, 1.0), interval=None,
                   pair=("B~", "d~"), ou: OUParams | None = None,
                   drive_noise: DriveNoiseParams | None = None) -> ClockSolution:
    """Solve e_B~ = e_d~ for the two-photon detuning (basic scheme).

    The bracket must produce a sign change of the susceptibility difference
    and stay clear of the level crossing at |delta| = omega_d.  When noise
    parameters are supplied, the solution carries the predicted combined
    coherence time at the root.
    """
    om = cfg.omega_d
    lo, hi = interval if interval is not None else (CROSSING_GUARD * om, 12.0 * om)
    if lo < CROSSING_GUARD * om:
        raise SolverError(f"bracket reaches into the level crossing at delta ~ omega_d")

    def f(delta):
        return _pair_gap_sensitivity(cfg.with_detunings(delta, 0.0), direction, pair)

    grid = np.linspace(lo, hi, 96)
    vals = np.empty_like(grid)
    for i, d in enumerate(grid):
        try:
            vals[i] = f(d)
        except LabelingError:
            vals[i] = np.nan
    root = None
    for i in range(grid.size - 1):
        a, b = vals[i], vals[i + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a == 0.0:
            root = grid[i]
            break
        if a * b < 0:
            root = brentq(f, grid[i], grid[i + 1], xtol=1e-12 * om, rtol=1e-15)
            break
    if root is None:
        raise SolverError("no sign change of the susceptibility difference in "
                          f"[{lo:.3e}, {hi:.3e}] rad/s")
    resid = f(root) / om
    if abs(resid) > RESIDUAL_TOL:
        raise SolverError(f"root residual {resid:.2e} exceeds {RESIDUAL_TOL:.0e}")
    solved = cfg.with_detunings(root, 0.0)
    t2 = math.nan
    if ou is not None and drive_noise is not None:
        t2 = basic_coherence_limit(solved, direction, ou, drive_noise)
    return ClockSolution(scheme="basic", delta=float(root), delta0=0.0,
                         residuals=(float(resid), 0.0), predicted_t2=t2,
                         iterations=1, pair=pair)


def optimize_improved(cfg: DriveConfig, direction=(1.0, 1.0),
                      pair=("B~", "d~"), max_iter: int = 100,
                      fd_step_scale: float = 1e-4,
                      ou: OUParams | None = None,
                      drive_noise: DriveNoiseParams | None = None,
                      seed_point=None) -> ClockSolution:
    """Solve {e_B~ = e_d~, b = c} for (delta, delta0) (improved scheme).

    Damped 2-d Newton with central finite-difference Jacobian, seeded at the
    basic-scheme root with delta0 = 0.  Residuals are normalized to
    (f1/omega_d, f2*omega_d) and both must fall below 1e-8.
    """
    om = cfg.omega_d
    if seed_point is None:
        basic = optimize_basic(cfg, direction, pair=pair)
        x = np.array([basic.delta, 0.0])
    else:
        x = np.array(seed_point, dtype=float)

    def residuals(p):
        trial = cfg.with_detunings(p[0], p[1])
        f1 = _pair_gap_sensitivity(trial, direction, pair) / om
        _, b, c = magnetic_second_order(trial)
        return np.array([f1, (b - c) * om])

    h = fd_step_scale * om
    trace = []
    r = residuals(x)
    for it in range(max_iter):
        rnorm = float(np.max(np.abs(r)))
        trace.append((float(x[0]), float(x[1]), rnorm))
        if rnorm < RESIDUAL_TOL:
            solved = cfg.with_detunings(x[0], x[1])
            t2 = math.nan
            if ou is not None and drive_noise is not None:
                t2 = improved_coherence_limit(solved, direction, ou, drive_noise)
            return ClockSolution(scheme="improved", delta=float(x[0]),
                                 delta0=float(x[1]),
                                 residuals=(float(r[0]), float(r[1])),
                                 predicted_t2=t2, iterations=it, pair=pair,
                                 trace=trace)
        jac = np.empty((2, 2))
        for j in range(2):
            dp = np.zeros(2)
            dp[j] = h
            jac[:, j] = (residuals(x + dp) - residuals(x - dp)) / (2 * h)
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > 1e12:
            raise SolverError(f"Jacobian condition number {cond:.2e} too large")
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        base = np.linalg.norm(r)
        while lam > 1e-8:
            r_new = residuals(x + lam * step)
            if np.linalg.norm(r_new) < base:
                break
            lam *= 0.5
        else:
            raise SolverError("backtracking line search stalled")
        x = x + lam * step
        r = r_new
    raise SolverError(f"Newton iteration did not converge in {max_iter} steps "
                      f"(residuals {r})")


def drive_second_order_time(cfg: DriveConfig, direction, delta_rms: float,
                            pair=("B~", "d~")) -> float:
    """sqrt(2)/(|h2| delta_rms^2): second-order drive-noise limit of the gap."""
    h2 = abs(second_order_drive_gap(cfg, direction, pair))
    if h2 * delta_rms ** 2 == 0.0:
        return math.inf
    return SQRT2 / (h2 * delta_rms ** 2)


def magnetic_second_order_time(cfg: DriveConfig, ou: OUParams,
                               pair=("B~", "d~")) -> float:
    """1/e time of the OU-averaged second-order magnetic dephasing.

    Uses the unshifted dressed-basis coefficients (the published basic-scheme
    model); the exact quadratic-functional envelope covers the quasi-static
    through motionally narrowed regimes.
    """
    a, b, c = magnetic_second_order(cfg, frame_shift=False)
    shifts = {"u~": a, "d~": -b, "B~": -c}
    eta = abs(shifts[pair[0]] - shifts[pair[1]])
    if eta == 0.0 or ou.sigma == 0.0:
        return math.inf
    # cover both the quasi-static (T ~ 1/(eta sigma^2)) and motionally
    # narrowed (T ~ 1/(eta^2 sigma^4 tau_c)) regimes
    horizon = 1e4 * max(1.0 / (eta * ou.sigma ** 2),
                        1.0 / (eta ** 2 * ou.sigma ** 4 * ou.tau_c))
    return one_over_e_time(lambda t: ou_squared_envelope(eta, ou.sigma, ou.tau_c, t),
                           horizon)


def magnetic_quartic_time(cfg: DriveConfig, ou: OUParams,
                          pair=("B~", "d~")) -> float:
    """Quasi-static fourth-order magnetic limit from the clock-frame gap."""
    _, quartic = magnetic_gap_expansion(cfg, ou.sigma, pair)
    if quartic == 0.0 or ou.sigma == 0.0:
        return math.inf
    rate = abs(quartic) * 3.0 * ou.sigma ** 4  # <X^4> = 3 sigma^4
    if rate == 0.0:
        return math.inf
    return one_over_e_time(
        lambda t: quartic_dephasing_envelope(quartic, ou.sigma, t), 1e4 / rate)


def mixing_limited_time(cfg: DriveConfig, ou: OUParams, delta_rms: float) -> float:
    """Amplitude-mixing coherence ceiling.

    The mixing fraction reintroduces first-order drive noise at its weight:
    the limit is the unprotected drive-noise time sqrt(2)/(omega_d delta)
    divided by the fraction.
    """
    mix = amplitude_mixing(cfg, ou.sigma)
    if mix == 0.0 or delta_rms == 0.0:
        return math.inf
    t_unprotected = SQRT2 / (cfg.omega_d * delta_rms)
    return t_unprotected / mix


def basic_coherence_limit(cfg: DriveConfig, direction, ou: OUParams,
                          drive_noise: DriveNoiseParams,
                          pair=("B~", "d~")) -> float:
    """Reciprocal combination of the basic-scheme second-order limits."""
    t_mag = magnetic_second_order_time(cfg, ou, pair)
    t_drv = drive_second_order_time(cfg, direction, drive_noise.delta_rms, pair)
    return _reciprocal_sum(t_mag, t_drv)


def improved_coherence_limit(cfg: DriveConfig, direction, ou: OUParams,
                             drive_noise: DriveNoiseParams,
                             pair=("B~", "d~")) -> float:
    """Drive second order + quartic magnetic + amplitude mixing, combined."""
    t_drv = drive_second_order_time(cfg, direction, drive_noise.delta_rms, pair)
    t_mag4 = magnetic_quartic_time(cfg, ou, pair)
    t_mix = mixing_limited_time(cfg, ou, drive_noise.delta_rms)
    return _reciprocal_sum(t_drv, t_mag4, t_mix)


def _reciprocal_sum(*times) -> float:
    rate = sum(1.0 / t for t in times if math.isfinite(t) and t > 0)
    return math.inf if rate == 0.0 else 1.0 / rate


@dataclass(frozen=True)
class MaxCoherencePoint:
    omega_d: float
    solution: ClockSolution | None
    t2: float
    error: str | None = None


def max_coherence_scan(omega_ds, ou: OUParams, drive_noise: DriveNoiseParams,
                       scheme: str = "basic", direction=(1.0, 1.0),
                       template: DriveConfig | None = None) -> list:
    """Predicted maximal coherence time across drive strengths.

    For each drive coupling, solve the scheme's clock condition and evaluate
    the combined coherence limit; solver failures are recorded and the point
    skipped.  Drive strengths are the lambda-frame couplings
    (omega_d = omega_b), rad/s.
    """
    if scheme not in ("basic", "improved"):
        raise SolverError(f"unknown scheme {scheme!r}")
    points = []
    for om in omega_ds:
        cfg = DriveConfig.from_couplings(om, om, delta=4.0 * om)
        if template is not None:
            cfg = replace(template, rabi1=om / SQRT2, rabi2=om / SQRT2,
                          delta=4.0 * om, delta0=0.0)
        try:
            if scheme == "basic":
                sol = optimize_basic(cfg, direction, ou=ou, drive_noise=drive_noise)
            else:
                sol = optimize_improved(cfg, direction, ou=ou, drive_noise=drive_noise)
            points.append(MaxCoherencePoint(omega_d=float(om), solution=sol,
                                            t2=sol.predicted_t2))
        except (SolverError, LabelingError) as exc:
            points.append(MaxCoherencePoint(omega_d=float(om), solution=None,
                                            t2=math.nan, error=str(exc)))
    return points
