import math

import numpy as np
import pytest

from triclock import DriveConfig
from triclock.noise import DriveNoiseParams, OUParams, calibrate_sigma

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6


def coupling_config(omega_d_mhz, omega_b_mhz, delta_mhz, delta0_mhz=0.0, **kw):
    """Config from published drive strengths (lambda-frame couplings, MHz)."""
    return DriveConfig.from_couplings(MHZ * omega_d_mhz, MHZ * omega_b_mhz,
                                      MHZ * delta_mhz, MHZ * delta0_mhz, **kw)


@pytest.fixture(scope="session")
def sigma_2us():
    """Magnetic noise std calibrated to T2* = 2 us at tau_c = 15 us."""
    return calibrate_sigma(2e-6, 15e-6, trials=4000, tol=0.02, seed=715)


@pytest.fixture(scope="session")
def ou_2us(sigma_2us):
    return OUParams(sigma=sigma_2us, tau_c=15e-6)


@pytest.fixture(scope="session")
def drive_noise_half_percent():
    return DriveNoiseParams(delta_rms=0.005, mode="correlated")


@pytest.fixture(scope="session")
def basic_clock_config():
    """6 MHz drive at its correlated-noise clock point."""
    from triclock import optimize_basic
    cfg = coupling_config(6.0, 6.0, 19.0)
    sol = optimize_basic(cfg, (1.0, 1.0))
    return cfg.with_detunings(sol.delta, 0.0)


@pytest.fixture(scope="session")
def improved_optimum_config():
    """2 MHz drive at the improved-scheme optimum."""
    from triclock import optimize_improved
    cfg = coupling_config(2.0, 2.0, 8.0)
    sol = optimize_improved(cfg, (1.0, 1.0))
    return cfg.with_detunings(sol.delta, sol.delta0)


def random_hermitian(rng, scale=1.0):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    return scale * (a + a.conj().T) / 2.0


def assert_unitary(u, atol=1e-10):
    assert np.max(np.abs(u.conj().T @ u - np.eye(3))) < atol
