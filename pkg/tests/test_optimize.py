import math

import numpy as np
import pytest

from triclock import (SolverError, drive_susceptibility, magnetic_second_order,
                      max_coherence_scan, optimize_basic, optimize_improved)
from triclock.noise import DriveNoiseParams, OUParams
from triclock.optimize import (basic_coherence_limit, improved_coherence_limit,
                               mixing_limited_time)

from conftest import MHZ, coupling_config


class TestBasicClockPoint:
    def test_six_mhz_drive(self):
        cfg = coupling_config(6.0, 6.0, 19.0)
        sol = optimize_basic(cfg, (1.0, 1.0))
        assert sol.delta / MHZ == pytest.approx(19.35, abs=0.05)
        assert abs(sol.residuals[0]) < 1e-8

    def test_scale_covariance(self):
        # the constraint is homogeneous in (couplings, delta)
        base = optimize_basic(coupling_config(6.0, 6.0, 19.0), (1.0, 1.0))
        scaled = optimize_basic(coupling_config(9.0, 9.0, 28.0), (1.0, 1.0))
        assert scaled.delta / base.delta == pytest.approx(1.5, rel=1e-3)

    def test_direction_magnitude_invariance(self):
        cfg = coupling_config(6.0, 6.0, 19.0)
        a = optimize_basic(cfg, (1.0, 1.0))
        b = optimize_basic(cfg, (-2.0, -2.0))
        c = optimize_basic(cfg, (0.3, 0.3))
        assert a.delta == pytest.approx(b.delta, rel=1e-9)
        assert a.delta == pytest.approx(c.delta, rel=1e-9)

    def test_residual_reevaluates_below_tolerance(self):
        cfg = coupling_config(4.0, 4.0, 13.0)
        sol = optimize_basic(cfg, (1.0, 1.0))
        sus = drive_susceptibility(cfg.with_detunings(sol.delta), (1.0, 1.0))
        assert abs(sus.e_b - sus.e_d) < 1e-8 * cfg.omega_d

    def test_no_sign_change_raises(self):
        cfg = coupling_config(6.0, 6.0, 19.0)
        with pytest.raises(SolverError):
            optimize_basic(cfg, (1.0, 1.0),
                           interval=(8.0 * cfg.omega_d, 10.0 * cfg.omega_d))


class TestImprovedOptimum:
    def test_two_mhz_drive_matches_reference(self):
        cfg = coupling_config(2.0, 2.0, 8.0)
        sol = optimize_improved(cfg, (1.0, 1.0))
        assert sol.delta / MHZ == pytest.approx(8.9956, rel=0.01)
        assert sol.delta0 / MHZ == pytest.approx(1.7386, rel=0.01)

    def test_constraints_vanish_at_solution(self):
        cfg = coupling_config(2.0, 2.0, 8.0)
        sol = optimize_improved(cfg, (1.0, 1.0))
        solved = cfg.with_detunings(sol.delta, sol.delta0)
        _, b, c = magnetic_second_order(solved)
        assert abs(b - c) / abs(b) < 1e-6
        sus = drive_susceptibility(solved, (1.0, 1.0))
        assert abs(sus.e_b - sus.e_d) < 1e-7 * cfg.omega_d

    def test_seed_perturbation_converges_to_same_point(self):
        cfg = coupling_config(2.0, 2.0, 8.0)
        ref = optimize_improved(cfg, (1.0, 1.0))
        for fac in (0.9, 1.1):
            sol = optimize_improved(cfg, (1.0, 1.0),
                                    seed_point=(ref.delta * fac,
                                                ref.delta0 * fac))
            assert sol.delta == pytest.approx(ref.delta, rel=1e-8)
            assert sol.delta0 == pytest.approx(ref.delta0, rel=1e-8)

    def test_homogeneity(self):
        a = optimize_improved(coupling_config(2.0, 2.0, 8.0), (1.0, 1.0))
        b = optimize_improved(coupling_config(4.0, 4.0, 16.0), (1.0, 1.0))
        assert b.delta / a.delta == pytest.approx(2.0, rel=1e-6)
        assert b.delta0 / a.delta0 == pytest.approx(2.0, rel=1e-6)


class TestCoherenceLimits:
    def test_basic_limit_near_published_value(self, ou_2us,
                                              drive_noise_half_percent):
        cfg = coupling_config(6.0, 6.0, 19.0)
        sol = optimize_basic(cfg, (1.0, 1.0), ou=ou_2us,
                             drive_noise=drive_noise_half_percent)
        assert sol.predicted_t2 == pytest.approx(1e-3, rel=0.3)

    def test_improved_limit_near_published_value(self, ou_2us,
                                                 drive_noise_half_percent):
        cfg = coupling_config(2.0, 2.0, 8.0)
        sol = optimize_improved(cfg, (1.0, 1.0), ou=ou_2us,
                                drive_noise=drive_noise_half_percent)
        assert sol.predicted_t2 == pytest.approx(5.3e-3, rel=0.5)

    def test_mixing_limit_scaling(self, improved_optimum_config, ou_2us):
        t1 = mixing_limited_time(improved_optimum_config, ou_2us, 0.005)
        t2 = mixing_limited_time(improved_optimum_config, ou_2us, 0.010)
        assert t1 / t2 == pytest.approx(2.0, rel=1e-9)

    def test_zero_noise_limits_are_infinite(self, improved_optimum_config):
        quiet = OUParams(sigma=0.0, tau_c=15e-6)
        none = DriveNoiseParams(delta_rms=0.0)
        assert math.isinf(improved_coherence_limit(improved_optimum_config,
                                                   (1.0, 1.0), quiet, none))


class TestMaxCoherenceScan:
    def test_basic_peak(self, ou_2us, drive_noise_half_percent):
        omegas = MHZ * np.linspace(2.0, 14.0, 13)
        points = max_coherence_scan(omegas, ou_2us, drive_noise_half_percent,
                                    scheme="basic")
        ts = np.array([p.t2 for p in points])
        assert np.all(np.isfinite(ts))
        best = points[int(np.argmax(ts))]
        assert 8.0 <= best.omega_d / MHZ <= 12.0
        assert best.t2 == pytest.approx(1.2e-3, rel=0.3)

    def test_improved_at_two_mhz(self, ou_2us, drive_noise_half_percent):
        points = max_coherence_scan(np.array([MHZ * 2.0]), ou_2us,
                                    drive_noise_half_percent, scheme="improved")
        assert points[0].t2 == pytest.approx(5.3e-3, rel=0.5)

    def test_zero_magnetic_noise_monotone_decreasing(self, drive_noise_half_percent):
        quiet = OUParams(sigma=0.0, tau_c=15e-6)
        omegas = MHZ * np.linspace(2.0, 14.0, 7)
        points = max_coherence_scan(omegas, quiet, drive_noise_half_percent,
                                    scheme="basic")
        ts = np.array([p.t2 for p in points])
        assert np.all(np.diff(ts) < 0)

    def test_failures_recorded_not_raised(self, ou_2us, drive_noise_half_percent):
        # a noise direction whose susceptibility difference never changes
        # sign has no clock point; the point is recorded as failed
        points = max_coherence_scan(np.array([MHZ * 2.0]), ou_2us,
                                    drive_noise_half_percent, scheme="basic",
                                    direction=(0.0, 1.0))
        assert points[0].solution is None and points[0].error
