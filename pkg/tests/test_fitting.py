import math

import numpy as np
import pytest

from triclock import (FitError, extract_envelope, fit_damped_sinusoid,
                      scan_detunings)
from triclock.fitting import fid_decay_time

from conftest import MHZ, coupling_config


def synthetic(taus, a=0.5, f=1e6, phi=0.3, t2=100e-6, c=0.5, rng=None, noise=0.0):
    vals = a * np.sin(2 * np.pi * f * taus + phi) * np.exp(-taus / t2) + c
    if noise:
        vals = vals + rng.normal(0.0, noise, taus.size)
    return vals


class TestDampedSinusoidFit:
    def test_noiseless_recovery(self):
        taus = np.linspace(0, 300e-6, 3000)
        vals = synthetic(taus)
        est = fit_damped_sinusoid((taus, vals))
        assert est.amplitude == pytest.approx(0.5, rel=1e-3)
        assert est.omega == pytest.approx(2 * np.pi * 1e6, rel=1e-3)
        assert est.t2 == pytest.approx(100e-6, rel=1e-3)
        assert est.offset == pytest.approx(0.5, abs=1e-4)
        assert est.residual_rms < 1e-6

    def test_noisy_recovery_and_coverage(self):
        # Monte Carlo coverage oracle: the reported t2 error should cover the
        # truth at 2 sigma in at least 90% of repetitions
        rng = np.random.default_rng(101)
        taus = np.linspace(0, 300e-6, 2400)
        hits = 0
        reps = 100
        for _ in range(reps):
            vals = synthetic(taus, rng=rng, noise=0.02)
            est = fit_damped_sinusoid((taus, vals))
            assert abs(est.t2 - 100e-6) < 0.05 * 100e-6
            if abs(est.t2 - 100e-6) < 2 * est.errors["t2"]:
                hits += 1
        assert hits >= 90

    def test_constant_signal_sentinel(self):
        taus = np.linspace(0, 1e-4, 50)
        est = fit_damped_sinusoid((taus, np.full(50, 0.25)))
        assert est.envelope_only
        assert est.omega == 0.0
        assert math.isinf(est.t2)

    def test_pure_decay_envelope_branch(self):
        taus = np.linspace(0, 3e-4, 200)
        vals = 0.4 * np.exp(-taus / 80e-6) + 0.5
        est = fit_damped_sinusoid((taus, vals), envelope_only=True)
        assert est.envelope_only
        assert est.t2 == pytest.approx(80e-6, rel=1e-6)

    def test_requires_enough_points(self):
        taus = np.linspace(0, 1e-5, 10)
        with pytest.raises(FitError):
            fit_damped_sinusoid((taus, np.sin(taus * 1e7)))

    def test_weighted_fit_uses_stderr(self):
        rng = np.random.default_rng(7)
        taus = np.linspace(0, 300e-6, 2400)
        vals = synthetic(taus, rng=rng, noise=0.01)
        errs = np.full(taus.size, 0.01)
        est = fit_damped_sinusoid((taus, vals), stderr=errs)
        assert est.t2 == pytest.approx(100e-6, rel=0.05)

    def test_residual_within_noise(self):
        rng = np.random.default_rng(8)
        taus = np.linspace(0, 300e-6, 500)
        vals = synthetic(taus, rng=rng, noise=0.02)
        est = fit_damped_sinusoid((taus, vals))
        assert est.residual_rms <= 2 * 0.02

    def test_stretch_exponent_optional(self):
        taus = np.linspace(0, 3e-4, 1000)
        vals = 0.5 * np.sin(2 * np.pi * 1e5 * taus) * np.exp(-((taus / 1e-4) ** 1.6)) + 0.5
        est = fit_damped_sinusoid((taus, vals), fit_stretch=True)
        assert est.stretch == pytest.approx(1.6, rel=0.05)


class TestEnvelope:
    def test_reference_time_constant(self):
        # pure e^{-t/5.3ms} cos(wt): recover the constant within 2%
        taus = np.linspace(0, 15e-3, 12000)
        vals = np.exp(-taus / 5.3e-3) * np.cos(2 * np.pi * 5e3 * taus)
        env = extract_envelope((taus, vals))
        assert env.time_constant == pytest.approx(5.3e-3, rel=0.02)

    def test_offset_baseline_removed(self):
        # survival-style signal decaying toward 1/2
        taus = np.linspace(0, 15e-3, 12000)
        vals = 0.5 + 0.5 * np.exp(-taus / 5.3e-3) * np.cos(2 * np.pi * 5e3 * taus)
        env = extract_envelope((taus, vals))
        assert env.time_constant == pytest.approx(5.3e-3, rel=0.02)

    def test_undamped_gives_infinity(self):
        taus = np.linspace(0, 1e-3, 4000)
        vals = 0.5 + 0.4 * np.cos(2 * np.pi * 2e4 * taus)
        env = extract_envelope((taus, vals))
        assert math.isinf(env.time_constant)

    def test_too_few_extrema(self):
        taus = np.linspace(0, 1e-3, 100)
        vals = 0.5 + 0.4 * np.cos(2 * np.pi * 2e3 * taus)
        with pytest.raises(FitError):
            extract_envelope((taus, vals))

    def test_scale_invariance(self):
        taus = np.linspace(0, 10e-3, 9000)
        base = np.exp(-taus / 2e-3) * np.cos(2 * np.pi * 4e3 * taus)
        t1 = extract_envelope((taus, base)).time_constant
        t2 = extract_envelope((taus, 0.37 * base)).time_constant
        assert t1 == pytest.approx(t2, rel=1e-9)

    def test_windowed_grid_supported(self):
        from triclock.engine import windowed_tau_grid
        taus = windowed_tau_grid(10e-3, 40, 1e-4, 50)
        vals = 0.5 + 0.5 * np.exp(-taus / 3e-3) * np.cos(2 * np.pi * 5e4 * taus)
        env = extract_envelope((taus, vals))
        assert env.time_constant == pytest.approx(3e-3, rel=0.05)


class TestFidDecay:
    def test_gaussian_envelope_crossing(self):
        taus = np.linspace(0, 6e-6, 300)
        vals = 0.5 + 0.5 * np.exp(-((taus / 2e-6) ** 2))
        assert fid_decay_time((taus, vals)) == pytest.approx(2e-6, rel=1e-3)


class TestScanDetunings:
    def _evaluator(self, t_limit=1e-3):
        from triclock import combined_coherence_time
        cfg = coupling_config(6.0, 6.0, 19.0)

        def evaluate(delta):
            return combined_coherence_time(cfg.with_detunings(delta),
                                           (1.0, 1.0), 0.005, t_limit)
        return evaluate

    def test_peak_location_basic_clock_point(self):
        evaluate = self._evaluator()
        deltas = np.linspace(14.0, 26.0, 121) * MHZ
        curve = scan_detunings(deltas, evaluate)
        assert curve.peak_delta / MHZ == pytest.approx(19.35, abs=0.05)
        assert not curve.peak_on_boundary

    def test_peak_height_reaches_limit(self):
        evaluate = self._evaluator(t_limit=1e-3)
        deltas = np.linspace(14.0, 26.0, 121) * MHZ
        curve = scan_detunings(deltas, evaluate)
        assert curve.peak_t2 == pytest.approx(1e-3, rel=1e-3)

    def test_refinement_invariance(self):
        evaluate = self._evaluator()
        coarse = scan_detunings(np.linspace(14, 26, 61) * MHZ, evaluate)
        fine = scan_detunings(np.linspace(14, 26, 121) * MHZ, evaluate)
        grid_step = (26 - 14) / 60 * MHZ
        assert abs(coarse.peak_delta - fine.peak_delta) < grid_step / 10

    def test_boundary_flagged(self):
        evaluate = self._evaluator()
        deltas = np.linspace(20.0, 30.0, 20) * MHZ
        curve = scan_detunings(deltas, evaluate)
        assert curve.peak_on_boundary

    def test_grid_size_enforced(self):
        with pytest.raises(FitError):
            scan_detunings(np.linspace(1, 2, 5) * MHZ, lambda d: 1.0)

    def test_fwhm_scales_with_limit(self):
        # the peak width scales as 1/t_limit (the product fwhm * t2peak is
        # set by the susceptibility slope, not by the limit)
        deltas = np.linspace(14.0, 26.0, 241) * MHZ
        c1 = scan_detunings(deltas, self._evaluator(t_limit=0.5e-3))
        c2 = scan_detunings(deltas, self._evaluator(t_limit=1.0e-3))
        assert c1.fwhm / c2.fwhm == pytest.approx(2.0, rel=0.05)
