import json

import numpy as np
import pytest

from triclock.cli import main
from triclock.config import load_preset, parse_config_text, resolve
from triclock.errors import ConfigError


def run(args):
    return main([str(a) for a in args])


class TestConfigParsing:
    def test_key_value_with_comments(self):
        raw = parse_config_text("# comment\n drive_d_mhz = 6.0 # inline\n\nseed = 3\n")
        assert raw == {"drive_d_mhz": 6.0, "seed": 3}

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("not_a_key = 1\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("seed = 1\nseed = 2\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("trials = lots\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError):
            resolve({}, "protocol")

    def test_negative_values_rejected(self):
        with pytest.raises(ConfigError):
            resolve({"t2_star_us": -1.0}, "optimize")

    def test_presets_all_parse(self):
        for name in ("fig3", "fig3-point", "fig3-inset", "fig4-theory",
                     "fig5", "fig5-inset", "fid-bare", "improved-2mhz",
                     "basic-6mhz"):
            assert load_preset(name)

    def test_drive_config_requires_single_convention(self):
        rc = resolve({"drive_d_mhz": 6.0, "rabi1_mhz": 6.0}, "optimize")
        with pytest.raises(ConfigError):
            rc.drive_config(delta_mhz=19.0)

    def test_rabi_convention(self):
        rc = resolve({"rabi1_mhz": 2.0}, "optimize")
        cfg = rc.drive_config(delta_mhz=10.0)
        assert cfg.omega_d == pytest.approx(np.sqrt(2) * 2 * np.pi * 2e6)


class TestCommands:
    def test_spectrum_preset(self, tmp_path):
        assert run(["spectrum", "--preset", "fig3-point", "--out", tmp_path]) == 0
        payload = json.loads((tmp_path / "fig3-point-spectrum.json").read_text())
        result = payload["result"]
        # susceptibility difference ~ 0 at the published operating point
        assert abs(result["clock_residual_mhz"]) < 1e-3
        assert payload["seed"] == 12345
        assert "Philox" in payload["rng"]

    def test_spectrum_uncoupled_eigenvalues(self, tmp_path):
        conf = tmp_path / "uncoupled.conf"
        conf.write_text("drive_d_mhz = 4.0\ndrive_b_mhz = 0.0\ndelta_mhz = 15.0\n"
                        "sigma_b_khz = 100.0\n")
        assert run(["spectrum", "--config", conf, "--out", tmp_path]) == 0
        payload = json.loads((tmp_path / "uncoupled-spectrum.json").read_text())
        e = payload["result"]["energies_mhz"]
        assert e["u~"] == pytest.approx(4.0, rel=1e-9)
        assert e["B~"] == pytest.approx(-15.0, rel=1e-9)
        assert e["d~"] == pytest.approx(-4.0, rel=1e-9)

    def test_spectrum_idempotent(self, tmp_path):
        run(["spectrum", "--preset", "fig3-point", "--out", tmp_path / "a"])
        run(["spectrum", "--preset", "fig3-point", "--out", tmp_path / "b"])
        a = (tmp_path / "a" / "fig3-point-spectrum.json").read_bytes()
        b = (tmp_path / "b" / "fig3-point-spectrum.json").read_bytes()
        assert a == b

    def test_optimize_basic_preset(self, tmp_path):
        assert run(["optimize", "--preset", "basic-6mhz", "--out", tmp_path]) == 0
        payload = json.loads((tmp_path / "basic-6mhz-solution.json").read_text())
        assert payload["result"]["delta_mhz"] == pytest.approx(19.35, abs=0.05)

    def test_optimize_improved_preset(self, tmp_path):
        assert run(["optimize", "--preset", "improved-2mhz", "--out", tmp_path]) == 0
        payload = json.loads((tmp_path / "improved-2mhz-solution.json").read_text())
        assert payload["result"]["delta_mhz"] == pytest.approx(8.9956, rel=0.01)
        assert payload["result"]["delta0_mhz"] == pytest.approx(1.7386, rel=0.01)

    def test_optimize_unsolvable_exit_code(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("scheme = basic\ndrive_d_mhz = 6.0\n"
                        "direction_w1 = 0.0\ndirection_w2 = 1.0\n"
                        "sigma_b_khz = 100.0\n")
        assert run(["optimize", "--config", conf, "--out", tmp_path]) == 4

    def test_scan_preset_fig3(self, tmp_path):
        assert run(["scan", "--preset", "fig3", "--out", tmp_path]) == 0
        payload = json.loads((tmp_path / "fig3-scan.json").read_text())
        assert payload["result"]["peak_delta_mhz"] == pytest.approx(19.35, abs=0.05)
        rows = (tmp_path / "fig3-scan.csv").read_text().splitlines()
        assert rows[0] == "delta_mhz,t2_us,t2_err_us"
        assert len(rows) == 1 + 121

    def test_scan_rejects_small_grid(self, tmp_path):
        conf = tmp_path / "small.conf"
        conf.write_text("scan_type = delta\ndrive_d_mhz = 6.0\n"
                        "delta_min_mhz = 15\ndelta_max_mhz = 25\ndelta_points = 3\n"
                        "t_limit_us = 500\n")
        assert run(["scan", "--config", conf, "--out", tmp_path]) == 2

    def test_protocol_trials_zero_exit_code(self, tmp_path):
        conf = tmp_path / "none.conf"
        conf.write_text("protocol = fid_bare\ndrive_d_mhz = 2.0\ndelta_mhz = 10\n"
                        "tau_max_us = 5\ntau_points = 50\ntrials = 0\n"
                        "sigma_b_khz = 100.0\n")
        assert run(["protocol", "--config", conf, "--out", tmp_path]) == 2

    def test_protocol_outputs_and_determinism(self, tmp_path):
        conf = tmp_path / "fid.conf"
        conf.write_text("protocol = fid_bare\ndrive_d_mhz = 2.0\ndelta_mhz = 10\n"
                        "tau_max_us = 5\ntau_points = 60\ntrials = 50\n"
                        "sigma_b_khz = 110.0\n")
        assert run(["protocol", "--config", conf, "--out", tmp_path / "a"]) == 0
        assert run(["protocol", "--config", conf, "--out", tmp_path / "b",
                    "--workers", 3]) == 0
        a = (tmp_path / "a" / "fid-signal.csv").read_bytes()
        b = (tmp_path / "b" / "fid-signal.csv").read_bytes()
        assert a == b
        rows = a.decode().splitlines()
        assert rows[0] == "tau_s,mean,stderr"
        sidecar = json.loads((tmp_path / "a" / "fid-signal.json").read_text())
        assert sidecar["config"]["trials"] == 50
        assert sidecar["seed"] == 12345
        assert "t2_star_us" in sidecar["result"]

    def test_seed_override_changes_output(self, tmp_path):
        conf = tmp_path / "fid.conf"
        conf.write_text("protocol = fid_bare\ndrive_d_mhz = 2.0\ndelta_mhz = 10\n"
                        "tau_max_us = 5\ntau_points = 60\ntrials = 20\n"
                        "sigma_b_khz = 110.0\n")
        run(["protocol", "--config", conf, "--out", tmp_path / "a"])
        run(["protocol", "--config", conf, "--out", tmp_path / "c", "--seed", 99])
        a = (tmp_path / "a" / "fid-signal.csv").read_bytes()
        c = (tmp_path / "c" / "fid-signal.csv").read_bytes()
        assert a != c

    def test_set_override(self, tmp_path):
        assert run(["spectrum", "--preset", "fig3-point", "--out", tmp_path,
                    "--set", "delta_mhz=25.0"]) == 0
        payload = json.loads((tmp_path / "fig3-point-spectrum.json").read_text())
        assert payload["config"]["delta_mhz"] == 25.0
        assert abs(payload["result"]["clock_residual_mhz"]) > 0.01

    def test_unknown_preset_exit_code(self, tmp_path):
        assert run(["spectrum", "--preset", "nope", "--out", tmp_path]) == 2

    def test_config_error_exit_code(self, tmp_path):
        conf = tmp_path / "broken.conf"
        conf.write_text("bogus_key = 1\n")
        assert run(["spectrum", "--config", conf, "--out", tmp_path]) == 2

    def test_labeling_failure_exit_code(self, tmp_path):
        conf = tmp_path / "crossing.conf"
        conf.write_text("drive_d_mhz = 6.0\ndelta_mhz = 5.0\nsigma_b_khz = 100.0\n")
        assert run(["spectrum", "--config", conf, "--out", tmp_path]) == 3
